#include "robust_sbl/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string_view>

#include "robust_sbl/error.hpp"

namespace robust_sbl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    fields.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos
                                                                            : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

std::string located(const std::string& source, std::size_t line, const std::string& what) {
  return source + ":" + std::to_string(line) + ": " + what;
}

}  // namespace

CsvTable parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (auto field : split(line)) {
      if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
        field = field.substr(1, field.size() - 2);
      }
      if (field.empty()) throw InvalidArgument(located(source, line_no, "empty column name"));
      header.emplace_back(field);
    }
    break;
  }
  if (header.empty()) throw InvalidArgument(source + ": missing header row");

  std::optional<std::size_t> target_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] != "target") continue;
    if (target_col) throw InvalidArgument(located(source, line_no, "duplicate 'target' column"));
    target_col = c;
  }

  CsvTable table;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!target_col || c != *target_col) table.feature_names.push_back(header[c]);
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw InvalidArgument(located(source, line_no,
                                    "expected " + std::to_string(header.size()) +
                                        " fields, found " + std::to_string(fields.size())));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto f = fields[c];
      const auto number = f.size() > 1 && f.front() == '+' ? f.substr(1) : f;
      const auto [end, ec] =
          std::from_chars(number.data(), number.data() + number.size(), row[c]);
      if (f.empty() || ec != std::errc() || end != number.data() + number.size() ||
          !std::isfinite(row[c])) {
        throw InvalidArgument(located(source, line_no,
                                      "invalid number '" + std::string(f) + "' in column '" +
                                          header[c] + "'"));
      }
    }
    rows.push_back(std::move(row));
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  table.features.resize(n, static_cast<Eigen::Index>(table.feature_names.size()));
  if (target_col) table.target = Eigen::VectorXd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index j = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const double v = rows[static_cast<std::size_t>(i)][c];
      if (target_col && c == *target_col) {
        (*table.target)[i] = v;
      } else {
        table.features(i, j++) = v;
      }
    }
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return parse_csv(in, path);
}

Task infer_task(const Eigen::VectorXd& t) {
  if (t.size() == 0) return Task::Regression;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (t[i] != 0.0 && t[i] != 1.0) return Task::Regression;
  }
  return Task::BinaryClassification;
}

Dataset to_dataset(const CsvTable& table, TaskChoice choice) {
  if (!table.target) throw InvalidArgument("input has no 'target' column");
  Task task = Task::Regression;
  switch (choice) {
    case TaskChoice::Auto: task = infer_task(*table.target); break;
    case TaskChoice::Regression: task = Task::Regression; break;
    case TaskChoice::Classification: task = Task::BinaryClassification; break;
  }
  return make_dataset(table.features, *table.target, task);
}

}  // namespace robust_sbl
