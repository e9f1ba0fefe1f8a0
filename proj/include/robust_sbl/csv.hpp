#ifndef ROBUST_SBL_CSV_HPP
#define ROBUST_SBL_CSV_HPP

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "robust_sbl/glm.hpp"

namespace robust_sbl {

/// Numeric CSV with a header row. The column named `target`, when present, is
/// split off; every other column is a feature in header order.
struct CsvTable {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd features;
  std::optional<Eigen::VectorXd> target;
};

/// Throws InvalidArgument with "<source>:<line>: ..." on malformed input.
/// Blank lines are skipped.
CsvTable parse_csv(std::istream& in, const std::string& source = "<input>");
CsvTable read_csv(const std::string& path);

enum class TaskChoice { Auto, Regression, Classification };

/// Classification when every target is exactly 0 or 1, regression otherwise.
Task infer_task(const Eigen::VectorXd& t);

/// Dataset from a table that has a target column.
Dataset to_dataset(const CsvTable& table, TaskChoice choice);

}  // namespace robust_sbl

#endif  // ROBUST_SBL_CSV_HPP
