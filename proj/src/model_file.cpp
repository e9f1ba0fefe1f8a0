#include "robust_sbl/model_file.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "robust_sbl/error.hpp"

namespace robust_sbl {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::size_t kTailLength = 10;

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(std::string("model file lacks '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InvalidArgument(std::string("model file field '") + key + "' has the wrong type");
  }
}

}  // namespace

ModelFile make_model_file(const FitResult& fit, Task task,
                          std::vector<std::string> feature_names) {
  ModelFile m;
  m.link = link_for(task);
  m.task = task;
  m.d_total = fit.state.w_star.size();
  for (const Eigen::Index d : fit.state.active.indices()) {
    m.weights.emplace_back(d, fit.state.w_star[d]);
    m.a_expect.push_back(fit.state.a_expect[d]);
  }
  m.feature_names = std::move(feature_names);
  m.estimator = fit.report.estimator;
  m.sigma = fit.report.sigma;
  m.iterations = fit.report.iterations_used;
  m.converged = fit.report.converged;
  const auto& trace = fit.report.objective_trace;
  const std::size_t from = trace.size() > kTailLength ? trace.size() - kTailLength : 0;
  m.objective_tail.assign(trace.begin() + static_cast<std::ptrdiff_t>(from), trace.end());
  validate(m);
  return m;
}

void validate(const ModelFile& model) {
  if (model.schema_version != ModelFile::kSchemaVersion) {
    throw InvalidArgument("unsupported model schema version " +
                          std::to_string(model.schema_version));
  }
  if (model.d_total < 0) throw InvalidArgument("d_total must be non-negative");
  if (model.a_expect.size() != model.weights.size()) {
    throw InvalidArgument("a_expect and weights differ in length");
  }
  Eigen::Index previous = -1;
  for (const auto& [index, value] : model.weights) {
    if (index <= previous || index >= model.d_total) {
      throw InvalidArgument("weight indices must be strictly increasing and below d_total");
    }
    if (!std::isfinite(value)) throw InvalidArgument("non-finite weight");
    previous = index;
  }
  if (!model.feature_names.empty() &&
      static_cast<Eigen::Index>(model.feature_names.size()) != model.d_total) {
    throw InvalidArgument("feature_names length differs from d_total");
  }
}

GlmModel to_glm(const ModelFile& model) {
  validate(model);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(model.d_total);
  for (const auto& [index, value] : model.weights) w[index] = value;
  return make_model(model.link, std::move(w));
}

std::string to_json_text(const ModelFile& model) {
  validate(model);
  Json weights = Json::array();
  for (const auto& [index, value] : model.weights) weights.push_back({index, value});
  Json j;
  j["schema_version"] = model.schema_version;
  j["link"] = std::string(to_string(model.link));
  j["task"] = std::string(to_string(model.task));
  j["d_total"] = model.d_total;
  j["weights"] = std::move(weights);
  j["a_expect"] = model.a_expect;
  j["feature_names"] = model.feature_names;
  j["metadata"] = {{"estimator", model.estimator},
                   {"sigma", model.sigma},
                   {"iterations", model.iterations},
                   {"converged", model.converged},
                   {"objective_tail", model.objective_tail}};
  return j.dump(2) + "\n";
}

ModelFile parse_model_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& err) {
    throw InvalidArgument(std::string("model file is not valid JSON: ") + err.what());
  }
  if (!j.is_object()) throw InvalidArgument("model file must hold a JSON object");

  ModelFile m;
  m.schema_version = field<int>(j, "schema_version");
  const auto link = field<std::string>(j, "link");
  if (link == to_string(Link::Identity)) {
    m.link = Link::Identity;
  } else if (link == to_string(Link::Logistic)) {
    m.link = Link::Logistic;
  } else {
    throw InvalidArgument("unknown link '" + link + "'");
  }
  const auto task = field<std::string>(j, "task");
  if (task == to_string(Task::Regression)) {
    m.task = Task::Regression;
  } else if (task == to_string(Task::BinaryClassification)) {
    m.task = Task::BinaryClassification;
  } else {
    throw InvalidArgument("unknown task '" + task + "'");
  }
  m.d_total = field<Eigen::Index>(j, "d_total");
  for (const auto& pair : field<Json>(j, "weights")) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
        !pair[1].is_number()) {
      throw InvalidArgument("weights must be [index, value] pairs");
    }
    m.weights.emplace_back(pair[0].get<Eigen::Index>(), pair[1].get<double>());
  }
  m.a_expect = field<std::vector<double>>(j, "a_expect");
  m.feature_names = field<std::vector<std::string>>(j, "feature_names");
  const Json meta = field<Json>(j, "metadata");
  m.estimator = field<std::string>(meta, "estimator");
  m.sigma = field<double>(meta, "sigma");
  m.iterations = field<int>(meta, "iterations");
  m.converged = field<bool>(meta, "converged");
  m.objective_tail = field<std::vector<double>>(meta, "objective_tail");
  validate(m);
  return m;
}

void write_model_file(const ModelFile& model, const std::string& path) {
  const std::string text = to_json_text(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
  if (!out) throw InvalidArgument("failed writing '" + path + "'");
}

ModelFile read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_model_json(buffer.str());
}

}  // namespace robust_sbl
