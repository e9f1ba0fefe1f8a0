#ifndef ROBUST_SBL_MODEL_FILE_HPP
#define ROBUST_SBL_MODEL_FILE_HPP

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "robust_sbl/glm.hpp"
#include "robust_sbl/vi_engine.hpp"

namespace robust_sbl {

/// Serialized fit: sparse weights over the surviving dimensions plus enough
/// metadata to audit the run.
struct ModelFile {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  Link link = Link::Identity;
  Task task = Task::Regression;
  Eigen::Index d_total = 0;
  /// (index, weight), strictly increasing indices below d_total.
  std::vector<std::pair<Eigen::Index, double>> weights;
  /// E[a_d] for the indices in `weights`, same order.
  std::vector<double> a_expect;
  std::vector<std::string> feature_names;

  std::string estimator;
  double sigma = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Last (up to) ten entries of the objective trace.
  std::vector<double> objective_tail;
};

ModelFile make_model_file(const FitResult& fit, Task task,
                          std::vector<std::string> feature_names = {});

/// Throws InvalidArgument when the invariants do not hold.
void validate(const ModelFile& model);

GlmModel to_glm(const ModelFile& model);

std::string to_json_text(const ModelFile& model);
ModelFile parse_model_json(const std::string& text);

void write_model_file(const ModelFile& model, const std::string& path);
ModelFile read_model_file(const std::string& path);

}  // namespace robust_sbl

#endif  // ROBUST_SBL_MODEL_FILE_HPP
