#ifndef ROBUST_SBL_GLM_HPP
#define ROBUST_SBL_GLM_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <string_view>
#include <vector>

namespace robust_sbl {

enum class Task { Regression, BinaryClassification };
enum class Link { Identity, Logistic };

std::string_view to_string(Task task);
std::string_view to_string(Link link);

/// Link that matches a task: identity for regression, logistic for 0/1 labels.
Link link_for(Task task);

/// Covariates (N x D) with their targets. Construct through make_dataset()
/// to have the invariants checked.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd t;
  Task task = Task::Regression;

  Eigen::Index samples() const { return x.rows(); }
  Eigen::Index features() const { return x.cols(); }
};

/// Validates shapes, finiteness and (for classification) that every target is 0 or 1.
Dataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXd t, Task task);

/// Rows `rows` of `data`, in the given order.
Dataset subset_rows(const Dataset& data, const std::vector<Eigen::Index>& rows);

struct GlmModel {
  Link link = Link::Identity;
  Eigen::VectorXd w;
};

GlmModel make_model(Link link, Eigen::VectorXd w);

/// Boolean mask over D dimensions together with the ordered list of true
/// positions. Dimensions can only be removed.
class ActiveSet {
 public:
  ActiveSet() = default;
  explicit ActiveSet(Eigen::Index dims);

  bool contains(Eigen::Index d) const { return mask_[static_cast<std::size_t>(d)]; }
  const std::vector<bool>& mask() const { return mask_; }
  const std::vector<Eigen::Index>& indices() const { return indices_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(indices_.size()); }
  Eigen::Index dims() const { return static_cast<Eigen::Index>(mask_.size()); }
  bool empty() const { return indices_.empty(); }

  void remove(Eigen::Index d);

 private:
  std::vector<bool> mask_;
  std::vector<Eigen::Index> indices_;
};

/// Columns of `x` listed in `active`.
Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const ActiveSet& active);

inline constexpr double kLogitClamp = 35.0;

/// Logistic function with the argument clamped to [-35, 35].
double sigmoid(double z);

double predict(const GlmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Link applied to every row of `x` for weights `w`.
Eigen::VectorXd predict_all(Link link, const Eigen::MatrixXd& x, const Eigen::VectorXd& w);
Eigen::VectorXd predict_all(const GlmModel& model, const Eigen::MatrixXd& x);

/// e = t - prediction, one entry per sample.
Eigen::VectorXd residuals(const GlmModel& model, const Dataset& data);

}  // namespace robust_sbl

#endif  // ROBUST_SBL_GLM_HPP
