#include "robust_sbl/glm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robust_sbl/error.hpp"

namespace robust_sbl {

std::string_view to_string(Task task) {
  return task == Task::Regression ? "regression" : "classification";
}

std::string_view to_string(Link link) {
  return link == Link::Identity ? "identity" : "logistic";
}

Link link_for(Task task) {
  return task == Task::Regression ? Link::Identity : Link::Logistic;
}

Dataset make_dataset(Eigen::MatrixXd x, Eigen::VectorXd t, Task task) {
  if (x.rows() < 1 || x.cols() < 1) {
    throw InvalidArgument("dataset needs at least one sample and one feature");
  }
  if (t.size() != x.rows()) {
    throw InvalidArgument("target length " + std::to_string(t.size()) +
                          " does not match sample count " + std::to_string(x.rows()));
  }
  if (!x.allFinite()) throw InvalidArgument("covariates contain non-finite values");
  if (!t.allFinite()) throw InvalidArgument("targets contain non-finite values");
  if (task == Task::BinaryClassification) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      if (t[i] != 0.0 && t[i] != 1.0) {
        throw InvalidArgument("classification target at row " + std::to_string(i) +
                              " is not 0 or 1");
      }
    }
  }
  return Dataset{std::move(x), std::move(t), task};
}

Dataset subset_rows(const Dataset& data, const std::vector<Eigen::Index>& rows) {
  Dataset out;
  out.task = data.task;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), data.features());
  out.t.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    out.x.row(i) = data.x.row(rows[r]);
    out.t[i] = data.t[rows[r]];
  }
  return out;
}

GlmModel make_model(Link link, Eigen::VectorXd w) {
  if (!w.allFinite()) throw InvalidArgument("model weights contain non-finite values");
  return GlmModel{link, std::move(w)};
}

ActiveSet::ActiveSet(Eigen::Index dims) : mask_(static_cast<std::size_t>(dims), true) {
  indices_.reserve(static_cast<std::size_t>(dims));
  for (Eigen::Index d = 0; d < dims; ++d) indices_.push_back(d);
}

void ActiveSet::remove(Eigen::Index d) {
  if (d < 0 || d >= dims()) throw InvalidArgument("dimension out of range");
  if (!mask_[static_cast<std::size_t>(d)]) return;
  mask_[static_cast<std::size_t>(d)] = false;
  indices_.erase(std::find(indices_.begin(), indices_.end(), d));
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const ActiveSet& active) {
  Eigen::MatrixXd out(x.rows(), active.size());
  for (Eigen::Index k = 0; k < active.size(); ++k) {
    out.col(k) = x.col(active.indices()[static_cast<std::size_t>(k)]);
  }
  return out;
}

double sigmoid(double z) {
  z = std::clamp(z, -kLogitClamp, kLogitClamp);
  return 1.0 / (1.0 + std::exp(-z));
}

double predict(const GlmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != model.w.size()) {
    throw InvalidArgument("input has " + std::to_string(x.size()) + " features, model expects " +
                          std::to_string(model.w.size()));
  }
  const double z = x.dot(model.w);
  return model.link == Link::Identity ? z : sigmoid(z);
}

Eigen::VectorXd predict_all(Link link, const Eigen::MatrixXd& x, const Eigen::VectorXd& w) {
  if (x.cols() != w.size()) {
    throw InvalidArgument("design has " + std::to_string(x.cols()) +
                          " columns, weights have length " + std::to_string(w.size()));
  }
  Eigen::VectorXd z = x * w;
  if (link == Link::Logistic) z = z.unaryExpr([](double v) { return sigmoid(v); });
  return z;
}

Eigen::VectorXd predict_all(const GlmModel& model, const Eigen::MatrixXd& x) {
  return predict_all(model.link, x, model.w);
}

Eigen::VectorXd residuals(const GlmModel& model, const Dataset& data) {
  return data.t - predict_all(model, data.x);
}

}  // namespace robust_sbl
