#ifndef ROBUST_SBL_LIKELIHOOD_HPP
#define ROBUST_SBL_LIKELIHOOD_HPP

#include <Eigen/Dense>

#include <memory>
#include <optional>

#include "robust_sbl/mee.hpp"

namespace robust_sbl {

/// Per-residual view of a kernel log-likelihood sum_i l(e_i) at one residual.
struct ResidualTerm {
  double value = 0.0;      // l(e)
  double slope = 0.0;      // dl/de
  double curvature = 0.0;  // d2l/de2
  /// Half-quadratic minorizer l(e') >= const - weight/2 (e' - center)^2,
  /// tight at e' = e.
  double hq_weight = 0.0;
  double hq_center = 0.0;
};

/// Log-likelihood written as a sum of Gaussian-kernel terms of the residuals.
class ErrorLikelihood {
 public:
  virtual ~ErrorLikelihood() = default;

  virtual double sigma() const = 0;
  virtual ResidualTerm term(double e) const = 0;

  /// Likelihood rebuilt for a new error set, or nullptr when it is static.
  virtual std::shared_ptr<const ErrorLikelihood> refreshed(const Eigen::VectorXd& errors) const {
    (void)errors;
    return nullptr;
  }

  /// Codebook behind the likelihood, when it has one.
  virtual const Codebook* codebook() const { return nullptr; }

  double value(const Eigen::VectorXd& errors) const;
};

/// sum_i sum_j η_j k_σ(e_i - c_j). When `epsilon` is set the codebook is
/// rebuilt from the current residuals on refresh; `epsilon` nullopt with
/// `adaptive` true means the range/20 rule.
class MeeLikelihood final : public ErrorLikelihood {
 public:
  /// Static codebook (restricted or forced); refresh is a no-op.
  MeeLikelihood(Codebook cb, KernelConfig kernel);

  /// Codebook built from `errors` and rebuilt on every refresh.
  static std::shared_ptr<const MeeLikelihood> adaptive(const Eigen::VectorXd& errors,
                                                       KernelConfig kernel,
                                                       std::optional<double> fixed_epsilon);

  double sigma() const override { return kernel_.sigma; }
  ResidualTerm term(double e) const override;
  std::shared_ptr<const ErrorLikelihood> refreshed(const Eigen::VectorXd& errors) const override;
  const Codebook* codebook() const override { return &cb_; }

 private:
  Codebook cb_;
  KernelConfig kernel_;
  bool adaptive_ = false;
  std::optional<double> fixed_epsilon_;
};

/// scale * sum_i k_σ(e_i), the correntropy log-likelihood.
class CorrentropyLikelihood final : public ErrorLikelihood {
 public:
  CorrentropyLikelihood(KernelConfig kernel, double scale);

  double sigma() const override { return kernel_.sigma; }
  ResidualTerm term(double e) const override;

 private:
  KernelConfig kernel_;
  double scale_;
};

}  // namespace robust_sbl

#endif  // ROBUST_SBL_LIKELIHOOD_HPP
