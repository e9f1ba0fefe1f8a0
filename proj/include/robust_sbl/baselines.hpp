#ifndef ROBUST_SBL_BASELINES_HPP
#define ROBUST_SBL_BASELINES_HPP

#include <Eigen/Dense>

#include <optional>
#include <string_view>

#include "robust_sbl/glm.hpp"
#include "robust_sbl/vi_engine.hpp"

namespace robust_sbl {

enum class BaselineKind { SblGaussian, SblBinomial, Sbcl };

/// Every estimator reachable from the CLI and the benchmark harness.
enum class EstimatorKind { SblMee, SblGaussian, SblBinomial, Sbcl };

std::string_view to_string(EstimatorKind kind);
/// Parses "sbl-mee", "sbl-gaussian", "sbl-binomial" or "sbcl".
std::optional<EstimatorKind> parse_estimator(std::string_view name);

/// Throws InvalidArgument when `kind` cannot be fitted to a `task` dataset.
/// sbl-gaussian is regression-only, sbl-binomial classification-only.
void check_compatible(EstimatorKind kind, Task task);

/// Whether the estimator has a kernel bandwidth to tune.
bool uses_bandwidth(EstimatorKind kind);

/// Σ e_i^2 / (N - dof). Requires N > dof.
double estimate_noise_variance(const Eigen::VectorXd& residuals, double dof);

struct GaussianPosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // diagonal of the posterior covariance
};

/// Exact posterior of w under t ~ N(Xw, noise_variance I), w ~ N(0, diag(a)^-1).
GaussianPosterior gaussian_posterior(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                                     const Eigen::VectorXd& a, double noise_variance);

/// SblGaussian: ARD regression with the exact Gaussian posterior and (unless
/// cfg.noise_variance is set) the noise variance re-estimated every iteration.
/// SblBinomial: Laplace-approximated logistic ARD with a damped Newton w-step.
/// Sbcl: the variational engine with the correntropy likelihood N Σ k(e_i).
FitResult fit_baseline(const Dataset& data, BaselineKind kind, const FitConfig& cfg);

FitResult fit_estimator(const Dataset& data, EstimatorKind kind, const FitConfig& cfg);

}  // namespace robust_sbl

#endif  // ROBUST_SBL_BASELINES_HPP
