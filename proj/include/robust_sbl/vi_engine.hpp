#ifndef ROBUST_SBL_VI_ENGINE_HPP
#define ROBUST_SBL_VI_ENGINE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "robust_sbl/glm.hpp"
#include "robust_sbl/likelihood.hpp"
#include "robust_sbl/mee.hpp"

namespace robust_sbl {

enum class RelevanceUpdate { Slow, Fast };

/// How the quantization threshold is chosen when a regression codebook is rebuilt.
struct EpsilonRule {
  enum class Kind { RangeOverTwenty, Fixed };
  Kind kind = Kind::RangeOverTwenty;
  double value = 0.0;

  static EpsilonRule range_over_twenty() { return {}; }
  static EpsilonRule fixed(double eps) { return {Kind::Fixed, eps}; }
  std::optional<double> fixed_value() const {
    return kind == Kind::Fixed ? std::optional<double>(value) : std::nullopt;
  }
};

/// Adaptive: greedy quantized codebook for regression, restricted codebook for
/// classification. ForcedSingle: codebook ([0], [N]) and never rebuilt.
enum class CodebookMode { Adaptive, ForcedSingle };

struct FitConfig {
  double a_max = 1e6;
  int max_outer_iters = 300;
  KernelConfig kernel{1.0};
  EpsilonRule epsilon_rule;
  int w_step_max_iters = 50;
  double w_step_tol = 1e-6;
  /// Convergence needs the relative change of log q_w(w*) below outer_tol,
  /// no pruning in the iteration, and every active log E[a_d] moving by less
  /// than relevance_tol.
  double outer_tol = 1e-4;
  double relevance_tol = 1e-3;
  RelevanceUpdate relevance_update = RelevanceUpdate::Fast;
  /// Initial diagonal jitter when the negative Hessian is not positive
  /// definite; 0 selects 1e-8 times the mean absolute diagonal.
  double hessian_jitter = 0.0;
  std::uint64_t seed = 0;
  CodebookMode codebook_mode = CodebookMode::Adaptive;
  /// Gaussian baseline only: fixed noise variance, or re-estimated each iteration.
  std::optional<double> noise_variance;
};

/// Throws InvalidArgument when a field is out of range.
void validate(const FitConfig& cfg);

struct PruneEvent {
  int iteration = 0;
  Eigen::Index dimension = 0;
};

struct FitReport {
  std::string estimator;
  /// log q_w(w*) after each outer iteration's w-step.
  std::vector<double> objective_trace;
  std::vector<PruneEvent> pruned;
  /// Active-dimension count after each outer iteration's pruning.
  std::vector<Eigen::Index> active_trace;
  /// Largest codebook seen during each outer iteration (0 when none).
  std::vector<Eigen::Index> codebook_size_trace;
  bool converged = false;
  bool all_pruned = false;
  int iterations_used = 0;
  double wall_time_s = 0.0;
  double a_max = 0.0;
  int max_outer_iters = 0;
  double sigma = 0.0;
  std::optional<double> noise_variance;
};

struct PosteriorState {
  Eigen::VectorXd w_star;
  Eigen::VectorXd h_inv_diag;
  Eigen::VectorXd a_expect;
  ActiveSet active;
  std::optional<Codebook> codebook;
};

struct FitResult {
  PosteriorState state;
  FitReport report;
};

/// J(w) = log-likelihood(t - g(Xw)) - 1/2 w' diag(a) w.
double log_qw(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, Link link,
              const ErrorLikelihood& lik, const Eigen::VectorXd& a, const Eigen::VectorXd& w);

Eigen::VectorXd log_qw_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, Link link,
                                const ErrorLikelihood& lik, const Eigen::VectorXd& a,
                                const Eigen::VectorXd& w);

struct WStepOptions {
  int max_iters = 200;
  double tol = 1e-6;
};

struct WStepResult {
  Eigen::VectorXd w;
  /// Likelihood in force when the step ended (differs from the input only
  /// for adaptive codebooks).
  std::shared_ptr<const ErrorLikelihood> likelihood;
  int iterations = 0;
  /// J after each iteration, evaluated with the likelihood used by that iteration.
  std::vector<double> objective_trace;
  Eigen::Index max_codebook_size = 0;
};

/// Maximizes J by half-quadratic reweighting. Identity link: each iteration is
/// the weighted ridge solve of the quadratic minorizer. Logistic link: each
/// iteration runs damped Gauss-Newton on the minorizer with step halving.
/// Adaptive likelihoods are refreshed from the residuals after every iteration.
WStepResult optimize_w(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, Link link,
                       std::shared_ptr<const ErrorLikelihood> lik, const Eigen::VectorXd& a,
                       const Eigen::VectorXd& w_init, const WStepOptions& opts);

/// Negative Hessian of J at w, without any regularization. `second_order`
/// toggles the term involving the second derivative of the prediction.
Eigen::MatrixXd negative_hessian_raw(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                                     Link link, const ErrorLikelihood& lik,
                                     const Eigen::VectorXd& a, const Eigen::VectorXd& w,
                                     bool second_order = true);

struct NegativeHessian {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd inverse_diagonal;
  double jitter_added = 0.0;
};

/// Adds jitter * I (doubling from `initial_jitter`, or 1e-8 * mean |diag|
/// when it is 0) until `h` is positive definite, then inverts its diagonal.
/// Throws NumericalFailure after 50 doublings.
NegativeHessian regularize_hessian(Eigen::MatrixXd h, double initial_jitter, int iteration = 0);

NegativeHessian negative_hessian(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, Link link,
                                 const ErrorLikelihood& lik, const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& w, double initial_jitter = 0.0);

/// E[w_d^2] = w*_d^2 + [H^-1]_dd.
double expected_w_sq(double w_star_d, double h_inv_dd);

/// Slow: 1 / E[w_d^2]. Fast: (1 - a_old h_inv) / w*^2, or a_max when the
/// numerator is not positive or w* = 0.
double update_relevance(double a_old, double w_star_d, double h_inv_dd, RelevanceUpdate mode,
                        double a_max);

/// Variational ARD loop shared by every kernel-likelihood estimator: w-step,
/// Laplace Hessian, relevance update, pruning at a_max, and a final MAP w-step.
FitResult fit_with_likelihood(const Dataset& data, const FitConfig& cfg,
                              std::shared_ptr<const ErrorLikelihood> likelihood,
                              const Eigen::VectorXd& w_init, std::string estimator);

/// Ridge solution (X'X + lambda I)^-1 X't.
Eigen::VectorXd ridge_solution(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                               double lambda = 1.0);

/// SBL with the minimum-error-entropy likelihood.
FitResult fit_sbl_mee(const Dataset& data, const FitConfig& cfg);

GlmModel map_predictor(const PosteriorState& state, Link link);

}  // namespace robust_sbl

#endif  // ROBUST_SBL_VI_ENGINE_HPP
