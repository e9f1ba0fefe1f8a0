#include "robust_sbl/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>

#include "robust_sbl/error.hpp"
#include "robust_sbl/likelihood.hpp"

namespace robust_sbl {

namespace {

struct StepOutcome {
  Eigen::VectorXd w;
  Eigen::VectorXd h_inv;
  double objective = 0.0;
};

using StepFn = std::function<StepOutcome(const Eigen::MatrixXd& xa, const Eigen::VectorXd& aa,
                                         const Eigen::VectorXd& wa, int iteration)>;
using AfterStepFn = std::function<void(const Eigen::MatrixXd& xa, const Eigen::VectorXd& aa,
                                       const StepOutcome& step)>;

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& h, int iteration) {
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure("posterior precision is not positive definite", iteration);
  }
  return llt.solve(Eigen::MatrixXd::Identity(h.rows(), h.cols()));
}

// ARD loop for likelihoods with their own exact w-step: relevance update,
// pruning at a_max, and a final w-step at the last relevance values.
FitResult ard_loop(const Dataset& data, const FitConfig& cfg, const Eigen::VectorXd& w_init,
                   std::string estimator, const StepFn& step, const AfterStepFn& after) {
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index dims = data.features();

  FitResult result;
  FitReport& report = result.report;
  report.estimator = std::move(estimator);
  report.a_max = cfg.a_max;
  report.max_outer_iters = cfg.max_outer_iters;
  report.sigma = cfg.kernel.sigma;

  PosteriorState& state = result.state;
  state.active = ActiveSet(dims);
  state.w_star = w_init;
  state.h_inv_diag = Eigen::VectorXd::Zero(dims);
  state.a_expect = Eigen::VectorXd::Ones(dims);

  auto gather = [&](const Eigen::VectorXd& full) {
    Eigen::VectorXd out(state.active.size());
    for (Eigen::Index k = 0; k < out.size(); ++k) {
      out[k] = full[state.active.indices()[static_cast<std::size_t>(k)]];
    }
    return out;
  };
  auto scatter = [&](const Eigen::VectorXd& part, Eigen::VectorXd& full) {
    for (Eigen::Index k = 0; k < part.size(); ++k) {
      full[state.active.indices()[static_cast<std::size_t>(k)]] = part[k];
    }
  };

  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= cfg.max_outer_iters; ++it) {
    const Eigen::MatrixXd xa = select_columns(data.x, state.active);
    const Eigen::VectorXd aa = gather(state.a_expect);
    const StepOutcome out = step(xa, aa, gather(state.w_star), it);
    if (!out.w.allFinite() || !std::isfinite(out.objective)) {
      throw NumericalFailure("w-step produced a non-finite objective", it);
    }
    report.objective_trace.push_back(out.objective);
    report.codebook_size_trace.push_back(0);
    scatter(out.w, state.w_star);
    scatter(out.h_inv, state.h_inv_diag);
    if (after) after(xa, aa, out);

    std::vector<Eigen::Index> to_prune;
    double relevance_shift = 0.0;
    for (Eigen::Index k = 0; k < out.w.size(); ++k) {
      const Eigen::Index d = state.active.indices()[static_cast<std::size_t>(k)];
      const double a_new =
          update_relevance(aa[k], out.w[k], out.h_inv[k], cfg.relevance_update, cfg.a_max);
      state.a_expect[d] = a_new;
      if (a_new >= cfg.a_max) {
        to_prune.push_back(d);
      } else {
        relevance_shift = std::max(relevance_shift, std::abs(std::log(a_new / aa[k])));
      }
    }
    for (const Eigen::Index d : to_prune) {
      state.active.remove(d);
      state.w_star[d] = 0.0;
      state.h_inv_diag[d] = 0.0;
      state.a_expect[d] = std::max(state.a_expect[d], cfg.a_max);
      report.pruned.push_back({it, d});
    }
    report.active_trace.push_back(state.active.size());
    report.iterations_used = it;

    if (state.active.empty()) {
      report.all_pruned = true;
      break;
    }
    if (it > 1 && to_prune.empty() && relevance_shift < cfg.relevance_tol &&
        std::abs(out.objective - previous) <= cfg.outer_tol * std::abs(previous)) {
      report.converged = true;
      break;
    }
    previous = out.objective;
  }

  if (!state.active.empty()) {
    const Eigen::MatrixXd xa = select_columns(data.x, state.active);
    const StepOutcome out =
        step(xa, gather(state.a_expect), gather(state.w_star), report.iterations_used);
    scatter(out.w, state.w_star);
    scatter(out.h_inv, state.h_inv_diag);
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

GaussianPosterior gaussian_posterior(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                                     const Eigen::VectorXd& a, double noise_variance) {
  if (!(noise_variance > 0.0)) throw InvalidArgument("noise variance must be positive");
  if (x.rows() != t.size() || x.cols() != a.size()) {
    throw InvalidArgument("gaussian_posterior: inconsistent dimensions");
  }
  const double beta = 1.0 / noise_variance;
  Eigen::MatrixXd precision = beta * (x.transpose() * x);
  precision.diagonal() += a;
  const Eigen::MatrixXd cov = spd_inverse(precision, 0);
  GaussianPosterior post;
  post.mean = beta * cov * (x.transpose() * t);
  post.variance = cov.diagonal().cwiseMax(0.0);
  return post;
}

namespace {

FitResult fit_gaussian(const Dataset& data, const FitConfig& cfg) {
  if (data.task != Task::Regression) {
    throw InvalidArgument("sbl-gaussian needs a regression dataset");
  }
  const double n = static_cast<double>(data.samples());
  const double target_var = (data.t.array() - data.t.mean()).square().sum() / n;
  const double floor = 1e-10 * (target_var > 0.0 ? target_var : 1.0);
  double noise_var = cfg.noise_variance ? *cfg.noise_variance
                                        : (target_var > 0.0 ? target_var : 1.0);

  StepFn step = [&](const Eigen::MatrixXd& xa, const Eigen::VectorXd& aa, const Eigen::VectorXd&,
                    int it) {
    GaussianPosterior post;
    try {
      post = gaussian_posterior(xa, data.t, aa, noise_var);
    } catch (const NumericalFailure& err) {
      throw NumericalFailure(err.what(), it);
    }
    StepOutcome out;
    out.w = std::move(post.mean);
    out.h_inv = std::move(post.variance);
    const Eigen::VectorXd e = data.t - xa * out.w;
    out.objective =
        -0.5 * e.squaredNorm() / noise_var - 0.5 * (aa.array() * out.w.array().square()).sum();
    return out;
  };
  AfterStepFn after;
  if (!cfg.noise_variance) {
    after = [&](const Eigen::MatrixXd& xa, const Eigen::VectorXd& aa, const StepOutcome& out) {
      const double dof = (1.0 - aa.array() * out.h_inv.array()).max(0.0).sum();
      if (n > dof) {
        noise_var = std::max(estimate_noise_variance(data.t - xa * out.w, dof), floor);
      }
    };
  }
  FitResult result = ard_loop(data, cfg, Eigen::VectorXd::Zero(data.features()), "sbl-gaussian",
                              step, after);
  result.report.noise_variance = noise_var;
  return result;
}

double binomial_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                          const Eigen::VectorXd& a, const Eigen::VectorXd& w) {
  const Eigen::VectorXd p = predict_all(Link::Logistic, x, w);
  const double loglik =
      (t.array() * p.array().log() + (1.0 - t.array()) * (1.0 - p.array()).log()).sum();
  return loglik - 0.5 * (a.array() * w.array().square()).sum();
}

FitResult fit_binomial(const Dataset& data, const FitConfig& cfg) {
  if (data.task != Task::BinaryClassification) {
    throw InvalidArgument("sbl-binomial needs a classification dataset");
  }
  StepFn step = [&](const Eigen::MatrixXd& xa, const Eigen::VectorXd& aa,
                    const Eigen::VectorXd& w_init, int it) {
    constexpr int kMaxHalvings = 40;
    Eigen::VectorXd w = w_init;
    double current = binomial_objective(xa, data.t, aa, w);
    for (int k = 0; k < cfg.w_step_max_iters && xa.cols() > 0; ++k) {
      const Eigen::VectorXd p = predict_all(Link::Logistic, xa, w);
      const Eigen::VectorXd grad = xa.transpose() * (data.t - p) - aa.cwiseProduct(w);
      const Eigen::ArrayXd weight = p.array() * (1.0 - p.array());
      Eigen::MatrixXd h = xa.transpose() * (xa.array().colwise() * weight).matrix();
      h.diagonal() += aa;
      Eigen::LLT<Eigen::MatrixXd> llt(h);
      if (llt.info() != Eigen::Success) {
        throw NumericalFailure("logistic Newton system is not positive definite", it);
      }
      const Eigen::VectorXd delta = llt.solve(grad);
      double scale = 1.0;
      bool accepted = false;
      for (int hv = 0; hv < kMaxHalvings; ++hv, scale *= 0.5) {
        const Eigen::VectorXd trial = w + scale * delta;
        const double value = binomial_objective(xa, data.t, aa, trial);
        if (value >= current) {
          accepted = value > current;
          w = trial;
          current = value;
          break;
        }
      }
      if (!accepted || (scale * delta).lpNorm<Eigen::Infinity>() < cfg.w_step_tol) break;
    }
    const Eigen::VectorXd p = predict_all(Link::Logistic, xa, w);
    const Eigen::ArrayXd weight = p.array() * (1.0 - p.array());
    Eigen::MatrixXd h = xa.transpose() * (xa.array().colwise() * weight).matrix();
    h.diagonal() += aa;
    StepOutcome out;
    out.w = w;
    out.h_inv = spd_inverse(h, it).diagonal().cwiseMax(0.0);
    out.objective = current;
    return out;
  };
  return ard_loop(data, cfg, Eigen::VectorXd::Zero(data.features()), "sbl-binomial", step, {});
}

FitResult fit_sbcl(const Dataset& data, const FitConfig& cfg) {
  const double n = static_cast<double>(data.samples());
  const Eigen::VectorXd w0 = data.task == Task::Regression
                                 ? ridge_solution(data.x, data.t, 1.0)
                                 : Eigen::VectorXd::Zero(data.features());
  return fit_with_likelihood(data, cfg, std::make_shared<CorrentropyLikelihood>(cfg.kernel, n),
                             w0, "sbcl");
}

}  // namespace

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::SblMee: return "sbl-mee";
    case EstimatorKind::SblGaussian: return "sbl-gaussian";
    case EstimatorKind::SblBinomial: return "sbl-binomial";
    case EstimatorKind::Sbcl: return "sbcl";
  }
  return "unknown";
}

std::optional<EstimatorKind> parse_estimator(std::string_view name) {
  for (auto kind : {EstimatorKind::SblMee, EstimatorKind::SblGaussian, EstimatorKind::SblBinomial,
                    EstimatorKind::Sbcl}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

void check_compatible(EstimatorKind kind, Task task) {
  if (kind == EstimatorKind::SblGaussian && task != Task::Regression) {
    throw InvalidArgument("estimator sbl-gaussian requires a regression target");
  }
  if (kind == EstimatorKind::SblBinomial && task != Task::BinaryClassification) {
    throw InvalidArgument("estimator sbl-binomial requires a 0/1 classification target");
  }
}

bool uses_bandwidth(EstimatorKind kind) {
  return kind == EstimatorKind::SblMee || kind == EstimatorKind::Sbcl;
}

double estimate_noise_variance(const Eigen::VectorXd& residuals, double dof) {
  const double n = static_cast<double>(residuals.size());
  if (!(dof >= 0.0)) throw InvalidArgument("degrees of freedom must be >= 0");
  if (!(n > dof)) {
    throw InvalidArgument("noise variance needs more residuals (" + std::to_string(residuals.size()) +
                          ") than degrees of freedom (" + std::to_string(dof) + ")");
  }
  return residuals.squaredNorm() / (n - dof);
}

FitResult fit_baseline(const Dataset& data, BaselineKind kind, const FitConfig& cfg) {
  validate(cfg);
  switch (kind) {
    case BaselineKind::SblGaussian: return fit_gaussian(data, cfg);
    case BaselineKind::SblBinomial: return fit_binomial(data, cfg);
    case BaselineKind::Sbcl: return fit_sbcl(data, cfg);
  }
  throw InvalidArgument("unknown baseline");
}

FitResult fit_estimator(const Dataset& data, EstimatorKind kind, const FitConfig& cfg) {
  check_compatible(kind, data.task);
  switch (kind) {
    case EstimatorKind::SblMee: return fit_sbl_mee(data, cfg);
    case EstimatorKind::SblGaussian: return fit_baseline(data, BaselineKind::SblGaussian, cfg);
    case EstimatorKind::SblBinomial: return fit_baseline(data, BaselineKind::SblBinomial, cfg);
    case EstimatorKind::Sbcl: return fit_baseline(data, BaselineKind::Sbcl, cfg);
  }
  throw InvalidArgument("unknown estimator");
}

}  // namespace robust_sbl
