#include "robust_sbl/vi_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "robust_sbl/error.hpp"

namespace robust_sbl {

namespace {

struct LinkDerivatives {
  Eigen::VectorXd prediction;
  Eigen::VectorXd first;   // d t_hat / d z
  Eigen::VectorXd second;  // d2 t_hat / d z2
};

LinkDerivatives link_derivatives(const Eigen::MatrixXd& x, Link link, const Eigen::VectorXd& w) {
  const Eigen::VectorXd z = x * w;
  LinkDerivatives d;
  if (link == Link::Identity) {
    d.prediction = z;
    d.first = Eigen::VectorXd::Ones(z.size());
    d.second = Eigen::VectorXd::Zero(z.size());
    return d;
  }
  d.prediction = z.unaryExpr([](double v) { return sigmoid(v); });
  d.first = d.prediction.array() * (1.0 - d.prediction.array());
  d.second = d.first.array() * (1.0 - 2.0 * d.prediction.array());
  return d;
}

/// Lower triangle of X' diag(weights) X + diag(a); weights must be >= 0.
Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& weights,
                              const Eigen::VectorXd& a) {
  const Eigen::MatrixXd xs = x.array().colwise() * weights.array().sqrt();
  Eigen::MatrixXd g = a.asDiagonal();
  g.selfadjointView<Eigen::Lower>().rankUpdate(xs.transpose());
  return g;
}

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& lower, const Eigen::VectorXd& rhs, int iteration) {
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(lower);
  if (llt.info() != Eigen::Success) {
    throw NumericalFailure("weighted normal equations are not positive definite", iteration);
  }
  return llt.solve(rhs);
}

struct HalfQuadratic {
  Eigen::VectorXd weight;
  Eigen::VectorXd target;  // t - center
};

HalfQuadratic half_quadratic(const ErrorLikelihood& lik, const Eigen::VectorXd& t,
                             const Eigen::VectorXd& prediction) {
  HalfQuadratic hq{Eigen::VectorXd(t.size()), Eigen::VectorXd(t.size())};
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const ResidualTerm term = lik.term(t[i] - prediction[i]);
    hq.weight[i] = term.hq_weight;
    hq.target[i] = t[i] - term.hq_center;
  }
  return hq;
}

double surrogate(const HalfQuadratic& hq, const Eigen::VectorXd& prediction,
                 const Eigen::VectorXd& a, const Eigen::VectorXd& w) {
  const Eigen::ArrayXd r = hq.target - prediction;
  return -0.5 * (hq.weight.array() * r.square()).sum() - 0.5 * (a.array() * w.array().square()).sum();
}

Eigen::Index codebook_size(const ErrorLikelihood& lik) {
  const Codebook* cb = lik.codebook();
  return cb ? cb->size() : 0;
}

// One damped Gauss-Newton pass on the half-quadratic surrogate of the logistic model.
Eigen::VectorXd logistic_hq_step(const Eigen::MatrixXd& x, const HalfQuadratic& hq,
                                 const Eigen::VectorXd& a, Eigen::VectorXd w, double tol,
                                 int iteration) {
  constexpr int kNewtonIters = 5;
  constexpr int kMaxHalvings = 40;
  Eigen::VectorXd p = predict_all(Link::Logistic, x, w);
  double current = surrogate(hq, p, a, w);
  for (int k = 0; k < kNewtonIters; ++k) {
    const Eigen::ArrayXd s = p.array() * (1.0 - p.array());
    const Eigen::VectorXd r = hq.target - p;
    const Eigen::VectorXd grad =
        x.transpose() * (hq.weight.array() * r.array() * s).matrix() - a.cwiseProduct(w);
    const Eigen::VectorXd curv = hq.weight.array() * s.square();
    const Eigen::VectorXd delta = solve_spd(weighted_gram(x, curv, a), grad, iteration);

    double step = 1.0;
    bool improved = false;
    for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
      const Eigen::VectorXd trial = w + step * delta;
      const Eigen::VectorXd p_trial = predict_all(Link::Logistic, x, trial);
      const double value = surrogate(hq, p_trial, a, trial);
      if (value >= current) {
        improved = value > current;
        w = trial;
        p = p_trial;
        current = value;
        break;
      }
    }
    if (!improved || (step * delta).lpNorm<Eigen::Infinity>() < 0.1 * tol) break;
  }
  return w;
}

}  // namespace

void validate(const FitConfig& cfg) {
  if (!(cfg.a_max > 0.0)) throw InvalidArgument("a_max must be positive");
  if (cfg.max_outer_iters < 1) throw InvalidArgument("max_outer_iters must be >= 1");
  if (!(cfg.kernel.sigma > 0.0) || !std::isfinite(cfg.kernel.sigma)) {
    throw InvalidArgument("kernel bandwidth must be positive and finite");
  }
  if (cfg.epsilon_rule.kind == EpsilonRule::Kind::Fixed && !(cfg.epsilon_rule.value >= 0.0)) {
    throw InvalidArgument("fixed quantization threshold must be >= 0");
  }
  if (cfg.w_step_max_iters < 1) throw InvalidArgument("w_step_max_iters must be >= 1");
  if (!(cfg.w_step_tol > 0.0) || !(cfg.outer_tol > 0.0) || !(cfg.relevance_tol > 0.0)) {
    throw InvalidArgument("tolerances must be positive");
  }
  if (!(cfg.hessian_jitter >= 0.0)) throw InvalidArgument("hessian_jitter must be >= 0");
  if (cfg.noise_variance && !(*cfg.noise_variance > 0.0)) {
    throw InvalidArgument("fixed noise variance must be positive");
  }
}

double log_qw(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, Link link,
              const ErrorLikelihood& lik, const Eigen::VectorXd& a, const Eigen::VectorXd& w) {
  const Eigen::VectorXd e = t - predict_all(link, x, w);
  return lik.value(e) - 0.5 * (a.array() * w.array().square()).sum();
}

Eigen::VectorXd log_qw_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, Link link,
                                const ErrorLikelihood& lik, const Eigen::VectorXd& a,
                                const Eigen::VectorXd& w) {
  const LinkDerivatives d = link_derivatives(x, link, w);
  Eigen::VectorXd coeff(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    coeff[i] = -lik.term(t[i] - d.prediction[i]).slope * d.first[i];
  }
  return x.transpose() * coeff - a.cwiseProduct(w);
}

WStepResult optimize_w(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, Link link,
                       std::shared_ptr<const ErrorLikelihood> lik, const Eigen::VectorXd& a,
                       const Eigen::VectorXd& w_init, const WStepOptions& opts) {
  if (x.cols() != a.size() || x.cols() != w_init.size() || x.rows() != t.size()) {
    throw InvalidArgument("optimize_w: inconsistent dimensions");
  }
  if (!a.allFinite() || (a.size() > 0 && a.minCoeff() <= 0.0)) {
    throw InvalidArgument("optimize_w: relevance values must be finite and positive");
  }

  WStepResult out;
  out.w = w_init;
  out.max_codebook_size = codebook_size(*lik);
  if (x.cols() == 0) {
    out.likelihood = std::move(lik);
    return out;
  }

  for (int it = 1; it <= opts.max_iters; ++it) {
    const Eigen::VectorXd prediction = predict_all(link, x, out.w);
    const HalfQuadratic hq = half_quadratic(*lik, t, prediction);

    Eigen::VectorXd next;
    if (link == Link::Identity) {
      const Eigen::VectorXd rhs = x.transpose() * hq.weight.cwiseProduct(hq.target);
      next = solve_spd(weighted_gram(x, hq.weight, a), rhs, it);
    } else {
      next = logistic_hq_step(x, hq, a, out.w, opts.tol, it);
    }

    const double objective = log_qw(x, t, link, *lik, a, next);
    if (!next.allFinite() || !std::isfinite(objective)) {
      throw NumericalFailure("w-step produced a non-finite objective", it);
    }
    out.objective_trace.push_back(objective);
    const double change = (next - out.w).lpNorm<Eigen::Infinity>();
    out.w = std::move(next);
    out.iterations = it;

    if (auto fresh = lik->refreshed(t - predict_all(link, x, out.w))) {
      lik = std::move(fresh);
      out.max_codebook_size = std::max(out.max_codebook_size, codebook_size(*lik));
    }
    if (change < opts.tol) break;
  }
  out.likelihood = std::move(lik);
  return out;
}

Eigen::MatrixXd negative_hessian_raw(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                                     Link link, const ErrorLikelihood& lik,
                                     const Eigen::VectorXd& a, const Eigen::VectorXd& w,
                                     bool second_order) {
  const LinkDerivatives d = link_derivatives(x, link, w);
  Eigen::VectorXd coeff(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const ResidualTerm term = lik.term(t[i] - d.prediction[i]);
    coeff[i] = -term.curvature * d.first[i] * d.first[i];
    if (second_order) coeff[i] += term.slope * d.second[i];
  }
  Eigen::MatrixXd h = x.transpose() * (x.array().colwise() * coeff.array()).matrix();
  h.diagonal() += a;
  return h;
}

NegativeHessian regularize_hessian(Eigen::MatrixXd h, double initial_jitter, int iteration) {
  constexpr int kMaxDoublings = 50;
  NegativeHessian out;
  const Eigen::Index n = h.rows();
  if (n == 0) {
    out.matrix = std::move(h);
    return out;
  }
  if (!h.allFinite()) throw NumericalFailure("negative Hessian is not finite", iteration);

  double jitter = initial_jitter > 0.0 ? initial_jitter : 1e-8 * h.diagonal().cwiseAbs().mean();
  if (!(jitter > 0.0)) jitter = 1e-12;
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  for (int k = 0; llt.info() != Eigen::Success; ++k) {
    if (k == kMaxDoublings) {
      throw NumericalFailure("negative Hessian could not be made positive definite", iteration);
    }
    h.diagonal().array() += jitter - out.jitter_added;
    out.jitter_added = jitter;
    llt.compute(h);
    jitter *= 2.0;
  }
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  out.inverse_diagonal = inv.diagonal().cwiseMax(0.0);
  out.matrix = std::move(h);
  return out;
}

NegativeHessian negative_hessian(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, Link link,
                                 const ErrorLikelihood& lik, const Eigen::VectorXd& a,
                                 const Eigen::VectorXd& w, double initial_jitter) {
  if (!w.allFinite()) throw InvalidArgument("negative_hessian: weights must be finite");
  return regularize_hessian(negative_hessian_raw(x, t, link, lik, a, w), initial_jitter);
}

double expected_w_sq(double w_star_d, double h_inv_dd) {
  return w_star_d * w_star_d + h_inv_dd;
}

double update_relevance(double a_old, double w_star_d, double h_inv_dd, RelevanceUpdate mode,
                        double a_max) {
  if (mode == RelevanceUpdate::Slow) {
    const double m2 = expected_w_sq(w_star_d, h_inv_dd);
    return m2 > 0.0 ? std::min(1.0 / m2, std::numeric_limits<double>::max()) : a_max;
  }
  const double numerator = 1.0 - a_old * h_inv_dd;
  if (w_star_d == 0.0 || !(numerator > 0.0)) return a_max;
  const double a = numerator / (w_star_d * w_star_d);
  return std::isfinite(a) ? a : a_max;
}

Eigen::VectorXd ridge_solution(const Eigen::MatrixXd& x, const Eigen::VectorXd& t, double lambda) {
  if (x.cols() <= x.rows()) {
    Eigen::MatrixXd g = x.transpose() * x;
    g.diagonal().array() += lambda;
    return g.llt().solve(x.transpose() * t);
  }
  Eigen::MatrixXd g = x * x.transpose();
  g.diagonal().array() += lambda;
  return x.transpose() * g.llt().solve(t);
}

FitResult fit_with_likelihood(const Dataset& data, const FitConfig& cfg,
                              std::shared_ptr<const ErrorLikelihood> likelihood,
                              const Eigen::VectorXd& w_init, std::string estimator) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index dims = data.features();
  if (w_init.size() != dims) throw InvalidArgument("initial weights have the wrong length");
  const Link link = link_for(data.task);
  const WStepOptions step_opts{cfg.w_step_max_iters, cfg.w_step_tol};

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
    Eigen::VectorXd wa = gather(state.w_star);
    const Eigen::VectorXd aa = gather(state.a_expect);

    if (auto fresh = likelihood->refreshed(data.t - predict_all(link, xa, wa))) {
      likelihood = std::move(fresh);
    }
    Eigen::Index largest_codebook = codebook_size(*likelihood);

    WStepResult step;
    NegativeHessian hessian;
    try {
      step = optimize_w(xa, data.t, link, likelihood, aa, wa, step_opts);
      likelihood = step.likelihood;
      wa = step.w;
      hessian = regularize_hessian(
          negative_hessian_raw(xa, data.t, link, *likelihood, aa, wa), cfg.hessian_jitter, it);
    } catch (const NumericalFailure& err) {
      throw NumericalFailure(std::string("outer iteration failed: ") + err.what(), it);
    }
    largest_codebook = std::max(largest_codebook, step.max_codebook_size);

    const double objective = log_qw(xa, data.t, link, *likelihood, aa, wa);
    report.objective_trace.push_back(objective);
    report.codebook_size_trace.push_back(largest_codebook);

    scatter(wa, state.w_star);
    scatter(hessian.inverse_diagonal, state.h_inv_diag);

    std::vector<Eigen::Index> to_prune;
    double relevance_shift = 0.0;
    for (Eigen::Index k = 0; k < wa.size(); ++k) {
      const Eigen::Index d = state.active.indices()[static_cast<std::size_t>(k)];
      const double a_new =
          update_relevance(aa[k], wa[k], hessian.inverse_diagonal[k], cfg.relevance_update,
                           cfg.a_max);
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
        std::abs(objective - previous) <= cfg.outer_tol * std::abs(previous)) {
      report.converged = true;
      break;
    }
    previous = objective;
  }

  if (!state.active.empty()) {
    const Eigen::MatrixXd xa = select_columns(data.x, state.active);
    const Eigen::VectorXd aa = gather(state.a_expect);
    try {
      const WStepResult map = optimize_w(xa, data.t, link, likelihood, aa, gather(state.w_star),
                                         step_opts);
      likelihood = map.likelihood;
      const NegativeHessian hessian = regularize_hessian(
          negative_hessian_raw(xa, data.t, link, *likelihood, aa, map.w), cfg.hessian_jitter,
          report.iterations_used);
      scatter(map.w, state.w_star);
      scatter(hessian.inverse_diagonal, state.h_inv_diag);
    } catch (const NumericalFailure& err) {
      throw NumericalFailure(std::string("MAP step failed: ") + err.what(),
                             report.iterations_used);
    }
  }
  if (const Codebook* cb = likelihood->codebook()) state.codebook = *cb;

  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

FitResult fit_sbl_mee(const Dataset& data, const FitConfig& cfg) {
  validate(cfg);
  const auto n = static_cast<std::int64_t>(data.samples());
  const Codebook single{Eigen::VectorXd::Zero(1), {n}, false};

  if (data.task == Task::Regression) {
    const Eigen::VectorXd w0 = ridge_solution(data.x, data.t, 1.0);
    std::shared_ptr<const ErrorLikelihood> lik;
    if (cfg.codebook_mode == CodebookMode::ForcedSingle) {
      lik = std::make_shared<MeeLikelihood>(single, cfg.kernel);
    } else {
      lik = MeeLikelihood::adaptive(data.t - data.x * w0, cfg.kernel,
                                    cfg.epsilon_rule.fixed_value());
    }
    return fit_with_likelihood(data, cfg, std::move(lik), w0, "sbl-mee");
  }

  const Eigen::VectorXd w0 = Eigen::VectorXd::Zero(data.features());
  if (cfg.codebook_mode == CodebookMode::ForcedSingle) {
    return fit_with_likelihood(data, cfg, std::make_shared<MeeLikelihood>(single, cfg.kernel), w0,
                               "sbl-mee");
  }
  // Residuals of a correntropy (single-element codebook) fit set the restricted weights.
  const FitResult preliminary = fit_with_likelihood(
      data, cfg, std::make_shared<CorrentropyLikelihood>(cfg.kernel, static_cast<double>(n)), w0,
      "sbcl");
  const Eigen::VectorXd e = residuals(map_predictor(preliminary.state, Link::Logistic), data);
  return fit_with_likelihood(
      data, cfg, std::make_shared<MeeLikelihood>(restricted_codebook(e), cfg.kernel), w0,
      "sbl-mee");
}

GlmModel map_predictor(const PosteriorState& state, Link link) {
  return GlmModel{link, state.w_star};
}

}  // namespace robust_sbl
