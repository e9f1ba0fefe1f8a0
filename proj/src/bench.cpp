#include "robust_sbl/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "robust_sbl/error.hpp"

namespace robust_sbl {

namespace {

// Independent streams per (seed, purpose).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

constexpr std::uint64_t kTruthStream = 1;
constexpr std::uint64_t kDesignStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kTestStream = 1000;

Eigen::MatrixXd standard_normal_matrix(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = normal(rng);
  }
  return x;
}

double noise_variance_of(const NoiseModel& noise) {
  switch (noise.kind) {
    case NoiseModel::Kind::Gaussian: return noise.variance;
    case NoiseModel::Kind::MixtureGaussian: {
      double mean = 0.0;
      double second = 0.0;
      for (std::size_t c = 0; c < noise.weights.size(); ++c) {
        mean += noise.weights[c] * noise.means[c];
        second += noise.weights[c] * (noise.variances[c] + noise.means[c] * noise.means[c]);
      }
      return second - mean * mean;
    }
    case NoiseModel::Kind::Impulsive:
      return noise.rate * noise.magnitude_var + (1.0 - noise.rate) * noise.base_var;
    case NoiseModel::Kind::LabelFlip: return 0.0;
  }
  return 0.0;
}

double standard_deviation(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

NoiseModel NoiseModel::gaussian(double var) {
  NoiseModel m;
  m.kind = Kind::Gaussian;
  m.variance = var;
  return m;
}

NoiseModel NoiseModel::mixture(std::vector<double> weights, std::vector<double> means,
                               std::vector<double> variances) {
  NoiseModel m;
  m.kind = Kind::MixtureGaussian;
  m.weights = std::move(weights);
  m.means = std::move(means);
  m.variances = std::move(variances);
  return m;
}

NoiseModel NoiseModel::impulsive(double rate, double magnitude_var, double base_var) {
  NoiseModel m;
  m.kind = Kind::Impulsive;
  m.rate = rate;
  m.magnitude_var = magnitude_var;
  m.base_var = base_var;
  return m;
}

NoiseModel NoiseModel::label_flip(double rate) {
  NoiseModel m;
  m.kind = Kind::LabelFlip;
  m.rate = rate;
  return m;
}

void validate(const NoiseModel& noise) {
  switch (noise.kind) {
    case NoiseModel::Kind::Gaussian:
      if (!(noise.variance >= 0.0)) throw InvalidArgument("noise variance must be >= 0");
      return;
    case NoiseModel::Kind::MixtureGaussian: {
      const auto c = noise.weights.size();
      if (c == 0 || noise.means.size() != c || noise.variances.size() != c) {
        throw InvalidArgument("mixture needs matching, non-empty weights/means/variances");
      }
      double total = 0.0;
      for (std::size_t i = 0; i < c; ++i) {
        if (!(noise.weights[i] >= 0.0 && noise.weights[i] <= 1.0)) {
          throw InvalidArgument("mixture weights must lie in [0, 1]");
        }
        if (!(noise.variances[i] > 0.0)) throw InvalidArgument("mixture variances must be > 0");
        total += noise.weights[i];
      }
      if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("mixture weights must sum to 1");
      return;
    }
    case NoiseModel::Kind::Impulsive:
      if (!(noise.rate >= 0.0 && noise.rate <= 1.0)) {
        throw InvalidArgument("impulse rate must lie in [0, 1]");
      }
      if (!(noise.magnitude_var > 0.0) || !(noise.base_var > 0.0)) {
        throw InvalidArgument("impulsive noise variances must be > 0");
      }
      return;
    case NoiseModel::Kind::LabelFlip:
      if (!(noise.rate >= 0.0 && noise.rate <= 1.0)) {
        throw InvalidArgument("flip rate must lie in [0, 1]");
      }
      return;
  }
}

SyntheticTruth make_truth(Eigen::Index d, Eigen::Index k, std::uint64_t seed,
                          const std::vector<Eigen::Index>& candidates) {
  std::vector<Eigen::Index> pool = candidates;
  if (pool.empty()) {
    pool.resize(static_cast<std::size_t>(std::max<Eigen::Index>(d, 0)));
    std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  }
  if (d < 1 || k < 1 || k > d || k > static_cast<Eigen::Index>(pool.size())) {
    throw InvalidArgument("need 1 <= k_support <= d (and <= number of candidate positions)");
  }
  for (const auto c : pool) {
    if (c < 0 || c >= d) throw InvalidArgument("candidate position out of range");
  }
  auto rng = make_rng(seed, kTruthStream);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::uniform_real_distribution<double> magnitude(1.0, 2.0);
  std::bernoulli_distribution negative(0.5);

  SyntheticTruth truth;
  truth.w_true = Eigen::VectorXd::Zero(d);
  truth.support.assign(pool.begin(), pool.begin() + k);
  std::sort(truth.support.begin(), truth.support.end());
  for (const auto idx : truth.support) {
    const double m = magnitude(rng);
    truth.w_true[idx] = negative(rng) ? -m : m;
  }
  truth.snr_like = truth.w_true.squaredNorm();
  return truth;
}

GeneratedData sample_regression(Eigen::Index n, const SyntheticTruth& truth,
                                const NoiseModel& noise, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("need at least one sample");
  validate(noise);
  if (noise.kind == NoiseModel::Kind::LabelFlip) {
    throw InvalidArgument("label-flip noise applies to classification only");
  }
  const Eigen::Index d = truth.w_true.size();
  auto design_rng = make_rng(seed, kDesignStream);
  Eigen::MatrixXd x = standard_normal_matrix(n, d, design_rng);
  Eigen::VectorXd t = x * truth.w_true;

  auto rng = make_rng(seed ^ (noise.seed * 0x9e3779b97f4a7c15ULL), kNoiseStream);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<bool> contaminated(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    double draw = 0.0;
    switch (noise.kind) {
      case NoiseModel::Kind::Gaussian:
        draw = std::sqrt(noise.variance) * normal(rng);
        break;
      case NoiseModel::Kind::MixtureGaussian: {
        const double u = unit(rng);
        std::size_t c = 0;
        double acc = noise.weights[0];
        while (u > acc && c + 1 < noise.weights.size()) acc += noise.weights[++c];
        draw = noise.means[c] + std::sqrt(noise.variances[c]) * normal(rng);
        break;
      }
      case NoiseModel::Kind::Impulsive: {
        const bool impulse = unit(rng) < noise.rate;
        contaminated[static_cast<std::size_t>(i)] = impulse;
        draw = std::sqrt(impulse ? noise.magnitude_var : noise.base_var) * normal(rng);
        break;
      }
      case NoiseModel::Kind::LabelFlip: break;
    }
    t[i] += draw;
  }

  GeneratedData out{make_dataset(std::move(x), std::move(t), Task::Regression), truth,
                    std::move(contaminated)};
  const double nv = noise_variance_of(noise);
  out.truth.snr_like = nv > 0.0 ? truth.w_true.squaredNorm() / nv
                                : std::numeric_limits<double>::infinity();
  return out;
}

GeneratedData sample_classification(Eigen::Index n, const SyntheticTruth& truth,
                                    double flip_rate, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("need at least one sample");
  if (!(flip_rate >= 0.0 && flip_rate < 0.5)) {
    throw InvalidArgument("flip rate must lie in [0, 0.5)");
  }
  const Eigen::Index d = truth.w_true.size();
  auto design_rng = make_rng(seed, kDesignStream);
  Eigen::MatrixXd x = standard_normal_matrix(n, d, design_rng);
  const Eigen::VectorXd p = predict_all(Link::Logistic, x, truth.w_true);

  auto rng = make_rng(seed, kNoiseStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd t(n);
  std::vector<bool> flipped(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    double label = unit(rng) < p[i] ? 1.0 : 0.0;
    if (unit(rng) < flip_rate) {
      label = 1.0 - label;
      flipped[static_cast<std::size_t>(i)] = true;
    }
    t[i] = label;
  }
  return GeneratedData{make_dataset(std::move(x), std::move(t), Task::BinaryClassification), truth,
                       std::move(flipped)};
}

GeneratedData gen_regression(Eigen::Index n, Eigen::Index d, Eigen::Index k_support,
                             const NoiseModel& noise, std::uint64_t seed) {
  return sample_regression(n, make_truth(d, k_support, seed), noise, seed);
}

GeneratedData gen_classification(Eigen::Index n, Eigen::Index d, Eigen::Index k_support,
                                 double flip_rate, std::uint64_t seed) {
  if (!(flip_rate >= 0.0 && flip_rate < 0.5)) {
    throw InvalidArgument("flip rate must lie in [0, 0.5)");
  }
  return sample_classification(n, make_truth(d, k_support, seed), flip_rate, seed);
}

Metrics evaluate(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  if (pred.size() != truth.size() || pred.size() < 2) {
    throw InvalidArgument("evaluate needs two vectors of equal length >= 2");
  }
  Metrics m;
  m.mse = (pred - truth).squaredNorm() / static_cast<double>(pred.size());
  const Eigen::ArrayXd pc = pred.array() - pred.mean();
  const Eigen::ArrayXd tc = truth.array() - truth.mean();
  const double sp = std::sqrt(pc.square().sum());
  const double st = std::sqrt(tc.square().sum());
  if (sp > 0.0 && st > 0.0) m.correlation = std::clamp((pc * tc).sum() / (sp * st), -1.0, 1.0);
  return m;
}

double accuracy(const Eigen::VectorXd& probabilities, const Eigen::VectorXd& labels) {
  if (probabilities.size() != labels.size() || labels.size() == 0) {
    throw InvalidArgument("accuracy needs two non-empty vectors of equal length");
  }
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const double predicted = probabilities[i] >= 0.5 ? 1.0 : 0.0;
    if (predicted == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double support_f1(const std::vector<Eigen::Index>& estimated,
                  const std::vector<Eigen::Index>& true_support) {
  const std::set<Eigen::Index> est(estimated.begin(), estimated.end());
  const std::set<Eigen::Index> tru(true_support.begin(), true_support.end());
  if (est.empty() && tru.empty()) return 1.0;
  if (est.empty() || tru.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto i : est) hits += tru.count(i);
  if (hits == 0) return 0.0;
  const double precision = static_cast<double>(hits) / static_cast<double>(est.size());
  const double recall = static_cast<double>(hits) / static_cast<double>(tru.size());
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<Eigen::Index> support_of(const Eigen::VectorXd& w) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) out.push_back(i);
  }
  return out;
}

Eigen::Index FeatureGrouping::total() const {
  if (axes.empty()) return 0;
  Eigen::Index p = 1;
  for (const auto& axis : axes) p *= axis.size;
  return p;
}

std::vector<std::vector<double>> importance_report(const Eigen::VectorXd& w,
                                                   const FeatureGrouping& grouping) {
  if (grouping.axes.empty()) throw InvalidArgument("grouping needs at least one axis");
  for (const auto& axis : grouping.axes) {
    if (axis.size < 1) throw InvalidArgument("axis '" + axis.name + "' has no levels");
  }
  if (grouping.total() != w.size()) {
    throw InvalidArgument("grouping covers " + std::to_string(grouping.total()) +
                          " features but the weight vector has " + std::to_string(w.size()));
  }
  const double total = w.cwiseAbs().sum();
  if (!(total > 0.0)) throw InvalidArgument("importance needs a nonzero weight vector");

  std::vector<std::vector<double>> out;
  for (const auto& axis : grouping.axes) out.emplace_back(static_cast<std::size_t>(axis.size), 0.0);

  const std::size_t n_axes = grouping.axes.size();
  std::vector<Eigen::Index> level(n_axes, 0);
  for (Eigen::Index f = 0; f < w.size(); ++f) {
    const double mag = std::abs(w[f]);
    for (std::size_t a = 0; a < n_axes; ++a) out[a][static_cast<std::size_t>(level[a])] += mag;
    // Advance the mixed-radix counter; the last axis varies fastest.
    for (std::size_t a = n_axes; a-- > 0;) {
      if (++level[a] < grouping.axes[a].size) break;
      level[a] = 0;
    }
  }
  for (auto& axis : out) {
    for (auto& v : axis) v /= total;
  }
  return out;
}

Eigen::VectorXd ridge_loo_residuals(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                                    double lambda) {
  const Eigen::VectorXd e = t - x * ridge_solution(x, t, lambda);
  Eigen::VectorXd one_minus_leverage(x.rows());
  if (x.cols() < x.rows()) {
    Eigen::MatrixXd g = x.transpose() * x;
    g.diagonal().array() += lambda;
    const Eigen::MatrixXd gx = g.llt().solve(x.transpose());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      one_minus_leverage[i] = 1.0 - x.row(i).dot(gx.col(i));
    }
  } else {
    // X (X'X + lambda I)^-1 X' = I - lambda (XX' + lambda I)^-1
    Eigen::MatrixXd k = x * x.transpose();
    k.diagonal().array() += lambda;
    const Eigen::MatrixXd kinv = k.llt().solve(Eigen::MatrixXd::Identity(x.rows(), x.rows()));
    one_minus_leverage = lambda * kinv.diagonal();
  }
  return e.cwiseQuotient(one_minus_leverage);
}

std::vector<double> default_sigma_grid(const Dataset& data) {
  std::vector<double> grid;
  if (data.task == Task::BinaryClassification) {
    // The unnormalized MEE likelihood has per-sample curvature of order N / sigma^2.
    const double root_n = std::sqrt(static_cast<double>(data.samples()));
    for (const double m : {0.5, 1.0, 2.0}) grid.push_back(m * root_n);
    return grid;
  }
  double scale = standard_deviation(ridge_loo_residuals(data.x, data.t, 1.0));
  if (!(scale > 0.0)) scale = 1.0;
  for (const double m : {0.25, 0.5, 1.0, 2.0, 4.0}) grid.push_back(m * scale);
  return grid;
}

CvResult select_bandwidth_cv(const Dataset& data, const std::vector<double>& candidate_sigmas,
                             int folds, EstimatorKind kind, const FitConfig& cfg) {
  if (candidate_sigmas.empty()) throw InvalidArgument("need at least one candidate bandwidth");
  for (const double s : candidate_sigmas) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("bandwidths must be positive");
  }
  if (folds < 2) throw InvalidArgument("need at least 2 folds");
  const Eigen::Index n = data.samples();
  if (folds > n) throw InvalidArgument("more folds than samples");
  check_compatible(kind, data.task);

  CvResult result;
  result.candidates = candidate_sigmas;
  const auto n_cand = candidate_sigmas.size();
  result.scores = Eigen::MatrixXd::Zero(folds, static_cast<Eigen::Index>(n_cand));

  for (int f = 0; f < folds; ++f) {
    const Eigen::Index lo = n * f / folds;
    const Eigen::Index hi = n * (f + 1) / folds;
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
    for (Eigen::Index i = 0; i < n; ++i) (i >= lo && i < hi ? test : train).push_back(i);
    const Dataset train_set = subset_rows(data, train);
    const Dataset test_set = subset_rows(data, test);

    for (std::size_t c = 0; c < n_cand; ++c) {
      FitConfig fold_cfg = cfg;
      fold_cfg.kernel.sigma = candidate_sigmas[c];
      double score = -std::numeric_limits<double>::infinity();
      try {
        const FitResult fit = fit_estimator(train_set, kind, fold_cfg);
        const Eigen::VectorXd pred =
            predict_all(map_predictor(fit.state, link_for(data.task)), test_set.x);
        if (data.task == Task::Regression) {
          score = 0.0;
          if (pred.size() >= 2) score = evaluate(pred, test_set.t).correlation.value_or(0.0);
        } else {
          score = accuracy(pred, test_set.t);
        }
      } catch (const std::exception& err) {
        result.failures.push_back({f, c, err.what()});
      }
      result.scores(f, static_cast<Eigen::Index>(c)) = score;
    }
  }

  std::size_t best = 0;
  for (std::size_t c = 0; c < n_cand; ++c) {
    const double mean = result.scores.col(static_cast<Eigen::Index>(c)).mean();
    result.mean_scores.push_back(mean);
    const double best_mean = result.mean_scores[best];
    if (c == 0) continue;
    if (mean > best_mean ||
        (mean == best_mean && candidate_sigmas[c] > candidate_sigmas[best])) {
      best = c;
    }
  }
  result.sigma = candidate_sigmas[best];
  return result;
}

std::vector<std::string> scenario_names() {
  return {"smoke", "regression-clean", "regression-impulsive", "classification-flip"};
}

Scenario scenario_by_name(const std::string& name) {
  std::vector<std::uint64_t> twenty(20);
  std::iota(twenty.begin(), twenty.end(), std::uint64_t{0});

  Scenario s;
  s.name = name;
  if (name == "smoke") {
    s.task = Task::Regression;
    s.n_train = 40;
    s.n_test = 200;
    s.d = 20;
    s.k = 3;
    s.noise = NoiseModel::impulsive(0.1, 1.0, 0.01);
    s.seeds = {0, 1};
    s.estimators = {EstimatorKind::SblMee, EstimatorKind::SblGaussian, EstimatorKind::Sbcl};
  } else if (name == "regression-clean") {
    s.task = Task::Regression;
    s.n_train = 100;
    s.n_test = 500;
    s.d = 200;
    s.k = 5;
    s.noise = NoiseModel::gaussian(0.01);
    s.seeds = twenty;
    s.estimators = {EstimatorKind::SblMee, EstimatorKind::SblGaussian};
  } else if (name == "regression-impulsive") {
    s.task = Task::Regression;
    s.n_train = 100;
    s.n_test = 500;
    s.d = 200;
    s.k = 5;
    s.noise = NoiseModel::impulsive(0.1, 1.0, 0.01);
    s.seeds = twenty;
    s.estimators = {EstimatorKind::SblMee, EstimatorKind::SblGaussian, EstimatorKind::Sbcl};
  } else if (name == "classification-flip") {
    s.task = Task::BinaryClassification;
    s.n_train = 200;
    s.n_test = 1000;
    s.d = 400;
    s.k = 10;
    s.flip_rate = 0.15;
    s.seeds = twenty;
    s.estimators = {EstimatorKind::SblMee, EstimatorKind::SblBinomial};
  } else {
    std::string list;
    for (const auto& n : scenario_names()) list += (list.empty() ? "" : ", ") + n;
    throw InvalidArgument("unknown scenario '" + name + "'; available: " + list);
  }
  if (name != "smoke") s.bandwidth = Scenario::Bandwidth::CrossValidated;
  return s;
}

RunRecord run_replicate(const Scenario& scenario, EstimatorKind estimator, std::uint64_t seed) {
  RunRecord rec;
  rec.scenario = scenario.name;
  rec.estimator = estimator;
  rec.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    const SyntheticTruth truth = make_truth(scenario.d, scenario.k, seed);
    GeneratedData train;
    GeneratedData test;
    if (scenario.task == Task::Regression) {
      train = sample_regression(scenario.n_train, truth, scenario.noise, seed);
      test = sample_regression(scenario.n_test, truth, NoiseModel::gaussian(0.0),
                               seed + kTestStream);
    } else {
      train = sample_classification(scenario.n_train, truth, scenario.flip_rate, seed);
      test = sample_classification(scenario.n_test, truth, 0.0, seed + kTestStream);
    }

    FitConfig cfg = scenario.fit;
    cfg.seed = seed;
    if (uses_bandwidth(estimator) && scenario.bandwidth == Scenario::Bandwidth::CrossValidated) {
      cfg.kernel.sigma = select_bandwidth_cv(train.data, default_sigma_grid(train.data),
                                             scenario.cv_folds, estimator, cfg)
                             .sigma;
    }
    rec.sigma = cfg.kernel.sigma;

    const FitResult fit = fit_estimator(train.data, estimator, cfg);
    const GlmModel model = map_predictor(fit.state, link_for(scenario.task));
    const Eigen::VectorXd pred = predict_all(model, test.data.x);
    const Metrics m = evaluate(pred, test.data.t);
    rec.correlation = m.correlation;
    rec.mse = m.mse;
    if (scenario.task == Task::BinaryClassification) rec.accuracy = accuracy(pred, test.data.t);
    rec.support_f1 = support_f1(support_of(fit.state.w_star), truth.support);
    rec.active_count = fit.state.active.size();
    rec.iterations = fit.report.iterations_used;
  } catch (const std::exception& err) {
    rec.error = err.what();
  }
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::vector<RunRecord> run_scenario(const Scenario& scenario, int threads) {
  const std::size_t per_seed = scenario.estimators.size();
  const std::size_t total = scenario.seeds.size() * per_seed;
  std::vector<RunRecord> records(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      records[job] = run_replicate(scenario, scenario.estimators[job % per_seed],
                                   scenario.seeds[job / per_seed]);
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::max(threads, 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(n_threads, total); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<EstimatorSummary> summarize(const Scenario& scenario,
                                        const std::vector<RunRecord>& records) {
  std::vector<EstimatorSummary> out;
  for (const auto kind : scenario.estimators) {
    EstimatorSummary s;
    s.estimator = kind;
    std::vector<double> corr, mse, acc, f1, active;
    for (const auto& r : records) {
      if (r.estimator != kind) continue;
      ++s.runs;
      if (r.error) {
        ++s.failures;
        continue;
      }
      // An undefined correlation (constant predictions) ranks as the worst value.
      corr.push_back(r.correlation.value_or(-1.0));
      mse.push_back(r.mse);
      if (r.accuracy) acc.push_back(*r.accuracy);
      f1.push_back(r.support_f1);
      active.push_back(static_cast<double>(r.active_count));
    }
    if (!corr.empty()) s.median_correlation = median(corr);
    s.median_mse = median(mse);
    if (!acc.empty()) s.median_accuracy = median(acc);
    s.median_support_f1 = median(f1);
    s.median_active = median(active);
    out.push_back(s);
  }
  return out;
}

}  // namespace robust_sbl
