#ifndef ROBUST_SBL_BENCH_HPP
#define ROBUST_SBL_BENCH_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "robust_sbl/baselines.hpp"
#include "robust_sbl/glm.hpp"
#include "robust_sbl/vi_engine.hpp"

namespace robust_sbl {

/// Additive noise families for the synthetic generators. `seed` offsets the
/// noise stream relative to the generator seed.
struct NoiseModel {
  enum class Kind { Gaussian, MixtureGaussian, Impulsive, LabelFlip };
  Kind kind = Kind::Gaussian;
  double variance = 0.0;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> variances;
  double rate = 0.0;
  double magnitude_var = 0.0;
  double base_var = 0.0;
  std::uint64_t seed = 0;

  static NoiseModel gaussian(double var);
  static NoiseModel mixture(std::vector<double> weights, std::vector<double> means,
                            std::vector<double> variances);
  /// With probability `rate` a draw comes from N(0, magnitude_var), else N(0, base_var).
  static NoiseModel impulsive(double rate, double magnitude_var, double base_var);
  static NoiseModel label_flip(double rate);
};

void validate(const NoiseModel& noise);

struct SyntheticTruth {
  Eigen::VectorXd w_true;
  std::vector<Eigen::Index> support;
  double snr_like = 0.0;
};

struct GeneratedData {
  Dataset data;
  SyntheticTruth truth;
  /// Samples whose noise came from the heavy component (impulsive) or whose
  /// label was flipped.
  std::vector<bool> contaminated;
};

/// k nonzero weights, magnitudes uniform in [1, 2] with random signs, at
/// positions drawn from `candidates` (all of 0..d-1 when empty).
SyntheticTruth make_truth(Eigen::Index d, Eigen::Index k, std::uint64_t seed,
                          const std::vector<Eigen::Index>& candidates = {});

/// Standard-normal design, t = X w_true + noise.
GeneratedData sample_regression(Eigen::Index n, const SyntheticTruth& truth,
                                const NoiseModel& noise, std::uint64_t seed);

/// Labels ~ Bernoulli(sigmoid(x' w_true)), each flipped with probability flip_rate.
GeneratedData sample_classification(Eigen::Index n, const SyntheticTruth& truth,
                                    double flip_rate, std::uint64_t seed);

GeneratedData gen_regression(Eigen::Index n, Eigen::Index d, Eigen::Index k_support,
                             const NoiseModel& noise, std::uint64_t seed);

GeneratedData gen_classification(Eigen::Index n, Eigen::Index d, Eigen::Index k_support,
                                 double flip_rate, std::uint64_t seed);

struct Metrics {
  /// Pearson correlation; nullopt when either side is constant.
  std::optional<double> correlation;
  double mse = 0.0;
};

Metrics evaluate(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

/// Fraction of labels matched by thresholding probabilities at 0.5 (>= is 1).
double accuracy(const Eigen::VectorXd& probabilities, const Eigen::VectorXd& labels);

double support_f1(const std::vector<Eigen::Index>& estimated,
                  const std::vector<Eigen::Index>& true_support);

/// Indices of nonzero weights.
std::vector<Eigen::Index> support_of(const Eigen::VectorXd& w);

struct FeatureAxis {
  std::string name;
  Eigen::Index size = 0;
  std::vector<std::string> labels;
};

/// Factorization of the feature index. Features are laid out row-major: the
/// first axis varies slowest.
struct FeatureGrouping {
  std::vector<FeatureAxis> axes;

  Eigen::Index total() const;
};

/// Share of Σ|w| carried by each level of each axis.
std::vector<std::vector<double>> importance_report(const Eigen::VectorXd& w,
                                                   const FeatureGrouping& grouping);

struct CvFailure {
  int fold = 0;
  std::size_t candidate = 0;
  std::string message;
};

struct CvResult {
  double sigma = 0.0;
  std::vector<double> candidates;
  /// folds x candidates; -inf where the fit failed.
  Eigen::MatrixXd scores;
  std::vector<double> mean_scores;
  std::vector<CvFailure> failures;
};

/// Leave-one-out residuals of ridge regression (lambda = 1): e_i / (1 - H_ii).
Eigen::VectorXd ridge_loo_residuals(const Eigen::MatrixXd& x, const Eigen::VectorXd& t,
                                    double lambda = 1.0);

/// Regression: {0.25, 0.5, 1, 2, 4} times the standard deviation of the ridge
/// (lambda = 1) leave-one-out residuals; the multipliers alone when that
/// deviation is zero. Classification: {0.5, 1, 2} times sqrt(N).
std::vector<double> default_sigma_grid(const Dataset& data);

/// K-fold bandwidth search over contiguous folds. Scores are held-out
/// correlation (regression; undefined counts as 0) or accuracy (classification).
/// Ties go to the larger bandwidth.
CvResult select_bandwidth_cv(const Dataset& data, const std::vector<double>& candidate_sigmas,
                             int folds, EstimatorKind kind, const FitConfig& cfg);

/// One replicate suite: fixed dimensions and noise, a seed list, and the
/// estimators to compare.
struct Scenario {
  std::string name;
  Task task = Task::Regression;
  Eigen::Index n_train = 0;
  Eigen::Index n_test = 0;
  Eigen::Index d = 0;
  Eigen::Index k = 0;
  NoiseModel noise;
  double flip_rate = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<EstimatorKind> estimators;
  FitConfig fit;
  /// Fixed: fit.kernel for every kernel estimator. CrossValidated: kernel
  /// estimators pick from default_sigma_grid() by
  /// `cv_folds`-fold cross validation on the training replicate.
  enum class Bandwidth { Fixed, CrossValidated };
  Bandwidth bandwidth = Bandwidth::Fixed;
  int cv_folds = 5;
};

std::vector<std::string> scenario_names();
/// Throws InvalidArgument listing the available names for unknown ones.
Scenario scenario_by_name(const std::string& name);

struct RunRecord {
  std::string scenario;
  EstimatorKind estimator = EstimatorKind::SblMee;
  std::uint64_t seed = 0;
  std::optional<double> correlation;
  double mse = 0.0;
  std::optional<double> accuracy;
  double support_f1 = 0.0;
  Eigen::Index active_count = 0;
  int iterations = 0;
  double sigma = 0.0;
  double wall_time_s = 0.0;
  std::optional<std::string> error;
};

/// Train on a fresh replicate and score on a clean held-out set drawn from
/// the same truth (noise-free targets for regression, unflipped labels for
/// classification).
RunRecord run_replicate(const Scenario& scenario, EstimatorKind estimator, std::uint64_t seed);

/// All (estimator, seed) records, ordered by seed then estimator list order.
/// `threads` <= 1 runs serially.
std::vector<RunRecord> run_scenario(const Scenario& scenario, int threads = 1);

struct EstimatorSummary {
  EstimatorKind estimator = EstimatorKind::SblMee;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::optional<double> median_correlation;
  double median_mse = 0.0;
  std::optional<double> median_accuracy;
  double median_support_f1 = 0.0;
  double median_active = 0.0;
};

std::vector<EstimatorSummary> summarize(const Scenario& scenario,
                                        const std::vector<RunRecord>& records);

double median(std::vector<double> values);

}  // namespace robust_sbl

#endif  // ROBUST_SBL_BENCH_HPP
