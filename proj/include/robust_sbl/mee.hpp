#ifndef ROBUST_SBL_MEE_HPP
#define ROBUST_SBL_MEE_HPP

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace robust_sbl {

struct KernelConfig {
  double sigma = 1.0;
};

struct QuantizationConfig {
  double epsilon = 0.0;
};

/// Quantization summary of an error set: distinct elements c_j with the
/// number of errors η_j assigned to each. Restricted codebooks are the fixed
/// {0, -1, 1} used for binary classification.
struct Codebook {
  Eigen::VectorXd elements;
  std::vector<std::int64_t> counts;
  bool restricted = false;

  Eigen::Index size() const { return elements.size(); }
  std::int64_t total() const;
};

/// exp(-x^2 / (2 sigma^2)).
double gaussian_kernel(double x, const KernelConfig& cfg);

/// Online nearest-element quantizer: the first error seeds the codebook, every
/// later error joins its nearest element when within epsilon (lowest index on
/// ties) and otherwise becomes a new element.
Codebook build_codebook(const Eigen::VectorXd& errors, const QuantizationConfig& cfg);

/// Threshold (max(e) - min(e)) / 20, or 1e-12 when all errors coincide.
double range_epsilon(const Eigen::VectorXd& errors);

/// Interval counts (η_0, η_-1, η_1) of logistic residuals before any adjustment.
/// A residual of exactly -0.5 counts toward η_-1 and +0.5 toward η_0, matching the
/// "label 1 when probability >= 0.5" convention.
std::array<std::int64_t, 3> restricted_counts(const Eigen::VectorXd& errors);

/// Fixed {0, -1, 1} codebook weighted by restricted_counts(). Zero counts are
/// raised to 1 by taking from the largest count, so the total stays N.
/// Requires N >= 3 and every |e| < 1.
Codebook restricted_codebook(const Eigen::VectorXd& errors);

/// (1/N^2) sum_i sum_j η_j k(e_i - c_j).
double qmee_objective(const Eigen::VectorXd& errors, const Codebook& cb, const KernelConfig& cfg);

/// sum_i sum_j η_j k(e_i - c_j), the MEE log-likelihood (no 1/N^2 factor).
double mee_log_likelihood(const Eigen::VectorXd& errors, const Codebook& cb,
                          const KernelConfig& cfg);

}  // namespace robust_sbl

#endif  // ROBUST_SBL_MEE_HPP
