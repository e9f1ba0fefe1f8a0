#include "robust_sbl/mee.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "robust_sbl/error.hpp"

namespace robust_sbl {

namespace {

void check_sigma(const KernelConfig& cfg) {
  if (!(cfg.sigma > 0.0) || !std::isfinite(cfg.sigma)) {
    throw InvalidArgument("kernel bandwidth must be positive and finite");
  }
}

}  // namespace

std::int64_t Codebook::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

double gaussian_kernel(double x, const KernelConfig& cfg) {
  check_sigma(cfg);
  return std::exp(-(x * x) / (2.0 * cfg.sigma * cfg.sigma));
}

Codebook build_codebook(const Eigen::VectorXd& errors, const QuantizationConfig& cfg) {
  if (errors.size() == 0) throw InvalidArgument("cannot quantize an empty error set");
  if (!(cfg.epsilon >= 0.0)) throw InvalidArgument("quantization threshold must be >= 0");
  if (!errors.allFinite()) throw InvalidArgument("error set contains non-finite values");

  std::vector<double> elements{errors[0]};
  std::vector<std::int64_t> counts{1};
  for (Eigen::Index i = 1; i < errors.size(); ++i) {
    const double e = errors[i];
    std::size_t nearest = 0;
    double best = std::abs(e - elements[0]);
    for (std::size_t j = 1; j < elements.size(); ++j) {
      const double dist = std::abs(e - elements[j]);
      if (dist < best) {
        best = dist;
        nearest = j;
      }
    }
    if (best <= cfg.epsilon) {
      ++counts[nearest];
    } else {
      elements.push_back(e);
      counts.push_back(1);
    }
  }

  Codebook cb;
  cb.elements = Eigen::Map<const Eigen::VectorXd>(elements.data(),
                                                   static_cast<Eigen::Index>(elements.size()));
  cb.counts = std::move(counts);
  cb.restricted = false;
  return cb;
}

double range_epsilon(const Eigen::VectorXd& errors) {
  if (errors.size() == 0) throw InvalidArgument("cannot derive a threshold from no errors");
  const double range = errors.maxCoeff() - errors.minCoeff();
  return range > 0.0 ? range / 20.0 : 1e-12;
}

std::array<std::int64_t, 3> restricted_counts(const Eigen::VectorXd& errors) {
  std::array<std::int64_t, 3> eta{0, 0, 0};
  for (Eigen::Index i = 0; i < errors.size(); ++i) {
    const double e = errors[i];
    if (!(std::abs(e) < 1.0)) {
      throw InvalidArgument("restricted codebook needs residuals in (-1, 1); got " +
                            std::to_string(e) + " at index " + std::to_string(i));
    }
    if (e > 0.5) {
      ++eta[2];
    } else if (e <= -0.5) {
      ++eta[1];
    } else {
      ++eta[0];
    }
  }
  return eta;
}

Codebook restricted_codebook(const Eigen::VectorXd& errors) {
  if (errors.size() < 3) {
    throw InvalidArgument("restricted codebook needs at least 3 residuals");
  }
  auto eta = restricted_counts(errors);
  for (auto& count : eta) {
    if (count == 0) {
      auto largest = std::max_element(eta.begin(), eta.end());
      --*largest;
      count = 1;
    }
  }
  Codebook cb;
  cb.elements = Eigen::Vector3d(0.0, -1.0, 1.0);
  cb.counts.assign(eta.begin(), eta.end());
  cb.restricted = true;
  return cb;
}

double mee_log_likelihood(const Eigen::VectorXd& errors, const Codebook& cb,
                          const KernelConfig& cfg) {
  check_sigma(cfg);
  if (cb.size() == 0 || cb.counts.size() != static_cast<std::size_t>(cb.size())) {
    throw InvalidArgument("malformed codebook");
  }
  const double inv = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < errors.size(); ++i) {
    for (Eigen::Index j = 0; j < cb.size(); ++j) {
      const double u = errors[i] - cb.elements[j];
      sum += static_cast<double>(cb.counts[static_cast<std::size_t>(j)]) * std::exp(-u * u * inv);
    }
  }
  return sum;
}

double qmee_objective(const Eigen::VectorXd& errors, const Codebook& cb, const KernelConfig& cfg) {
  if (errors.size() == 0) throw InvalidArgument("empty error set");
  const double n = static_cast<double>(errors.size());
  return mee_log_likelihood(errors, cb, cfg) / (n * n);
}

}  // namespace robust_sbl
