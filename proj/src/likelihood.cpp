#include "robust_sbl/likelihood.hpp"

#include <cmath>

#include "robust_sbl/error.hpp"

namespace robust_sbl {

double ErrorLikelihood::value(const Eigen::VectorXd& errors) const {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < errors.size(); ++i) sum += term(errors[i]).value;
  return sum;
}

MeeLikelihood::MeeLikelihood(Codebook cb, KernelConfig kernel)
    : cb_(std::move(cb)), kernel_(kernel) {
  if (!(kernel_.sigma > 0.0)) throw InvalidArgument("kernel bandwidth must be positive");
  if (cb_.size() == 0 || cb_.counts.size() != static_cast<std::size_t>(cb_.size())) {
    throw InvalidArgument("malformed codebook");
  }
}

std::shared_ptr<const MeeLikelihood> MeeLikelihood::adaptive(const Eigen::VectorXd& errors,
                                                             KernelConfig kernel,
                                                             std::optional<double> fixed_epsilon) {
  const double eps = fixed_epsilon ? *fixed_epsilon : range_epsilon(errors);
  auto lik = std::make_shared<MeeLikelihood>(build_codebook(errors, {eps}), kernel);
  lik->adaptive_ = true;
  lik->fixed_epsilon_ = fixed_epsilon;
  return lik;
}

ResidualTerm MeeLikelihood::term(double e) const {
  const double s2 = kernel_.sigma * kernel_.sigma;
  ResidualTerm r;
  double weighted_center = 0.0;
  for (Eigen::Index j = 0; j < cb_.size(); ++j) {
    const double u = e - cb_.elements[j];
    const double phi =
        static_cast<double>(cb_.counts[static_cast<std::size_t>(j)]) * std::exp(-u * u / (2.0 * s2));
    r.value += phi;
    r.slope -= phi * u / s2;
    r.curvature += phi * (u * u / s2 - 1.0) / s2;
    r.hq_weight += phi;
    weighted_center += phi * cb_.elements[j];
  }
  r.hq_center = r.hq_weight > 0.0 ? weighted_center / r.hq_weight : e;
  r.hq_weight /= s2;
  return r;
}

std::shared_ptr<const ErrorLikelihood> MeeLikelihood::refreshed(
    const Eigen::VectorXd& errors) const {
  if (!adaptive_) return nullptr;
  return adaptive(errors, kernel_, fixed_epsilon_);
}

CorrentropyLikelihood::CorrentropyLikelihood(KernelConfig kernel, double scale)
    : kernel_(kernel), scale_(scale) {
  if (!(kernel_.sigma > 0.0)) throw InvalidArgument("kernel bandwidth must be positive");
  if (!(scale_ > 0.0)) throw InvalidArgument("correntropy scale must be positive");
}

ResidualTerm CorrentropyLikelihood::term(double e) const {
  const double s2 = kernel_.sigma * kernel_.sigma;
  const double k = scale_ * std::exp(-e * e / (2.0 * s2));
  ResidualTerm r;
  r.value = k;
  r.slope = -k * e / s2;
  r.curvature = k * (e * e / s2 - 1.0) / s2;
  r.hq_weight = k / s2;
  r.hq_center = 0.0;
  return r;
}

}  // namespace robust_sbl
