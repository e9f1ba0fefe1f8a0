#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "robust_sbl/error.hpp"
#include "robust_sbl/mee.hpp"

using namespace robust_sbl;

namespace {

Codebook make_cb(std::vector<double> elements, std::vector<std::int64_t> counts) {
  Codebook cb;
  cb.elements = Eigen::Map<Eigen::VectorXd>(elements.data(), static_cast<Eigen::Index>(elements.size()));
  cb.counts = std::move(counts);
  return cb;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST(GaussianKernel, PeakSymmetryAndValue) {
  for (const double s : {0.1, 1.0, 7.0}) EXPECT_EQ(gaussian_kernel(0.0, {s}), 1.0);
  EXPECT_EQ(gaussian_kernel(0.37, {0.8}), gaussian_kernel(-0.37, {0.8}));
  EXPECT_NEAR(gaussian_kernel(1.0, {1.0}), 0.60653065971263342, 1e-15);
}

TEST(BuildCodebook, HandTracedExamples) {
  Codebook cb = build_codebook(vec({0.3}), {0.0});
  EXPECT_EQ(cb.elements, vec({0.3}));
  EXPECT_EQ(cb.counts, (std::vector<std::int64_t>{1}));
  EXPECT_FALSE(cb.restricted);

  cb = build_codebook(vec({0.0, 0.1}), {0.5});
  EXPECT_EQ(cb.elements, vec({0.0}));
  EXPECT_EQ(cb.counts, (std::vector<std::int64_t>{2}));

  cb = build_codebook(vec({0.0, 1.0}), {0.5});
  EXPECT_EQ(cb.elements, vec({0.0, 1.0}));
  EXPECT_EQ(cb.counts, (std::vector<std::int64_t>{1, 1}));
}

TEST(BuildCodebook, TiesGoToLowerIndex) {
  // 0.5 is equidistant from 0 and 1.
  const Codebook cb = build_codebook(vec({0.0, 1.0, 0.5}), {0.5});
  EXPECT_EQ(cb.elements, vec({0.0, 1.0}));
  EXPECT_EQ(cb.counts, (std::vector<std::int64_t>{2, 1}));
}

TEST(BuildCodebook, EmptyInputThrows) {
  EXPECT_THROW(build_codebook(Eigen::VectorXd(0), {0.1}), InvalidArgument);
  EXPECT_THROW(build_codebook(vec({1.0}), {-0.1}), InvalidArgument);
}

TEST(BuildCodebook, MatchesReferenceQuantizerAndConservesCounts) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(1, 150);
  for (int rep = 0; rep < 60; ++rep) {
    const Eigen::VectorXd e = oracle::normal_vector(size(rng), rng, 2.0);
    const double eps = range_epsilon(e) * (rep % 3 == 0 ? 0.5 : 1.0);
    const Codebook cb = build_codebook(e, {eps});
    const oracle::RefCodebook ref = oracle::quantize(e, eps);
    ASSERT_EQ(cb.size(), static_cast<Eigen::Index>(ref.elements.size()));
    for (Eigen::Index j = 0; j < cb.size(); ++j) {
      EXPECT_EQ(cb.elements[j], ref.elements[static_cast<std::size_t>(j)]);
      EXPECT_EQ(cb.counts[static_cast<std::size_t>(j)], ref.counts[static_cast<std::size_t>(j)]);
    }
    EXPECT_EQ(cb.total(), e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      EXPECT_LE(std::fabs(e[i] - ref.elements[ref.assignment[static_cast<std::size_t>(i)]]),
                eps);
    }
  }
}

TEST(RangeEpsilon, RuleAndDegenerateFallback) {
  EXPECT_DOUBLE_EQ(range_epsilon(vec({-1.0, 3.0, 0.5})), 0.2);
  EXPECT_EQ(range_epsilon(vec({2.0, 2.0, 2.0})), 1e-12);
  const Codebook cb = build_codebook(vec({2.0, 2.0, 2.0}), {range_epsilon(vec({2.0, 2.0, 2.0}))});
  EXPECT_EQ(cb.size(), 1);
  EXPECT_EQ(cb.counts[0], 3);
}

TEST(RangeEpsilon, AtMostTwentyOneSpansFitTheRule) {
  // Every element seeded by the rule is more than epsilon from all earlier
  // ones, so at most 21 can fit in the range; the observed count is far lower.
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::VectorXd e = oracle::normal_vector(200, rng);
    EXPECT_LE(build_codebook(e, {range_epsilon(e)}).size(), 21);
  }
}

TEST(RestrictedCounts, DirectIntervalCounting) {
  EXPECT_EQ(restricted_counts(vec({-0.7, 0.2, 0.6})), (std::array<std::int64_t, 3>{1, 1, 1}));
  EXPECT_EQ(restricted_counts(vec({0.2, -0.2, 0.49, -0.51})),
            (std::array<std::int64_t, 3>{3, 1, 0}));
  EXPECT_EQ(restricted_counts(vec({0.5, -0.5})), (std::array<std::int64_t, 3>{1, 1, 0}));
}

TEST(RestrictedCodebook, ZeroCountsAreRaisedFromTheLargest) {
  const Codebook all_correct = restricted_codebook(Eigen::VectorXd::Constant(7, 0.1));
  EXPECT_TRUE(all_correct.restricted);
  EXPECT_EQ(all_correct.elements, vec({0.0, -1.0, 1.0}));
  EXPECT_EQ(all_correct.counts, (std::vector<std::int64_t>{5, 1, 1}));

  const Codebook one_zero = restricted_codebook(vec({0.2, -0.2, 0.49, -0.51}));
  EXPECT_EQ(one_zero.counts, (std::vector<std::int64_t>{2, 1, 1}));
}

TEST(RestrictedCodebook, RejectsOutOfRangeAndTooFewErrors) {
  EXPECT_THROW(restricted_codebook(vec({0.1, 1.0, 0.2})), InvalidArgument);
  EXPECT_THROW(restricted_codebook(vec({0.1, -1.2, 0.2})), InvalidArgument);
  EXPECT_THROW(restricted_codebook(vec({0.1, 0.2})), InvalidArgument);
}

TEST(RestrictedCodebook, CountsAlwaysSumToN) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.999, 0.999);
  std::uniform_int_distribution<int> size(3, 80);
  for (int rep = 0; rep < 500; ++rep) {
    Eigen::VectorXd e(size(rng));
    const int mode = rep % 4;
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = mode == 0 ? 0.3 * u(rng) : u(rng);
    const Codebook cb = restricted_codebook(e);
    EXPECT_EQ(cb.total(), e.size());
    for (const auto c : cb.counts) EXPECT_GE(c, 1);
  }
}

TEST(QmeeObjective, HandExpansions) {
  const Codebook single = make_cb({0.0}, {5});
  EXPECT_DOUBLE_EQ(qmee_objective(Eigen::VectorXd::Zero(5), single, {1.0}), 1.0);
  const Codebook two = make_cb({0.0, 1.0}, {1, 1});
  const double expected = 0.25 * (2.0 + 2.0 * std::exp(-0.5));
  EXPECT_NEAR(qmee_objective(vec({0.0, 1.0}), two, {1.0}), expected, 1e-15);
  EXPECT_NEAR(expected, 0.8033, 5e-5);
  EXPECT_NEAR(mee_log_likelihood(vec({0.0, 1.0}), two, {1.0}), 4.0 * expected, 1e-14);
  EXPECT_NEAR(mee_log_likelihood(vec({0.0, 1.0}), two, {1.0}), 3.2131, 5e-5);
  EXPECT_DOUBLE_EQ(mee_log_likelihood(Eigen::VectorXd::Zero(6), make_cb({0.0}, {6}), {2.0}),
                   36.0);
}

TEST(QmeeObjective, ZeroEpsilonEqualsFullDoubleSum) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd e = oracle::normal_vector(40 + rep, rng);
    const double sigma = 0.3 + 0.2 * rep;
    const double got = qmee_objective(e, build_codebook(e, {0.0}), {sigma});
    EXPECT_LE(oracle::relative_error(got, oracle::full_mee(e, sigma)), 1e-12);
  }
}

TEST(QmeeObjective, FidelityImprovesAsEpsilonShrinks) {
  std::mt19937_64 rng(29);
  const Eigen::VectorXd e = oracle::normal_vector(150, rng);
  const double full = oracle::full_mee(e, 0.5);
  double previous = std::numeric_limits<double>::infinity();
  for (const double eps : {0.4, 0.1, 0.02, 0.001}) {
    const double err = std::fabs(qmee_objective(e, build_codebook(e, {eps}), {0.5}) - full);
    EXPECT_LE(err, previous + 1e-15);
    previous = err;
  }
  EXPECT_LT(previous, 1e-5);
}

TEST(QmeeObjective, LogLikelihoodIsNSquaredTimesObjective) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd e = oracle::normal_vector(10 + rep, rng);
    const Codebook cb = build_codebook(e, {range_epsilon(e)});
    const double n = static_cast<double>(e.size());
    EXPECT_LE(oracle::relative_error(mee_log_likelihood(e, cb, {0.7}),
                                     n * n * qmee_objective(e, cb, {0.7})),
              1e-13);
  }
}

TEST(QmeeObjective, PermutationInvariant) {
  std::mt19937_64 rng(37);
  const Eigen::VectorXd e = oracle::normal_vector(50, rng);
  const Codebook cb = build_codebook(e, {0.2});
  std::vector<Eigen::Index> perm(50);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::VectorXd p(50);
  for (Eigen::Index i = 0; i < 50; ++i) p[i] = e[perm[static_cast<std::size_t>(i)]];
  EXPECT_NEAR(qmee_objective(p, cb, {1.0}), qmee_objective(e, cb, {1.0}), 1e-14);
}

TEST(QmeeObjective, WideBandwidthLimitIsOne) {
  std::mt19937_64 rng(41);
  const Eigen::VectorXd e = oracle::normal_vector(30, rng);
  const Codebook cb = build_codebook(e, {0.3});
  EXPECT_NEAR(qmee_objective(e, cb, {1e6}), 1.0, 1e-9);
  EXPECT_GT(qmee_objective(e, cb, {0.01}), 0.0);
}

TEST(QmeeObjective, RejectsInvalidArguments) {
  EXPECT_THROW(qmee_objective(vec({0.1}), make_cb({0.0}, {1}), {0.0}), InvalidArgument);
  EXPECT_THROW(gaussian_kernel(1.0, {-1.0}), InvalidArgument);
  EXPECT_THROW(qmee_objective(Eigen::VectorXd(0), make_cb({0.0}, {1}), {1.0}), InvalidArgument);
}
