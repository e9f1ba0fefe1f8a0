#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "robust_sbl/error.hpp"
#include "robust_sbl/glm.hpp"

using namespace robust_sbl;

TEST(Predict, IdentityZeroWeightsGiveZero) {
  const GlmModel m = make_model(Link::Identity, Eigen::VectorXd::Zero(3));
  EXPECT_EQ(predict(m, Eigen::Vector3d(4.0, -2.0, 7.5)), 0.0);
}

TEST(Predict, LogisticZeroWeightsGiveOneHalf) {
  const GlmModel m = make_model(Link::Logistic, Eigen::VectorXd::Zero(2));
  EXPECT_EQ(predict(m, Eigen::Vector2d(-3.0, 9.0)), 0.5);
}

TEST(Predict, IdentityDotProduct) {
  const GlmModel m = make_model(Link::Identity, Eigen::Vector2d(1.0, 2.0));
  EXPECT_DOUBLE_EQ(predict(m, Eigen::Vector2d(3.0, 4.0)), 11.0);
}

TEST(Predict, DimensionMismatchThrows) {
  const GlmModel m = make_model(Link::Identity, Eigen::VectorXd::Zero(2));
  EXPECT_THROW(predict(m, Eigen::Vector3d(1.0, 2.0, 3.0)), InvalidArgument);
  EXPECT_THROW(predict_all(m, Eigen::MatrixXd::Zero(4, 3)), InvalidArgument);
}

TEST(Predict, LogisticStaysInsideOpenUnitIntervalForExtremeInputs) {
  const GlmModel m = make_model(Link::Logistic, Eigen::VectorXd::Ones(1));
  for (const double z : {-1e6, -800.0, -35.0, 0.0, 35.0, 800.0, 1e6}) {
    const double p = predict(m, Eigen::VectorXd::Constant(1, z));
    EXPECT_GT(p, 0.0) << z;
    EXPECT_LT(p, 1.0) << z;
  }
  EXPECT_EQ(sigmoid(1e6), sigmoid(kLogitClamp));
  EXPECT_EQ(sigmoid(-1e6), sigmoid(-kLogitClamp));
}

TEST(Predict, IdentityIsLinearInWeights) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::VectorXd w1 = oracle::normal_vector(6, rng);
    const Eigen::VectorXd w2 = oracle::normal_vector(6, rng);
    const Eigen::VectorXd x = oracle::normal_vector(6, rng);
    const double sum = predict(make_model(Link::Identity, w1 + w2), x);
    const double parts =
        predict(make_model(Link::Identity, w1), x) + predict(make_model(Link::Identity, w2), x);
    EXPECT_NEAR(sum, parts, 1e-12);
  }
}

TEST(Residuals, ZeroIdentityModelReturnsTargets) {
  const Dataset d = make_dataset(Eigen::MatrixXd::Ones(2, 1), Eigen::Vector2d(1.0, -2.0),
                                 Task::Regression);
  const Eigen::VectorXd e = residuals(make_model(Link::Identity, Eigen::VectorXd::Zero(1)), d);
  EXPECT_EQ(e, Eigen::Vector2d(1.0, -2.0));
}

TEST(Residuals, ZeroLogisticModelGivesPlusMinusHalf) {
  const Dataset d = make_dataset(Eigen::MatrixXd::Ones(2, 1), Eigen::Vector2d(1.0, 0.0),
                                 Task::BinaryClassification);
  const Eigen::VectorXd e = residuals(make_model(Link::Logistic, Eigen::VectorXd::Zero(1)), d);
  EXPECT_EQ(e, Eigen::Vector2d(0.5, -0.5));
}

TEST(Residuals, HandArithmetic) {
  Eigen::MatrixXd x(2, 1);
  x << 2.0, 3.0;
  const Dataset d = make_dataset(x, Eigen::Vector2d(2.0, 2.0), Task::Regression);
  const Eigen::VectorXd e = residuals(make_model(Link::Identity, Eigen::VectorXd::Ones(1)), d);
  EXPECT_EQ(e, Eigen::Vector2d(0.0, -1.0));
}

TEST(Residuals, PlusPredictionsReproduceTargets) {
  std::mt19937_64 rng(11);
  for (const Link link : {Link::Identity, Link::Logistic}) {
    const Eigen::MatrixXd x = oracle::normal_matrix(30, 4, rng);
    Eigen::VectorXd t = oracle::normal_vector(30, rng);
    Task task = Task::Regression;
    if (link == Link::Logistic) {
      t = t.unaryExpr([](double v) { return v > 0 ? 1.0 : 0.0; });
      task = Task::BinaryClassification;
    }
    const Dataset d = make_dataset(x, t, task);
    const GlmModel m = make_model(link, oracle::normal_vector(4, rng, 3.0));
    const Eigen::VectorXd e = residuals(m, d);
    EXPECT_LT((e + predict_all(m, x) - t).lpNorm<Eigen::Infinity>(), 1e-14);
    if (link == Link::Logistic) {
      EXPECT_LT(e.cwiseAbs().maxCoeff(), 1.0);
    }
  }
}

TEST(Dataset, RejectsBadInputs) {
  EXPECT_THROW(make_dataset(Eigen::MatrixXd::Zero(0, 2), Eigen::VectorXd(0), Task::Regression),
               InvalidArgument);
  EXPECT_THROW(make_dataset(Eigen::MatrixXd::Zero(2, 0), Eigen::VectorXd::Zero(2),
                            Task::Regression),
               InvalidArgument);
  EXPECT_THROW(make_dataset(Eigen::MatrixXd::Zero(2, 2), Eigen::VectorXd::Zero(3),
                            Task::Regression),
               InvalidArgument);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 2);
  x(1, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(make_dataset(x, Eigen::VectorXd::Zero(2), Task::Regression), InvalidArgument);
  EXPECT_THROW(make_dataset(Eigen::MatrixXd::Zero(2, 2), Eigen::Vector2d(0.0, 0.5),
                            Task::BinaryClassification),
               InvalidArgument);
}

TEST(ActiveSet, IndicesTrackMaskThroughRemovals) {
  ActiveSet s(5);
  EXPECT_EQ(s.size(), 5);
  s.remove(1);
  s.remove(3);
  s.remove(3);
  EXPECT_EQ(s.indices(), (std::vector<Eigen::Index>{0, 2, 4}));
  for (Eigen::Index d = 0; d < 5; ++d) {
    const bool listed =
        std::find(s.indices().begin(), s.indices().end(), d) != s.indices().end();
    EXPECT_EQ(s.contains(d), listed);
  }
  Eigen::MatrixXd x(1, 5);
  x << 10, 11, 12, 13, 14;
  EXPECT_EQ(select_columns(x, s), (Eigen::MatrixXd(1, 3) << 10, 12, 14).finished());
}

TEST(Dataset, SubsetRowsKeepsOrder) {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  const Dataset d = make_dataset(x, Eigen::Vector3d(4, 5, 6), Task::Regression);
  const Dataset s = subset_rows(d, {2, 0});
  EXPECT_EQ(s.x, (Eigen::MatrixXd(2, 1) << 3, 1).finished());
  EXPECT_EQ(s.t, Eigen::Vector2d(6, 4));
}
