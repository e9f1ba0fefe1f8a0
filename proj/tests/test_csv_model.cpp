#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "robust_sbl/csv.hpp"
#include "robust_sbl/error.hpp"
#include "robust_sbl/model_file.hpp"

using namespace robust_sbl;

namespace {

CsvTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, "t.csv");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const InvalidArgument& e) {
    return e.what();
  }
  return "";
}

ModelFile sample_model() {
  ModelFile m;
  m.link = Link::Logistic;
  m.task = Task::BinaryClassification;
  m.d_total = 5;
  m.weights = {{1, 0.1}, {3, -2.718281828459045}};
  m.a_expect = {12.5, 0.3};
  m.feature_names = {"a", "b", "c", "d", "e"};
  m.estimator = "sbl-mee";
  m.sigma = 0.7;
  m.iterations = 9;
  m.converged = true;
  m.objective_tail = {-3.0, -2.5, -2.4999999999999996};
  return m;
}

}  // namespace

TEST(ParseCsv, SplitsTargetAndKeepsFeatureOrder) {
  const CsvTable t = parse("x1, target ,\"x2\"\n1,2,3\n\n-4.5,+1,6e-1\r\n");
  EXPECT_EQ(t.feature_names, (std::vector<std::string>{"x1", "x2"}));
  ASSERT_EQ(t.features.rows(), 2);
  EXPECT_EQ(t.features(0, 0), 1.0);
  EXPECT_EQ(t.features(0, 1), 3.0);
  EXPECT_EQ(t.features(1, 0), -4.5);
  EXPECT_EQ(t.features(1, 1), 0.6);
  ASSERT_TRUE(t.target.has_value());
  EXPECT_EQ(*t.target, Eigen::Vector2d(2.0, 1.0));
}

TEST(ParseCsv, NoTargetColumn) {
  const CsvTable t = parse("a,b\n1,2\n");
  EXPECT_FALSE(t.target.has_value());
  EXPECT_EQ(t.features.cols(), 2);
  EXPECT_THROW(to_dataset(t, TaskChoice::Auto), InvalidArgument);
}

TEST(ParseCsv, HeaderOnlyGivesEmptyTable) {
  const CsvTable t = parse("a,target\n");
  EXPECT_EQ(t.features.rows(), 0);
  EXPECT_EQ(t.features.cols(), 1);
}

TEST(ParseCsv, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_of("a,b\n1,2\n3\n"), "t.csv:3: expected 2 fields, found 1");
  EXPECT_EQ(error_of("a,b\n\n1,x\n"), "t.csv:3: invalid number 'x' in column 'b'");
  EXPECT_EQ(error_of("a,b\n1,nan\n"), "t.csv:2: invalid number 'nan' in column 'b'");
  EXPECT_EQ(error_of("a,b\n1,\n"), "t.csv:2: invalid number '' in column 'b'");
  EXPECT_EQ(error_of("a,b\n1,2.5z\n"), "t.csv:2: invalid number '2.5z' in column 'b'");
  EXPECT_EQ(error_of(""), "t.csv: missing header row");
  EXPECT_NE(error_of("target,a,target\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("a,,b\n").find("empty column name"), std::string::npos);
}

TEST(ReadCsv, MissingFileThrows) {
  EXPECT_THROW(read_csv("/nonexistent/input.csv"), InvalidArgument);
}

TEST(InferTask, ZeroOneTargetsAreClassification) {
  EXPECT_EQ(infer_task(Eigen::Vector3d(0, 1, 1)), Task::BinaryClassification);
  EXPECT_EQ(infer_task(Eigen::Vector3d(0, 1, 0.5)), Task::Regression);
  EXPECT_EQ(infer_task(Eigen::Vector2d(2, 3)), Task::Regression);
  const CsvTable t = parse("x,target\n1,0\n2,1\n3,1\n");
  EXPECT_EQ(to_dataset(t, TaskChoice::Auto).task, Task::BinaryClassification);
  EXPECT_EQ(to_dataset(t, TaskChoice::Regression).task, Task::Regression);
  const CsvTable r = parse("x,target\n1,0.2\n2,1\n");
  EXPECT_THROW(to_dataset(r, TaskChoice::Classification), InvalidArgument);
}

TEST(ModelFile, JsonRoundTripIsExact) {
  const ModelFile m = sample_model();
  const std::string text = to_json_text(m);
  const ModelFile back = parse_model_json(text);
  EXPECT_EQ(back.link, m.link);
  EXPECT_EQ(back.task, m.task);
  EXPECT_EQ(back.d_total, m.d_total);
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.a_expect, m.a_expect);
  EXPECT_EQ(back.feature_names, m.feature_names);
  EXPECT_EQ(back.estimator, m.estimator);
  EXPECT_EQ(back.sigma, m.sigma);
  EXPECT_EQ(back.iterations, m.iterations);
  EXPECT_EQ(back.converged, m.converged);
  EXPECT_EQ(back.objective_tail, m.objective_tail);
  EXPECT_EQ(to_json_text(back), text);
}

TEST(ModelFile, RandomWeightsSurviveTheFile) {
  std::mt19937_64 rng(3);
  const auto path = std::filesystem::temp_directory_path() / "robust_sbl_model_test.json";
  for (int rep = 0; rep < 10; ++rep) {
    ModelFile m;
    m.d_total = 30;
    const Eigen::VectorXd w = oracle::normal_vector(30, rng, 1e3);
    for (Eigen::Index i = rep % 3; i < 30; i += 3) {
      m.weights.emplace_back(i, w[i] * std::pow(10.0, rep - 5));
      m.a_expect.push_back(1.0 / (1e-9 + w[i] * w[i]));
    }
    write_model_file(m, path.string());
    const ModelFile back = read_model_file(path.string());
    EXPECT_EQ(back.weights, m.weights);
    EXPECT_EQ(back.a_expect, m.a_expect);
    const Eigen::VectorXd dense = to_glm(back).w;
    for (const auto& [i, v] : m.weights) EXPECT_EQ(dense[i], v);
    EXPECT_EQ(dense.cwiseAbs().sum(), to_glm(m).w.cwiseAbs().sum());
  }
  std::filesystem::remove(path);
}

TEST(ModelFile, JsonKeysAndShape) {
  const std::string text = to_json_text(sample_model());
  const auto pos = [&](const char* key) { return text.find(std::string("\"") + key + "\""); };
  EXPECT_LT(pos("schema_version"), pos("link"));
  EXPECT_LT(pos("link"), pos("task"));
  EXPECT_LT(pos("task"), pos("d_total"));
  EXPECT_LT(pos("d_total"), pos("weights"));
  EXPECT_LT(pos("weights"), pos("a_expect"));
  EXPECT_LT(pos("a_expect"), pos("feature_names"));
  EXPECT_LT(pos("feature_names"), pos("metadata"));
  EXPECT_NE(text.find("\"logistic\""), std::string::npos);
  EXPECT_NE(text.find("\"classification\""), std::string::npos);
  EXPECT_EQ(text.back(), '\n');
}

TEST(ModelFile, ValidateRejectsBrokenInvariants) {
  ModelFile m = sample_model();
  m.weights = {{3, 1.0}, {1, 1.0}};
  EXPECT_THROW(validate(m), InvalidArgument);
  m = sample_model();
  m.weights = {{1, 1.0}, {1, 2.0}};
  EXPECT_THROW(validate(m), InvalidArgument);
  m = sample_model();
  m.weights.back().first = 5;
  EXPECT_THROW(validate(m), InvalidArgument);
  m = sample_model();
  m.a_expect.pop_back();
  EXPECT_THROW(validate(m), InvalidArgument);
  m = sample_model();
  m.feature_names.pop_back();
  EXPECT_THROW(validate(m), InvalidArgument);
  m = sample_model();
  m.weights[0].second = std::numeric_limits<double>::infinity();
  EXPECT_THROW(validate(m), InvalidArgument);
  m = sample_model();
  m.schema_version = 2;
  EXPECT_THROW(validate(m), InvalidArgument);
}

TEST(ModelFile, ParseRejectsMalformedDocuments) {
  EXPECT_THROW(parse_model_json("{"), InvalidArgument);
  EXPECT_THROW(parse_model_json("[1]"), InvalidArgument);
  std::string text = to_json_text(sample_model());
  const auto at = text.find("\"logistic\"");
  EXPECT_THROW(parse_model_json(text.substr(0, at) + "\"probit\"" + text.substr(at + 10)),
               InvalidArgument);
  text = to_json_text(sample_model());
  const auto key = text.find("\"d_total\"");
  EXPECT_THROW(parse_model_json(text.substr(0, key) + "\"d_totl\"" + text.substr(key + 9)),
               InvalidArgument);
  EXPECT_THROW(read_model_file("/nonexistent/model.json"), InvalidArgument);
}

TEST(ModelFile, FromFitKeepsSurvivorsOnly) {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd x = oracle::normal_matrix(40, 6, rng);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(6);
  w[2] = 1.5;
  const Dataset data = make_dataset(x, x * w, Task::Regression);
  const FitResult fit = fit_sbl_mee(data, {});
  const ModelFile m = make_model_file(fit, data.task);
  EXPECT_EQ(m.d_total, 6);
  EXPECT_EQ(m.link, Link::Identity);
  EXPECT_EQ(static_cast<Eigen::Index>(m.weights.size()), fit.state.active.size());
  EXPECT_EQ(m.iterations, fit.report.iterations_used);
  EXPECT_LE(m.objective_tail.size(), 10u);
  EXPECT_EQ(to_glm(m).w, fit.state.w_star);
  EXPECT_THROW(make_model_file(fit, data.task, {"only-one"}), InvalidArgument);
}
