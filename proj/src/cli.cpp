#include "robust_sbl/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "robust_sbl/baselines.hpp"
#include "robust_sbl/bench.hpp"
#include "robust_sbl/csv.hpp"
#include "robust_sbl/error.hpp"
#include "robust_sbl/model_file.hpp"

namespace robust_sbl {

namespace {

using Json = nlohmann::ordered_json;

struct Options {
  std::string estimator = "sbl-mee";
  std::string input;
  std::string model;
  std::string output;
  std::vector<double> sigma;
  double a_max = 1e6;
  int max_iters = 300;
  std::optional<double> epsilon;
  int folds = 5;
  std::uint64_t seed = 0;
  std::string scenario;
  std::string task = "auto";
};

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json number_or_null(const std::optional<double>& v) {
  return v ? number_or_null(*v) : Json(nullptr);
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

EstimatorKind estimator_from(const Options& opt) {
  const auto kind = parse_estimator(opt.estimator);
  if (!kind) throw InvalidArgument("unknown estimator '" + opt.estimator + "'");
  return *kind;
}

TaskChoice task_from(const Options& opt) {
  if (opt.task == "regression") return TaskChoice::Regression;
  if (opt.task == "classification") return TaskChoice::Classification;
  return TaskChoice::Auto;
}

FitConfig fit_config_from(const Options& opt) {
  FitConfig cfg;
  cfg.a_max = opt.a_max;
  cfg.max_outer_iters = opt.max_iters;
  if (opt.epsilon) cfg.epsilon_rule = EpsilonRule::fixed(*opt.epsilon);
  if (!opt.sigma.empty()) cfg.kernel.sigma = opt.sigma.front();
  cfg.seed = opt.seed;
  validate(cfg);
  return cfg;
}

// Reports go to the --output file when one is given.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw InvalidArgument("cannot write '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& stream() { return *stream_; }
  void emit(const Json& record) { *stream_ << record.dump() << '\n' << std::flush; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

Json train_record(const Dataset& data, const FitResult& fit, const std::string& model_path) {
  const auto& r = fit.report;
  Json j;
  j["type"] = "train";
  j["estimator"] = r.estimator;
  j["task"] = std::string(to_string(data.task));
  j["samples"] = data.samples();
  j["features"] = data.features();
  j["active"] = fit.state.active.size();
  j["iterations"] = r.iterations_used;
  j["converged"] = r.converged;
  j["all_pruned"] = r.all_pruned;
  j["final_objective"] =
      r.objective_trace.empty() ? Json(nullptr) : number_or_null(r.objective_trace.back());
  j["sigma"] = r.sigma;
  j["wall_time_s"] = r.wall_time_s;
  j["model"] = model_path;
  return j;
}

void train_and_save(const CsvTable& table, const Dataset& data, EstimatorKind kind,
                    const FitConfig& cfg, const std::string& model_path, Sink& sink) {
  const FitResult fit = fit_estimator(data, kind, cfg);
  write_model_file(make_model_file(fit, data.task, table.feature_names), model_path);
  sink.emit(train_record(data, fit, model_path));
}

int cmd_train(const Options& opt, Sink& sink) {
  const EstimatorKind kind = estimator_from(opt);
  const FitConfig cfg = fit_config_from(opt);
  const CsvTable table = read_csv(opt.input);
  const Dataset data = to_dataset(table, task_from(opt));
  check_compatible(kind, data.task);
  train_and_save(table, data, kind, cfg, opt.model, sink);
  return 0;
}

int cmd_predict(const Options& opt, Sink& sink) {
  const ModelFile model = read_model_file(opt.model);
  const CsvTable table = read_csv(opt.input);
  if (table.features.cols() != model.d_total) {
    throw InvalidArgument("feature width mismatch: model expects " +
                          std::to_string(model.d_total) + " columns, input has " +
                          std::to_string(table.features.cols()));
  }
  const Eigen::VectorXd pred = predict_all(to_glm(model), table.features);
  std::ostream& os = sink.stream();
  const bool classify = model.link == Link::Logistic;
  os << (classify ? "probability,label\n" : "prediction\n");
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    os << format_double(pred[i]);
    if (classify) os << ',' << (pred[i] >= 0.5 ? 1 : 0);
    os << '\n';
  }
  os.flush();
  return 0;
}

Json record_json(const RunRecord& r) {
  Json j;
  j["type"] = "record";
  j["scenario"] = r.scenario;
  j["estimator"] = std::string(to_string(r.estimator));
  j["seed"] = r.seed;
  j["correlation"] = number_or_null(r.correlation);
  j["mse"] = number_or_null(r.mse);
  j["accuracy"] = number_or_null(r.accuracy);
  j["support_f1"] = r.support_f1;
  j["active"] = r.active_count;
  j["iterations"] = r.iterations;
  j["sigma"] = r.sigma;
  j["wall_time_s"] = r.wall_time_s;
  if (r.error) j["error"] = *r.error;
  return j;
}

int cmd_bench(const Options& opt, Sink& sink, const CLI::App& sub) {
  Scenario s = scenario_by_name(opt.scenario);
  s.fit.a_max = opt.a_max;
  s.fit.max_outer_iters = opt.max_iters;
  if (opt.epsilon) s.fit.epsilon_rule = EpsilonRule::fixed(*opt.epsilon);
  if (!opt.sigma.empty()) {
    s.fit.kernel.sigma = opt.sigma.front();
    s.bandwidth = Scenario::Bandwidth::Fixed;
  }
  s.cv_folds = opt.folds;
  if (sub.count("--seed") > 0) {
    for (auto& seed : s.seeds) seed += opt.seed;
  }
  validate(s.fit);

  const auto records = run_scenario(s, thread_budget());
  bool failed = false;
  for (const auto& r : records) {
    sink.emit(record_json(r));
    failed = failed || r.error.has_value();
  }

  const auto summaries = summarize(s, records);
  Json estimators = Json::array();
  const EstimatorSummary* reference = nullptr;
  for (const auto& e : summaries) {
    if (e.estimator == EstimatorKind::SblMee) reference = &e;
    estimators.push_back({{"estimator", std::string(to_string(e.estimator))},
                          {"runs", e.runs},
                          {"failures", e.failures},
                          {"median_correlation", number_or_null(e.median_correlation)},
                          {"median_mse", number_or_null(e.median_mse)},
                          {"median_accuracy", number_or_null(e.median_accuracy)},
                          {"median_support_f1", e.median_support_f1},
                          {"median_active", e.median_active}});
  }
  Json comparisons = Json::array();
  if (reference != nullptr) {
    auto diff = [](const std::optional<double>& a, const std::optional<double>& b) {
      return a && b ? number_or_null(*a - *b) : Json(nullptr);
    };
    for (const auto& e : summaries) {
      if (&e == reference) continue;
      comparisons.push_back(
          {{"estimator", std::string(to_string(e.estimator))},
           {"correlation_margin", diff(reference->median_correlation, e.median_correlation)},
           {"accuracy_margin", diff(reference->median_accuracy, e.median_accuracy)},
           {"support_f1_margin", reference->median_support_f1 - e.median_support_f1}});
    }
  }
  sink.emit({{"type", "summary"},
             {"scenario", s.name},
             {"seeds", s.seeds.size()},
             {"estimators", std::move(estimators)},
             {"sbl_mee_margins", std::move(comparisons)}});
  return failed ? 1 : 0;
}

int cmd_crossval(const Options& opt, Sink& sink) {
  const EstimatorKind kind = estimator_from(opt);
  if (!uses_bandwidth(kind)) {
    throw InvalidArgument("estimator '" + opt.estimator + "' has no kernel bandwidth to tune");
  }
  FitConfig cfg = fit_config_from(opt);
  const CsvTable table = read_csv(opt.input);
  const Dataset data = to_dataset(table, task_from(opt));
  check_compatible(kind, data.task);
  const std::vector<double> grid = opt.sigma.empty() ? default_sigma_grid(data) : opt.sigma;
  const CvResult cv = select_bandwidth_cv(data, grid, opt.folds, kind, cfg);

  Json scores = Json::array();
  for (Eigen::Index f = 0; f < cv.scores.rows(); ++f) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < cv.scores.cols(); ++c) row.push_back(number_or_null(cv.scores(f, c)));
    scores.push_back(std::move(row));
  }
  Json mean_scores = Json::array();
  for (const double m : cv.mean_scores) mean_scores.push_back(number_or_null(m));
  Json failures = Json::array();
  for (const auto& f : cv.failures) {
    failures.push_back({{"fold", f.fold}, {"candidate", f.candidate}, {"message", f.message}});
  }
  sink.emit({{"type", "crossval"},
             {"estimator", opt.estimator},
             {"folds", opt.folds},
             {"sigma", cv.sigma},
             {"candidates", cv.candidates},
             {"scores", std::move(scores)},
             {"mean_scores", std::move(mean_scores)},
             {"failures", std::move(failures)}});

  if (!opt.model.empty()) {
    cfg.kernel.sigma = cv.sigma;
    train_and_save(table, data, kind, cfg, opt.model, sink);
  }
  return 0;
}

void add_fit_flags(CLI::App& sub, Options& opt) {
  sub.add_option("--estimator", opt.estimator, "sbl-mee | sbl-gaussian | sbl-binomial | sbcl")
      ->capture_default_str();
  sub.add_option("--a-max", opt.a_max, "Pruning threshold on E[a_d]")->capture_default_str();
  sub.add_option("--max-iters", opt.max_iters, "Outer iteration cap")->capture_default_str();
  sub.add_option("--epsilon", opt.epsilon, "Fixed quantization threshold (default: range/20)");
  sub.add_option("--seed", opt.seed, "Seed")->capture_default_str();
  sub.add_option("--task", opt.task, "auto | regression | classification")
      ->check(CLI::IsMember({"auto", "regression", "classification"}))
      ->capture_default_str();
}

}  // namespace

int thread_budget() {
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* cap = std::getenv("ROBUST_SBL_THREADS"); cap != nullptr && *cap != '\0') {
    int value = 0;
    const std::string_view text(cap);
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size() || value < 1) {
      throw InvalidArgument("ROBUST_SBL_THREADS must be a positive integer");
    }
    threads = std::min(threads, value);
  }
  return threads;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust sparse Bayesian learning with a minimum-error-entropy likelihood",
               "robust-sbl"};
  app.require_subcommand(1);
  Options opt;

  auto* train = app.add_subcommand("train", "Fit an estimator on a CSV file and save the model");
  add_fit_flags(*train, opt);
  train->add_option("--input", opt.input, "Training CSV (header row, 'target' column)")
      ->required();
  train->add_option("--model", opt.model, "Model file to write")->required();
  train->add_option("--sigma", opt.sigma, "Kernel bandwidth")->expected(1);
  train->add_option("--output", opt.output, "Report file (default: standard output)");

  auto* predict = app.add_subcommand("predict", "Apply a saved model to a CSV file");
  predict->add_option("--model", opt.model, "Model file")->required();
  predict->add_option("--input", opt.input, "Feature CSV ('target' column ignored)")->required();
  predict->add_option("--output", opt.output, "Predictions CSV (default: standard output)");

  auto* bench = app.add_subcommand("bench", "Run a synthetic benchmark scenario");
  bench->add_option("--scenario", opt.scenario, "Scenario name")->required();
  bench->add_option("--sigma", opt.sigma, "Fixed bandwidth instead of cross validation")
      ->expected(1);
  bench->add_option("--a-max", opt.a_max, "Pruning threshold on E[a_d]")->capture_default_str();
  bench->add_option("--max-iters", opt.max_iters, "Outer iteration cap")->capture_default_str();
  bench->add_option("--epsilon", opt.epsilon, "Fixed quantization threshold");
  bench->add_option("--folds", opt.folds, "Cross-validation folds")->capture_default_str();
  bench->add_option("--seed", opt.seed, "Offset added to every replicate seed");
  bench->add_option("--output", opt.output, "Report file (default: standard output)");

  auto* crossval = app.add_subcommand("crossval", "Choose the kernel bandwidth by K-fold CV");
  add_fit_flags(*crossval, opt);
  crossval->add_option("--input", opt.input, "Training CSV")->required();
  crossval->add_option("--sigma", opt.sigma, "Candidate bandwidths (default: built-in grid)")
      ->delimiter(',');
  crossval->add_option("--folds", opt.folds, "Number of folds")->capture_default_str();
  crossval->add_option("--model", opt.model, "Also train with the chosen bandwidth and save");
  crossval->add_option("--output", opt.output, "Report file (default: standard output)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  std::string command = app.get_subcommands().front()->get_name();
  std::unique_ptr<Sink> sink;
  try {
    sink = std::make_unique<Sink>(opt.output, out);
    if (command == "train") return cmd_train(opt, *sink);
    if (command == "predict") return cmd_predict(opt, *sink);
    if (command == "bench") return cmd_bench(opt, *sink, *bench);
    return cmd_crossval(opt, *sink);
  } catch (const std::exception& e) {
    err << "robust-sbl " << command << ": " << e.what() << '\n';
    const Json record = {{"type", "error"}, {"command", command}, {"message", e.what()}};
    if (sink && command != "predict") {
      sink->emit(record);
    } else {
      out << record.dump() << '\n' << std::flush;
    }
    return 1;
  }
}

}  // namespace robust_sbl
