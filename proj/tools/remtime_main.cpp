#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "remtime/discovery.hpp"
#include "remtime/eval.hpp"
#include "remtime/gdtspn.hpp"
#include "remtime/predict.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using namespace remtime;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

struct CommonOptions {
  std::string case_column = "case_id";
  std::string activity_column = "activity";
  std::string timestamp_column = "timestamp";
  std::string timestamp_format = "iso8601";

  CsvMapping mapping() const {
    return CsvMapping{case_column, activity_column, timestamp_column, timestamp_format};
  }
};

void add_csv_options(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--case-column", opts.case_column, "CSV column with the case id");
  cmd->add_option("--activity-column", opts.activity_column, "CSV column with the activity");
  cmd->add_option("--timestamp-column", opts.timestamp_column, "CSV column with the timestamp");
  cmd->add_option("--timestamp-format", opts.timestamp_format,
                  "strptime format, or 'iso8601'");
}

EventLog load_or_die(const std::string& path, const CommonOptions& opts) {
  if (!std::filesystem::exists(path)) {
    throw CLI::ValidationError("input", "file not found: " + path);
  }
  return load_log(path, opts.mapping());
}

int run_stats(const std::string& path, const CommonOptions& opts, const std::string& format) {
  const EventLog log = load_or_die(path, opts);
  const LogStats stats = descriptive_stats(log);
  if (format == "csv") {
    std::printf(
        "cases,events,event_classes,max_case_length,avg_case_length,max_case_time_days,avg_case_"
        "time_days\n%zu,%zu,%zu,%zu,%.6g,%.6g,%.6g\n",
        stats.cases, stats.events, stats.event_classes, stats.max_case_length,
        stats.avg_case_length, stats.max_case_time_days, stats.avg_case_time_days);
  } else {
    std::printf("cases               %zu\n", stats.cases);
    std::printf("events              %zu\n", stats.events);
    std::printf("event classes       %zu\n", stats.event_classes);
    std::printf("max case length     %zu\n", stats.max_case_length);
    std::printf("avg case length     %.2f\n", stats.avg_case_length);
    std::printf("max case time (d)   %.2f\n", stats.max_case_time_days);
    std::printf("avg case time (d)   %.2f\n", stats.avg_case_time_days);
  }
  return 0;
}

int run_discover(const std::string& path, const CommonOptions& opts, const std::string& out_pnml,
                 const std::string& out_dot, bool check_soundness) {
  const EventLog log = load_or_die(path, opts);
  const ProcessTree tree = inductive_miner(log);
  std::cerr << "discovered tree: " << tree.to_string() << "\n";
  const PetriNet net = tree_to_petri(tree);
  ValidationOptions validation;
  validation.check_soundness = check_soundness;
  validate_workflow_net(net, validation);
  if (!out_pnml.empty()) write_file(out_pnml, write_pnml(net));
  if (!out_dot.empty()) write_file(out_dot, write_dot(net));
  if (out_pnml.empty() && out_dot.empty()) std::cout << write_pnml(net);
  return 0;
}

int run_predict(const std::string& path, const CommonOptions& opts, const std::string& case_id,
                const std::string& t0_text, std::size_t k, int n_runs, std::uint64_t seed,
                const std::string& method_text) {
  const EventLog log = load_or_die(path, opts);

  const Trace* target = nullptr;
  for (const auto& trace : log.traces()) {
    if (trace.case_id == case_id) target = &trace;
  }
  if (!target) throw CLI::ValidationError("--case", "case '" + case_id + "' not in log");

  // Offsets like "+3600s" are relative to the case start; anything else is
  // parsed as an ISO-8601 instant.
  Millis t0;
  if (!t0_text.empty() && t0_text.front() == '+') {
    std::size_t pos = 0;
    const double seconds = std::stod(t0_text.substr(1), &pos);
    t0 = target->start_ms() + seconds_to_ms(seconds);
  } else {
    t0 = parse_iso8601(t0_text);
  }

  // The running case itself must not appear among its own candidates.
  std::vector<Trace> train_traces;
  for (const auto& trace : log.traces()) {
    if (trace.case_id != case_id) train_traces.push_back(trace);
  }
  if (train_traces.empty()) throw CLI::ValidationError("--log", "no training traces left");
  const EventLog train = EventLog::from_traces(std::move(train_traces));

  const Trace prefix = prefix_at(*target, t0);
  SimulationConfig sim{n_runs, 10'000, seed};
  std::mt19937_64 rng(derive_seed(seed, fnv1a64(case_id)));

  Prediction prediction;
  const Method method = method_from_name(method_text);
  ModelCache cache;
  switch (method) {
    case Method::GdtspnKnn:
      prediction = predict_gdtspn_knn(train, prefix, t0, std::min(k, train.size()), sim, rng);
      break;
    case Method::Gdtspn:
      prediction = predict_gdtspn(train, prefix, t0, sim, cache);
      break;
    case Method::Average:
      prediction = benchmark_average(train, t0 - target->start_ms());
      break;
    case Method::KnnAverage10:
      prediction = benchmark_knn_average(train, prefix, t0,
                                         std::min<std::size_t>(10, train.size()), rng);
      break;
    case Method::KnnAverage100:
      prediction = benchmark_knn_average(train, prefix, t0,
                                         std::min<std::size_t>(100, train.size()), rng);
      break;
  }
  if (!prediction.ok) {
    std::cerr << "error: prediction failed: " << prediction.failure << "\n";
    return 1;
  }
  std::printf("case=%s method=%s t0=%s remaining_s=%.3f matched=%zu random_fill=%zu\n",
              case_id.c_str(), method_name(method), format_iso8601(t0).c_str(),
              ms_to_seconds(prediction.remaining_ms), prediction.diagnostics.matched_neighbors,
              prediction.diagnostics.random_fill_neighbors);
  return 0;
}

struct EvaluateArgs {
  std::string train_path;
  std::string test_path;
  std::string log_path;
  std::size_t split_test_count = 500;
  ExperimentConfig cfg;
  std::string out_path;
  std::string format = "csv";
  std::string plot_dir;
  std::vector<std::string> methods;
  bool quiet = false;
  bool no_subtract_elapsed = false;
};

int run_evaluate(const EvaluateArgs& args, const CommonOptions& opts) {
  EventLog train, test;
  if (!args.log_path.empty()) {
    const EventLog full = load_or_die(args.log_path, opts);
    std::tie(train, test) = split_out_of_time(full, args.split_test_count);
  } else {
    train = load_or_die(args.train_path, opts);
    test = load_or_die(args.test_path, opts);
  }
  std::cerr << "train=" << train.size() << " traces, test=" << test.size() << " traces\n";

  ExperimentConfig cfg = args.cfg;
  cfg.subtract_elapsed = !args.no_subtract_elapsed;
  if (!args.methods.empty()) {
    cfg.methods.clear();
    for (const auto& name : args.methods) cfg.methods.push_back(method_from_name(name));
  }

  ProgressFn progress;
  if (!args.quiet) {
    progress = [](std::size_t done, std::size_t total) {
      if (done % 200 == 0 || done == total) {
        std::fprintf(stderr, "progress %zu/%zu\n", done, total);
      }
    };
  }
  const std::vector<IterationMetrics> metrics = run_experiment(train, test, cfg, progress);

  const std::string report =
      args.format == "json" ? write_report_json(metrics) : write_report_csv(metrics);
  if (args.out_path.empty()) {
    std::cout << report;
  } else {
    write_file(args.out_path, report);
  }
  if (!args.plot_dir.empty()) {
    std::filesystem::create_directories(args.plot_dir);
    for (const auto& [name, csv] : plot_series(metrics)) {
      write_file(args.plot_dir + "/" + name + ".csv", csv);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"remaining-time prediction for business processes"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "key=value configuration file (flags override it)");
  app.require_subcommand(1);

  CommonOptions common;

  auto* stats_cmd = app.add_subcommand("stats", "descriptive statistics of an event log");
  std::string stats_log, stats_format = "text";
  stats_cmd->add_option("--log", stats_log, "event log (.xes/.csv, optionally .gz)")->required();
  stats_cmd->add_option("--format", stats_format, "text|csv")
      ->check(CLI::IsMember({"text", "csv"}));
  add_csv_options(stats_cmd, common);

  auto* discover_cmd = app.add_subcommand("discover", "discover a workflow net");
  std::string discover_log, discover_pnml, discover_dot;
  bool discover_check = false;
  discover_cmd->add_option("--log", discover_log, "event log")->required();
  discover_cmd->add_option("--pnml", discover_pnml, "write the net as PNML");
  discover_cmd->add_option("--dot", discover_dot, "write the net as Graphviz dot");
  discover_cmd->add_flag("--check-soundness", discover_check,
                         "run the bounded soundness check on the result");
  add_csv_options(discover_cmd, common);

  auto* predict_cmd = app.add_subcommand("predict", "predict the remaining time of one case");
  std::string predict_log, predict_case, predict_t0, predict_method = "gdtspn_knn";
  std::size_t predict_k = 100;
  int predict_n = 500;
  std::uint64_t predict_seed = 0;
  predict_cmd->add_option("--log", predict_log, "training log (the case is excluded)")
      ->required();
  predict_cmd->add_option("--case", predict_case, "case id of the running instance")->required();
  predict_cmd
      ->add_option("--t0", predict_t0,
                   "prediction time: ISO-8601, or +SECONDS after the case start")
      ->required();
  predict_cmd->add_option("-k,--k", predict_k, "number of neighbors");
  predict_cmd->add_option("-n,--n", predict_n, "simulation runs");
  predict_cmd->add_option("--seed", predict_seed, "random seed");
  predict_cmd->add_option("--method", predict_method,
                          "gdtspn_knn|gdtspn|average|knn_average_10|knn_average_100");
  add_csv_options(predict_cmd, common);

  auto* eval_cmd = app.add_subcommand("evaluate", "run the periodic prediction protocol");
  EvaluateArgs eval_args;
  eval_cmd->add_option("--train", eval_args.train_path, "training log");
  eval_cmd->add_option("--test", eval_args.test_path, "test log");
  eval_cmd->add_option("--log", eval_args.log_path,
                       "single log to split out-of-time (with --split-test-count)");
  eval_cmd->add_option("--split-test-count", eval_args.split_test_count,
                       "test traces taken from the end of the time range");
  eval_cmd->add_option("--N", eval_args.cfg.N, "iteration N lands meanDur after the start");
  eval_cmd->add_option("-k,--k", eval_args.cfg.k, "neighbors for gdtspn_knn");
  eval_cmd->add_option("-n,--n", eval_args.cfg.n_runs, "simulation runs per prediction");
  eval_cmd->add_option("--seed", eval_args.cfg.seed, "random seed");
  eval_cmd->add_option("--jobs", eval_args.cfg.jobs, "worker threads (0 = all cores)");
  eval_cmd->add_option("--methods", eval_args.methods, "subset of methods to evaluate");
  eval_cmd->add_option("--out", eval_args.out_path, "report file (stdout when omitted)");
  eval_cmd->add_option("--format", eval_args.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  eval_cmd->add_option("--plot-data", eval_args.plot_dir,
                       "directory for per-metric plottable series");
  eval_cmd->add_flag("--quiet", eval_args.quiet, "suppress progress output");
  eval_cmd->add_flag("--no-elapsed-subtract", eval_args.no_subtract_elapsed,
                     "benchmarks report raw mean durations instead of remaining time");
  add_csv_options(eval_cmd, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats_cmd->parsed()) return run_stats(stats_log, common, stats_format);
    if (discover_cmd->parsed()) {
      return run_discover(discover_log, common, discover_pnml, discover_dot, discover_check);
    }
    if (predict_cmd->parsed()) {
      return run_predict(predict_log, common, predict_case, predict_t0, predict_k, predict_n,
                         predict_seed, predict_method);
    }
    if (eval_cmd->parsed()) {
      if (eval_args.log_path.empty() &&
          (eval_args.train_path.empty() || eval_args.test_path.empty())) {
        std::cerr << "error: evaluate needs --train/--test or --log\n";
        return 2;
      }
      return run_evaluate(eval_args, common);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
