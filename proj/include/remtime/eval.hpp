#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "remtime/predict.hpp"

namespace remtime {

struct ExperimentConfig {
  int N = 20;  // the Nth iteration lands exactly meanDur after case start
  std::size_t k = 100;
  int n_runs = 500;
  int max_firings_per_run = 10'000;
  std::uint64_t seed = 0;
  std::vector<Method> methods = all_methods();
  int jobs = 0;  // 0 = hardware concurrency
  bool subtract_elapsed = true;

  int iterations() const { return 2 * N; }
};

struct MethodMetrics {
  double mean_error_ms = 0.0;  // signed: predicted - actual
  double rmse_ms = 0.0;
  std::size_t failures = 0;
  std::size_t successes = 0;
};

struct IterationMetrics {
  int iteration = 0;  // 1-based
  std::size_t active_traces = 0;
  std::vector<std::pair<Method, MethodMetrics>> per_method;  // config method order
};

/// Prediction time of iteration i for a case starting at `start`:
/// start + i * meanDur / N (integer milliseconds, truncated), so iteration
/// N falls exactly meanDur after the start.
Millis iteration_time(Millis start, int iteration, Millis mean_dur, int N);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs the periodic-prediction protocol: for every test trace and
/// iteration i in 1..2N with trace end strictly after t0, each enabled
/// method predicts on prefix_at(trace, t0); signed errors are aggregated
/// per (iteration, method). Per-prediction random streams are derived from
/// (seed, case id, iteration, method), so results do not depend on `jobs`.
std::vector<IterationMetrics> run_experiment(const EventLog& train, const EventLog& test,
                                             const ExperimentConfig& cfg,
                                             const ProgressFn& progress = {});

/// CSV report: iteration,method,mean_error_s,rmse_s,active_traces,failures.
/// Doubles are written with enough digits to round-trip exactly.
std::string write_report_csv(const std::vector<IterationMetrics>& metrics);
std::string write_report_json(const std::vector<IterationMetrics>& metrics);

struct ReportRow {
  int iteration;
  std::string method;
  double mean_error_s;
  double rmse_s;
  std::size_t active_traces;
  std::size_t failures;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

std::vector<ReportRow> parse_report_csv(const std::string& csv);
std::vector<ReportRow> report_rows(const std::vector<IterationMetrics>& metrics);

/// Per-metric wide tables (iteration column plus one column per method),
/// readied for plotting tools. Returns {metric name, csv text} pairs.
std::vector<std::pair<std::string, std::string>> plot_series(
    const std::vector<IterationMetrics>& metrics);

}  // namespace remtime
