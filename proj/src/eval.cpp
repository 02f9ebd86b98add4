#include "remtime/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

namespace remtime {

Millis iteration_time(Millis start, int iteration, Millis mean_dur, int N) {
  return start + (static_cast<Millis>(iteration) * mean_dur) / N;
}

namespace {

struct PredictionPoint {
  std::size_t trace_index;
  int iteration;
  Millis t0;
  double actual_remaining_ms;
};

struct PointResult {
  // Aligned with cfg.methods; NaN error marks a failed prediction.
  std::vector<double> errors_ms;
};

std::uint64_t point_seed(const ExperimentConfig& cfg, const std::string& case_id,
                         int iteration, Method method) {
  const std::uint64_t stream =
      derive_seed(cfg.seed, fnv1a64(case_id), static_cast<std::uint64_t>(iteration));
  return derive_seed(stream, fnv1a64(method_name(method)));
}

}  // namespace

std::vector<IterationMetrics> run_experiment(const EventLog& train, const EventLog& test,
                                             const ExperimentConfig& cfg,
                                             const ProgressFn& progress) {
  if (train.empty() || test.empty()) {
    throw std::invalid_argument("run_experiment: train and test must be non-empty");
  }
  if (cfg.N < 1) throw std::invalid_argument("run_experiment: N must be >= 1");

  const Millis mean_dur = mean_case_duration_ms(train);
  const std::size_t k_knn = std::min(cfg.k, train.size());
  const std::size_t k10 = std::min<std::size_t>(10, train.size());
  const std::size_t k100 = std::min<std::size_t>(100, train.size());

  const bool wants_gdtspn =
      std::find(cfg.methods.begin(), cfg.methods.end(), Method::Gdtspn) != cfg.methods.end();
  ModelCache cache;
  if (wants_gdtspn) cache.get_or_build(train);  // built once, read-only afterwards

  std::vector<PredictionPoint> points;
  for (std::size_t ti = 0; ti < test.size(); ++ti) {
    const Trace& trace = test[ti];
    for (int i = 1; i <= cfg.iterations(); ++i) {
      const Millis t0 = iteration_time(trace.start_ms(), i, mean_dur, cfg.N);
      if (trace.end_ms() > t0) {
        points.push_back(PredictionPoint{ti, i, t0,
                                         static_cast<double>(trace.end_ms() - t0)});
      }
    }
  }

  std::vector<PointResult> results(points.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t index = next.fetch_add(1);
      if (index >= points.size()) return;
      const PredictionPoint& point = points[index];
      const Trace& trace = test[point.trace_index];
      PointResult& result = results[index];
      result.errors_ms.assign(cfg.methods.size(), std::nan(""));
      try {
        const Trace prefix = prefix_at(trace, point.t0);
        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
          const Method method = cfg.methods[mi];
          const std::uint64_t seed = point_seed(cfg, trace.case_id, point.iteration, method);
          SimulationConfig sim{cfg.n_runs, cfg.max_firings_per_run, seed};
          std::mt19937_64 rng(derive_seed(seed, 1));
          Prediction prediction;
          switch (method) {
            case Method::GdtspnKnn:
              prediction = predict_gdtspn_knn(train, prefix, point.t0, k_knn, sim, rng);
              break;
            case Method::Gdtspn:
              prediction = predict_gdtspn(train, prefix, point.t0, sim, cache);
              break;
            case Method::Average:
              prediction = benchmark_average(train, point.t0 - trace.start_ms(),
                                             cfg.subtract_elapsed);
              break;
            case Method::KnnAverage10:
              prediction = benchmark_knn_average(train, prefix, point.t0, k10, rng,
                                                 cfg.subtract_elapsed);
              break;
            case Method::KnnAverage100:
              prediction = benchmark_knn_average(train, prefix, point.t0, k100, rng,
                                                 cfg.subtract_elapsed);
              break;
          }
          if (prediction.ok) {
            result.errors_ms[mi] = prediction.remaining_ms - point.actual_remaining_ms;
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
      const std::size_t completed = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(completed, points.size());
      }
    }
  };

  int jobs = cfg.jobs > 0 ? cfg.jobs : static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Deterministic reduction ordered by (iteration, method), summing in
  // point order.
  std::vector<IterationMetrics> metrics(static_cast<std::size_t>(cfg.iterations()));
  for (int i = 0; i < cfg.iterations(); ++i) {
    metrics[static_cast<std::size_t>(i)].iteration = i + 1;
    for (Method m : cfg.methods) {
      metrics[static_cast<std::size_t>(i)].per_method.emplace_back(m, MethodMetrics{});
    }
  }
  std::vector<double> sum_err(cfg.methods.size());
  std::vector<double> sum_sq(cfg.methods.size());
  for (int iter = 1; iter <= cfg.iterations(); ++iter) {
    IterationMetrics& im = metrics[static_cast<std::size_t>(iter - 1)];
    std::fill(sum_err.begin(), sum_err.end(), 0.0);
    std::fill(sum_sq.begin(), sum_sq.end(), 0.0);
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
      if (points[pi].iteration != iter) continue;
      ++im.active_traces;
      for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const double err = results[pi].errors_ms[mi];
        if (std::isnan(err)) {
          ++im.per_method[mi].second.failures;
        } else {
          ++im.per_method[mi].second.successes;
          sum_err[mi] += err;
          sum_sq[mi] += err * err;
        }
      }
    }
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      MethodMetrics& mm = im.per_method[mi].second;
      if (mm.successes > 0) {
        mm.mean_error_ms = sum_err[mi] / static_cast<double>(mm.successes);
        mm.rmse_ms = std::sqrt(sum_sq[mi] / static_cast<double>(mm.successes));
      }
    }
  }
  return metrics;
}

// --- reports ---

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<ReportRow> report_rows(const std::vector<IterationMetrics>& metrics) {
  std::vector<ReportRow> rows;
  for (const auto& im : metrics) {
    for (const auto& [method, mm] : im.per_method) {
      rows.push_back(ReportRow{im.iteration, method_name(method),
                               ms_to_seconds(mm.mean_error_ms), ms_to_seconds(mm.rmse_ms),
                               im.active_traces, mm.failures});
    }
  }
  return rows;
}

std::string write_report_csv(const std::vector<IterationMetrics>& metrics) {
  std::ostringstream out;
  out << "iteration,method,mean_error_s,rmse_s,active_traces,failures\n";
  for (const ReportRow& row : report_rows(metrics)) {
    out << row.iteration << ',' << row.method << ',' << format_double(row.mean_error_s) << ','
        << format_double(row.rmse_s) << ',' << row.active_traces << ',' << row.failures
        << '\n';
  }
  return out.str();
}

std::string write_report_json(const std::vector<IterationMetrics>& metrics) {
  std::ostringstream out;
  out << "[\n";
  bool first = true;
  for (const ReportRow& row : report_rows(metrics)) {
    if (!first) out << ",\n";
    first = false;
    out << "  {\"iteration\": " << row.iteration << ", \"method\": \"" << row.method
        << "\", \"mean_error_s\": " << format_double(row.mean_error_s)
        << ", \"rmse_s\": " << format_double(row.rmse_s)
        << ", \"active_traces\": " << row.active_traces << ", \"failures\": " << row.failures
        << "}";
  }
  out << "\n]\n";
  return out.str();
}

std::vector<ReportRow> parse_report_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty report");
  if (line != "iteration,method,mean_error_s,rmse_s,active_traces,failures") {
    throw ParseError("unexpected report header: " + line);
  }
  std::vector<ReportRow> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    ReportRow row;
    std::string field;
    try {
      std::getline(fields, field, ',');
      row.iteration = std::stoi(field);
      std::getline(fields, row.method, ',');
      std::getline(fields, field, ',');
      row.mean_error_s = std::stod(field);
      std::getline(fields, field, ',');
      row.rmse_s = std::stod(field);
      std::getline(fields, field, ',');
      row.active_traces = static_cast<std::size_t>(std::stoull(field));
      std::getline(fields, field, ',');
      row.failures = static_cast<std::size_t>(std::stoull(field));
    } catch (const std::exception& e) {
      throw ParseError(std::string("bad report row: ") + e.what(), line_no);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::pair<std::string, std::string>> plot_series(
    const std::vector<IterationMetrics>& metrics) {
  auto table = [&](auto&& value_of) {
    std::ostringstream out;
    out << "iteration";
    if (!metrics.empty()) {
      for (const auto& [method, mm] : metrics.front().per_method) {
        out << ',' << method_name(method);
      }
    }
    out << '\n';
    for (const auto& im : metrics) {
      out << im.iteration;
      for (const auto& [method, mm] : im.per_method) out << ',' << format_double(value_of(mm));
      out << '\n';
    }
    return out.str();
  };
  return {
      {"mean_error_s", table([](const MethodMetrics& m) { return ms_to_seconds(m.mean_error_ms); })},
      {"rmse_s", table([](const MethodMetrics& m) { return ms_to_seconds(m.rmse_ms); })},
      {"active_traces",
       table([](const MethodMetrics& m) { return static_cast<double>(m.successes); })},
  };
}

}  // namespace remtime
