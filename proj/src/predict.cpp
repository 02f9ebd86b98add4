#include "remtime/predict.hpp"

#include <algorithm>

#include "remtime/discovery.hpp"

namespace remtime {

const char* method_name(Method m) {
  switch (m) {
    case Method::GdtspnKnn: return "gdtspn_knn";
    case Method::Gdtspn: return "gdtspn";
    case Method::Average: return "average";
    case Method::KnnAverage10: return "knn_average_10";
    case Method::KnnAverage100: return "knn_average_100";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  for (Method m : all_methods()) {
    if (name == method_name(m)) return m;
  }
  throw std::invalid_argument("unknown method '" + name + "'");
}

std::vector<Method> all_methods() {
  return {Method::GdtspnKnn, Method::Gdtspn, Method::Average, Method::KnnAverage10,
          Method::KnnAverage100};
}

const Gdtspn& ModelCache::get_or_build(const EventLog& train) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (!model_) {
    const ProcessTree tree = inductive_miner(train);
    auto model = std::make_shared<Gdtspn>(enrich(tree_to_petri(tree), train));
    ++discovery_count_;
    model_ = std::move(model);
  }
  return *model_;
}

namespace {

Prediction failed(Method method, std::string why, PredictionDiagnostics diag = {}) {
  Prediction p;
  p.ok = false;
  p.method = method;
  p.diagnostics = diag;
  p.failure = std::move(why);
  return p;
}

Prediction estimate_with_model(Method method, const Gdtspn& model, const Trace& prefix,
                               Millis t0, const SimulationConfig& cfg,
                               PredictionDiagnostics diag) {
  ReplayState state;
  try {
    state = replay(model.net, prefix).state;
  } catch (const ReplayError& e) {
    diag.replay_ok = false;
    return failed(method, std::string("prefix replay failed: ") + e.what(), diag);
  }
  const MonteCarloEstimate estimate = predict_remaining(model, state, t0, cfg);
  diag.aborted_runs = estimate.aborted_runs;
  if (!estimate.ok()) {
    return failed(method,
                  "simulation aborted in " + std::to_string(estimate.aborted_runs) + " of " +
                      std::to_string(cfg.n_runs) + " runs",
                  diag);
  }
  Prediction p;
  p.ok = true;
  p.method = method;
  p.remaining_ms = estimate.remaining_ms;
  p.diagnostics = diag;
  return p;
}

}  // namespace

KnnModel build_gdtspn_knn_model(const EventLog& train, const Trace& prefix, std::size_t k,
                                std::mt19937_64& rng) {
  KnnModel result;
  result.neighbors = select_neighbors(train, prefix, k, rng);

  // The model is built from the neighbors' FULL traces, in training order
  // so that k = |train| coincides with the whole-log pipeline.
  std::vector<std::size_t> ordered = result.neighbors.indices;
  std::sort(ordered.begin(), ordered.end());
  std::vector<Trace> traces;
  traces.reserve(ordered.size());
  for (std::size_t i : ordered) traces.push_back(train[i]);
  EventLog sublog = EventLog::from_traces(std::move(traces));

  const ProcessTree tree = inductive_miner(sublog);
  result.model = enrich(tree_to_petri(tree), sublog);
  return result;
}

Prediction predict_gdtspn_knn(const EventLog& train, const Trace& prefix, Millis t0,
                              std::size_t k, const SimulationConfig& cfg,
                              std::mt19937_64& rng) {
  KnnModel knn;
  try {
    knn = build_gdtspn_knn_model(train, prefix, k, rng);
  } catch (const std::invalid_argument& e) {
    return failed(Method::GdtspnKnn, e.what());
  }
  PredictionDiagnostics diag;
  diag.matched_neighbors = knn.neighbors.matched_count;
  diag.random_fill_neighbors = knn.neighbors.random_fill_count;
  return estimate_with_model(Method::GdtspnKnn, knn.model, prefix, t0, cfg, diag);
}

Prediction predict_gdtspn(const EventLog& train, const Trace& prefix, Millis t0,
                          const SimulationConfig& cfg, ModelCache& cache) {
  const Gdtspn& model = cache.get_or_build(train);
  return estimate_with_model(Method::Gdtspn, model, prefix, t0, cfg, {});
}

namespace {

Prediction from_duration(Method method, double remaining_ms, PredictionDiagnostics diag = {}) {
  Prediction p;
  p.ok = true;
  p.method = method;
  p.remaining_ms = std::max(remaining_ms, 0.0);
  p.diagnostics = diag;
  return p;
}

}  // namespace

Prediction benchmark_average(const EventLog& train, Millis elapsed_ms, bool subtract_elapsed) {
  const double mean = static_cast<double>(mean_case_duration_ms(train));
  return from_duration(Method::Average,
                       subtract_elapsed ? mean - static_cast<double>(elapsed_ms) : mean);
}

Prediction benchmark_knn_average(const EventLog& train, const Trace& prefix, Millis t0,
                                 std::size_t k, std::mt19937_64& rng, bool subtract_elapsed) {
  const Method method = k == 10 ? Method::KnnAverage10 : Method::KnnAverage100;
  NeighborSelection neighbors;
  try {
    neighbors = select_neighbors(train, prefix, k, rng);
  } catch (const std::invalid_argument& e) {
    return failed(method, e.what());
  }
  PredictionDiagnostics diag;
  diag.matched_neighbors = neighbors.matched_count;
  diag.random_fill_neighbors = neighbors.random_fill_count;
  double total = 0.0;
  for (std::size_t i : neighbors.indices) {
    total += static_cast<double>(train[i].duration_ms());
  }
  const double mean = total / static_cast<double>(neighbors.indices.size());
  const double elapsed = static_cast<double>(t0 - prefix.start_ms());
  return from_duration(method, subtract_elapsed ? mean - elapsed : mean, diag);
}

}  // namespace remtime
