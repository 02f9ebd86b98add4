#pragma once

#include <memory>
#include <mutex>
#include <random>
#include <string>

#include "remtime/gdtspn.hpp"
#include "remtime/knn.hpp"

namespace remtime {

enum class Method {
  GdtspnKnn,
  Gdtspn,
  Average,
  KnnAverage10,
  KnnAverage100,
};

/// Stable identifier used in reports and seeds.
const char* method_name(Method m);
Method method_from_name(const std::string& name);
std::vector<Method> all_methods();

struct PredictionDiagnostics {
  std::size_t matched_neighbors = 0;
  std::size_t random_fill_neighbors = 0;
  int aborted_runs = 0;
  bool replay_ok = true;
};

struct Prediction {
  bool ok = false;
  double remaining_ms = 0.0;  // >= 0 when ok
  Method method = Method::Average;
  PredictionDiagnostics diagnostics;
  std::string failure;
};

/// Full-training-log model shared across predictions; discovery and
/// enrichment run once. The counter exists so callers can observe cache
/// hits.
class ModelCache {
 public:
  const Gdtspn& get_or_build(const EventLog& train);
  int discovery_count() const { return discovery_count_; }

 private:
  std::mutex mutex_;
  std::shared_ptr<const Gdtspn> model_;
  int discovery_count_ = 0;
};

/// Model discovered and enriched from the k neighbors' full traces
/// (assembled in ascending training order, so k = |train| coincides with
/// the whole-log model).
struct KnnModel {
  Gdtspn model;
  NeighborSelection neighbors;
};

KnnModel build_gdtspn_knn_model(const EventLog& train, const Trace& prefix, std::size_t k,
                                std::mt19937_64& rng);

/// kNN candidate selection, discovery and enrichment on the k neighbor
/// traces, prefix replay, Monte Carlo estimate. Replay failures and
/// majority-abort simulations yield ok = false with the failure recorded.
Prediction predict_gdtspn_knn(const EventLog& train, const Trace& prefix, Millis t0,
                              std::size_t k, const SimulationConfig& cfg, std::mt19937_64& rng);

/// The original whole-log pipeline backed by the shared model cache.
Prediction predict_gdtspn(const EventLog& train, const Trace& prefix, Millis t0,
                          const SimulationConfig& cfg, ModelCache& cache);

/// Mean training-case duration minus elapsed time, floored at zero.
/// With subtract_elapsed = false the raw mean is returned instead.
Prediction benchmark_average(const EventLog& train, Millis elapsed_ms,
                             bool subtract_elapsed = true);

/// Mean duration of the k nearest neighbors minus elapsed time, floored
/// at zero.
Prediction benchmark_knn_average(const EventLog& train, const Trace& prefix, Millis t0,
                                 std::size_t k, std::mt19937_64& rng,
                                 bool subtract_elapsed = true);

}  // namespace remtime
