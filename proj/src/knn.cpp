#include "remtime/knn.hpp"

#include <algorithm>
#include <cmath>

namespace remtime {

FeatureVector times_to_occurrence(const Trace& trace,
                                  const std::vector<std::string>& vocabulary) {
  FeatureVector fv;
  fv.values.assign(vocabulary.size(), -1.0);
  if (trace.events.empty()) return fv;
  const Millis start = trace.start_ms();
  for (const auto& event : trace.events) {
    const auto it = std::find(vocabulary.begin(), vocabulary.end(), event.activity);
    if (it == vocabulary.end()) continue;  // activities outside the vocabulary are ignored
    // Later occurrences overwrite: loops keep the final repetition.
    fv.values[static_cast<std::size_t>(it - vocabulary.begin())] =
        static_cast<double>(event.timestamp - start);
  }
  return fv;
}

bool same_route(const Trace& train_trace, const Trace& prefix) {
  if (prefix.events.size() > train_trace.events.size()) return false;
  for (std::size_t i = 0; i < prefix.events.size(); ++i) {
    if (train_trace.events[i].activity != prefix.events[i].activity) return false;
  }
  return true;
}

CandidateSet build_candidates(const EventLog& train, const Trace& prefix) {
  if (train.empty()) throw std::invalid_argument("build_candidates: empty training log");
  CandidateSet set;
  set.vectors.reserve(train.size());
  set.penalty_mask.reserve(train.size());
  for (const auto& trace : train.traces()) {
    FeatureVector fv = times_to_occurrence(trace, train.vocabulary());
    for (double v : fv.values) {
      if (v >= 0.0) set.max_tto = std::max(set.max_tto, v);
    }
    set.vectors.push_back(std::move(fv));
    set.penalty_mask.push_back(!same_route(trace, prefix));
  }
  for (std::size_t i = 0; i < set.vectors.size(); ++i) {
    if (set.penalty_mask[i]) {
      set.vectors[i].values.assign(train.vocabulary().size(), set.max_tto);
    }
  }
  return set;
}

NeighborSelection select_neighbors(const EventLog& train, const Trace& prefix, std::size_t k,
                                   std::mt19937_64& rng) {
  if (k < 1 || k > train.size()) {
    throw std::invalid_argument("select_neighbors: k must be in [1, #training traces]");
  }
  const CandidateSet set = build_candidates(train, prefix);
  const FeatureVector query = times_to_occurrence(prefix, train.vocabulary());

  std::vector<std::size_t> used_dims;
  for (std::size_t d = 0; d < query.values.size(); ++d) {
    if (query.values[d] >= 0.0) used_dims.push_back(d);
  }
  const double scale = set.max_tto > 0.0 ? 1.0 / set.max_tto : 0.0;
  std::vector<double> normalized_query(used_dims.size());
  for (std::size_t j = 0; j < used_dims.size(); ++j) {
    normalized_query[j] = std::clamp(query.values[used_dims[j]] * scale, 0.0, 1.0);
  }

  auto distance_to = [&](const FeatureVector& fv) {
    double ss = 0.0;
    for (std::size_t j = 0; j < used_dims.size(); ++j) {
      const double diff = normalized_query[j] - fv.values[used_dims[j]] * scale;
      ss += diff * diff;
    }
    return std::sqrt(ss);
  };

  // The penalty vector is shared by all penalized traces, so its distance
  // is computed once.
  double penalty_distance = 0.0;
  {
    double ss = 0.0;
    for (double q : normalized_query) {
      const double diff = q - set.max_tto * scale;
      ss += diff * diff;
    }
    penalty_distance = std::sqrt(ss);
  }

  std::vector<std::pair<double, std::size_t>> matched;  // (distance, index)
  std::vector<std::size_t> penalized;
  for (std::size_t i = 0; i < set.vectors.size(); ++i) {
    if (set.penalty_mask[i]) {
      penalized.push_back(i);
    } else {
      matched.emplace_back(distance_to(set.vectors[i]), i);
    }
  }
  std::sort(matched.begin(), matched.end());

  NeighborSelection selection;
  const std::size_t take = std::min(k, matched.size());
  for (std::size_t i = 0; i < take; ++i) {
    selection.indices.push_back(matched[i].second);
    selection.distances.push_back(matched[i].first);
  }
  selection.matched_count = take;

  if (take < k) {
    const std::size_t fill = k - take;
    for (std::size_t i = 0; i < fill; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, penalized.size() - 1);
      std::swap(penalized[i], penalized[pick(rng)]);
    }
    std::sort(penalized.begin(), penalized.begin() + static_cast<std::ptrdiff_t>(fill));
    for (std::size_t i = 0; i < fill; ++i) {
      selection.indices.push_back(penalized[i]);
      selection.distances.push_back(penalty_distance);
    }
    selection.random_fill_count = fill;
  }
  return selection;
}

}  // namespace remtime
