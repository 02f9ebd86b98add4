#pragma once

#include <random>
#include <vector>

#include "remtime/event_log.hpp"

namespace remtime {

/// Times-to-occurrence vector over a fixed vocabulary: entry i is the time
/// (milliseconds) from trace start to the LAST occurrence of vocabulary
/// activity i, or exactly -1 when the activity is absent.
struct FeatureVector {
  std::vector<double> values;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

FeatureVector times_to_occurrence(const Trace& trace, const std::vector<std::string>& vocabulary);

/// True iff the activity sequence of `prefix` equals the first
/// |prefix| activity labels of `train_trace`.
bool same_route(const Trace& train_trace, const Trace& prefix);

/// Feature vectors for every training trace, with non-same-route traces
/// replaced by the maximal-distance penalty vector [max_tto, ...].
struct CandidateSet {
  std::vector<FeatureVector> vectors;
  std::vector<bool> penalty_mask;
  double max_tto = 0.0;  // maximum non-negative entry over all training vectors
};

CandidateSet build_candidates(const EventLog& train, const Trace& prefix);

struct NeighborSelection {
  std::vector<std::size_t> indices;  // ascending distance, ties by lower index
  std::vector<double> distances;
  std::size_t matched_count = 0;
  std::size_t random_fill_count = 0;
};

/// Exact k-nearest-neighbor selection among same-route training traces.
///
/// Distances are Euclidean over the dimensions where the prefix vector is
/// >= 0, each dimension min-max normalized with min 0 and max `max_tto`
/// (the query additionally clamped into [0, 1]). Same-route traces are
/// ranked by (distance, index); when fewer than k exist, all of them are
/// taken and the remainder is drawn uniformly without replacement from the
/// penalized traces. The draw is a partial Fisher-Yates shuffle over the
/// penalized indices in ascending order, using
/// uniform_int_distribution<size_t>(i, n-1) at step i; drawn indices are
/// then sorted ascending and assigned the penalty-vector distance.
NeighborSelection select_neighbors(const EventLog& train, const Trace& prefix, std::size_t k,
                                   std::mt19937_64& rng);

}  // namespace remtime
