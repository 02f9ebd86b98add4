#include <doctest.h>

#include <random>

#include "remtime/knn.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace remtime;
using synthetic::make_trace;

TEST_CASE("times-to-occurrence featurization") {
  const std::vector<std::string> voc = {"A", "B", "C"};
  SUBCASE("direct application") {
    const FeatureVector fv = times_to_occurrence(make_trace("c", {{"A", 0}, {"B", 60'000}}), voc);
    CHECK(fv.values == std::vector<double>{0.0, 60'000.0, -1.0});
  }
  SUBCASE("loops keep the last occurrence") {
    const FeatureVector fv = times_to_occurrence(
        make_trace("c", {{"A", 0}, {"B", 10'000}, {"A", 25'000}}), {"A", "B"});
    CHECK(fv.values == std::vector<double>{25'000.0, 10'000.0});
  }
  SUBCASE("no vocabulary overlap means all sentinels") {
    const FeatureVector fv = times_to_occurrence(make_trace("c", {{"Z", 0}}), voc);
    CHECK(fv.values == std::vector<double>{-1.0, -1.0, -1.0});
  }
}

TEST_CASE("same-route prefix matching") {
  const Trace prefix = make_trace("p", {{"A", 0}, {"B", 10}});
  CHECK(same_route(make_trace("t", {{"A", 5}, {"B", 9}, {"C", 12}}), prefix));
  CHECK_FALSE(same_route(make_trace("t", {{"A", 5}, {"C", 9}, {"B", 12}}), prefix));
  CHECK(same_route(make_trace("t", {{"X", 0}}), make_trace("p", {})));  // vacuous
  CHECK_FALSE(same_route(make_trace("t", {{"A", 0}}), prefix));         // prefix longer
}

TEST_CASE("candidate construction and the penalty vector") {
  const Trace prefix = make_trace("p", {{"A", 0}});
  SUBCASE("all matching leaves the mask clear") {
    const EventLog train = EventLog::from_traces({
        make_trace("t1", {{"A", 0}, {"B", 100'000}}),
        make_trace("t2", {{"A", 0}, {"B", 200'000}}),
    });
    const CandidateSet set = build_candidates(train, prefix);
    CHECK(set.penalty_mask == std::vector<bool>{false, false});
    CHECK(set.max_tto == 200'000.0);
  }
  SUBCASE("non-matching traces get the constant vector") {
    const EventLog train = EventLog::from_traces({
        make_trace("t1", {{"A", 0}, {"B", 300'000}}),
        make_trace("t2", {{"B", 0}, {"A", 50'000}}),
    });
    const CandidateSet set = build_candidates(train, prefix);
    CHECK(set.max_tto == 300'000.0);
    CHECK(set.penalty_mask == std::vector<bool>{false, true});
    CHECK(set.vectors[1].values == std::vector<double>{300'000.0, 300'000.0});
  }
  SUBCASE("nothing matching penalizes everyone") {
    const EventLog train = EventLog::from_traces({
        make_trace("t1", {{"B", 0}}),
        make_trace("t2", {{"B", 0}, {"A", 10}}),
    });
    const CandidateSet set = build_candidates(train, prefix);
    CHECK(set.penalty_mask == std::vector<bool>{true, true});
  }
}

TEST_CASE("neighbor selection on a hand-computed example") {
  // Used dimension: A only. Query TTO(A) = 10s; matching traces at 10s and
  // 50s; max_tto = 100s from the B column. Normalized distances: 0 and 0.4.
  const EventLog train = EventLog::from_traces({
      make_trace("t1", {{"A", 0}, {"A", 10'000}, {"B", 100'000}}),
      make_trace("t2", {{"A", 0}, {"A", 50'000}, {"B", 80'000}}),
  });
  const Trace prefix = make_trace("p", {{"A", 0}, {"A", 10'000}});
  std::mt19937_64 rng(1);
  const NeighborSelection selection = select_neighbors(train, prefix, 2, rng);
  REQUIRE(selection.indices == std::vector<std::size_t>{0, 1});
  CHECK(selection.distances[0] == 0.0);
  CHECK(selection.distances[1] == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(selection.matched_count == 2);
  CHECK(selection.random_fill_count == 0);
}

TEST_CASE("selection edge cases") {
  const EventLog train = EventLog::from_traces({
      make_trace("t1", {{"A", 0}, {"B", 10'000}}),
      make_trace("t2", {{"A", 0}, {"B", 20'000}}),
      make_trace("t3", {{"A", 0}, {"B", 30'000}}),
      make_trace("t4", {{"B", 0}, {"A", 10'000}}),
      make_trace("t5", {{"B", 0}, {"A", 20'000}}),
  });
  const Trace prefix = make_trace("p", {{"A", 0}, {"B", 12'000}});
  std::mt19937_64 rng(3);

  SUBCASE("k larger than the log is an error") {
    CHECK_THROWS_AS(select_neighbors(train, prefix, 6, rng), std::invalid_argument);
    CHECK_THROWS_AS(select_neighbors(train, prefix, 0, rng), std::invalid_argument);
  }
  SUBCASE("k = |train| with all matching returns the whole log by distance") {
    const EventLog all_match = EventLog::from_traces({
        make_trace("t1", {{"A", 0}, {"B", 10'000}}),
        make_trace("t2", {{"A", 0}, {"B", 20'000}}),
        make_trace("t3", {{"A", 0}, {"B", 30'000}}),
    });
    const NeighborSelection selection = select_neighbors(all_match, prefix, 3, rng);
    CHECK(selection.indices == std::vector<std::size_t>{0, 1, 2});
    CHECK(selection.matched_count == 3);
    CHECK(std::is_sorted(selection.distances.begin(), selection.distances.end()));
  }
  SUBCASE("three matching, k = 5: the rest is random fill") {
    const NeighborSelection selection = select_neighbors(train, prefix, 5, rng);
    CHECK(selection.matched_count == 3);
    CHECK(selection.random_fill_count == 2);
    // Fills come from the penalized traces {3, 4}.
    CHECK(selection.indices[3] == 3);
    CHECK(selection.indices[4] == 4);
    CHECK(selection.distances[3] == selection.distances[4]);
  }
}

TEST_CASE("selection equals the brute-force oracle on random logs") {
  std::mt19937_64 gen(2025);
  const std::vector<std::string> alphabet = {"A", "B", "C", "D", "E", "F", "G", "H"};
  for (int round = 0; round < 10; ++round) {
    std::vector<Trace> traces;
    const std::size_t n = 20 + gen() % 180;
    for (std::size_t i = 0; i < n; ++i) {
      Trace trace;
      trace.case_id = "c" + std::to_string(i);
      Millis at = static_cast<Millis>(gen() % 1000) * 1000;
      const std::size_t len = 1 + gen() % 8;
      for (std::size_t e = 0; e < len; ++e) {
        at += static_cast<Millis>(gen() % 50'000);
        trace.events.push_back(Event{alphabet[gen() % alphabet.size()], at});
      }
      traces.push_back(std::move(trace));
    }
    const EventLog train = EventLog::from_traces(std::move(traces));

    // Query prefix: sampled from the same process.
    Trace prefix;
    prefix.case_id = "q";
    Millis at = 0;
    const std::size_t len = 1 + gen() % 4;
    for (std::size_t e = 0; e < len; ++e) {
      at += static_cast<Millis>(gen() % 50'000);
      prefix.events.push_back(Event{alphabet[gen() % alphabet.size()], at});
    }

    for (std::size_t k : {std::size_t{1}, std::size_t{5}, std::size_t{100}}) {
      if (k > train.size()) continue;
      const std::uint64_t seed = gen();
      std::mt19937_64 rng_impl(seed), rng_oracle(seed);
      const NeighborSelection got = select_neighbors(train, prefix, k, rng_impl);
      const NeighborSelection want = oracles::brute_force_neighbors(train, prefix, k, rng_oracle);
      CHECK(got.indices == want.indices);
      CHECK(got.distances == want.distances);
      CHECK(got.matched_count == want.matched_count);
      CHECK(got.random_fill_count == want.random_fill_count);
    }
  }
}

TEST_CASE("neighbor order is invariant under uniform time rescaling") {
  std::mt19937_64 gen(4);
  std::vector<Trace> traces, scaled_traces;
  for (int i = 0; i < 40; ++i) {
    Trace trace, scaled;
    trace.case_id = scaled.case_id = "c" + std::to_string(i);
    Millis at = 0;
    const std::size_t len = 2 + gen() % 5;
    for (std::size_t e = 0; e < len; ++e) {
      at += static_cast<Millis>(gen() % 40'000);
      const std::string activity(1, static_cast<char>('A' + gen() % 4));
      trace.events.push_back(Event{activity, at});
      scaled.events.push_back(Event{activity, at * 2});
    }
    traces.push_back(std::move(trace));
    scaled_traces.push_back(std::move(scaled));
  }
  const EventLog train = EventLog::from_traces(std::move(traces));
  const EventLog scaled_train = EventLog::from_traces(std::move(scaled_traces));

  const Trace prefix = make_trace("p", {{"A", 0}, {"B", 15'000}});
  const Trace scaled_prefix = make_trace("p", {{"A", 0}, {"B", 30'000}});

  std::mt19937_64 r1(9), r2(9);
  const NeighborSelection base = select_neighbors(train, prefix, 10, r1);
  const NeighborSelection scaled = select_neighbors(scaled_train, scaled_prefix, 10, r2);
  CHECK(base.indices == scaled.indices);
  // Doubling every timestamp doubles numerator and denominator of each
  // normalized coordinate, so distances are bit-identical.
  CHECK(base.distances == scaled.distances);
}

TEST_CASE("selection is deterministic for a fixed seed, including fills") {
  const EventLog train = EventLog::from_traces({
      make_trace("t1", {{"A", 0}, {"B", 10'000}}),
      make_trace("t2", {{"B", 0}}),
      make_trace("t3", {{"C", 0}}),
      make_trace("t4", {{"D", 0}}),
  });
  const Trace prefix = make_trace("p", {{"A", 0}});
  std::mt19937_64 r1(42), r2(42);
  const NeighborSelection a = select_neighbors(train, prefix, 3, r1);
  const NeighborSelection b = select_neighbors(train, prefix, 3, r2);
  CHECK(a.indices == b.indices);
  CHECK(a.matched_count == 1);
  CHECK(a.random_fill_count == 2);
}
