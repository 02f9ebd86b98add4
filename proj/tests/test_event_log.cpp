#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "remtime/event_log.hpp"
#include "remtime/gzip.hpp"
#include "support/synthetic.hpp"

using namespace remtime;
using synthetic::make_trace;

namespace {

const char* kMinimalXes = R"(<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0">
  <trace>
    <string key="concept:name" value="case1"/>
    <event>
      <string key="concept:name" value="A"/>
      <date key="time:timestamp" value="1970-01-01T00:00:00.000+00:00"/>
    </event>
    <event>
      <string key="concept:name" value="B"/>
      <date key="time:timestamp" value="1970-01-01T00:01:00.000+00:00"/>
    </event>
  </trace>
</log>
)";

}  // namespace

TEST_CASE("minimal XES parses to one trace with vocabulary [A, B]") {
  const EventLog log = parse_xes(kMinimalXes);
  REQUIRE(log.size() == 1);
  CHECK(log[0].case_id == "case1");
  REQUIRE(log[0].size() == 2);
  CHECK(log[0].events[0].activity == "A");
  CHECK(log[0].events[0].timestamp == 0);
  CHECK(log[0].events[1].activity == "B");
  CHECK(log[0].events[1].timestamp == 60'000);
  CHECK(log.vocabulary() == std::vector<std::string>{"A", "B"});
}

TEST_CASE("unsorted XES events are re-sorted ascending") {
  const std::string xes = R"(<log><trace>
    <string key="concept:name" value="c"/>
    <event><string key="concept:name" value="B"/>
           <date key="time:timestamp" value="1970-01-01T00:02:00Z"/></event>
    <event><string key="concept:name" value="A"/>
           <date key="time:timestamp" value="1970-01-01T00:01:00Z"/></event>
  </trace></log>)";
  const EventLog log = parse_xes(xes);
  CHECK(log[0].events[0].activity == "A");
  CHECK(log[0].events[1].activity == "B");
}

TEST_CASE("XES errors carry context") {
  CHECK_THROWS_WITH_AS(parse_xes(std::string{"<log><trace><string key=\"concept:name\" "
                                             "value=\"caseX\"/><event/></trace></log>"}),
                       doctest::Contains("caseX"), ParseError);
  try {
    parse_xes(std::string{"<log><trace></log>"});
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() >= 1);
  }
}

TEST_CASE("CSV grouping, interleaving and degenerate inputs") {
  const CsvMapping mapping;
  SUBCASE("three rows one case") {
    const EventLog log = parse_csv(std::string{"case_id,activity,timestamp\n"
                                               "c1,A,1970-01-01T00:00:00Z\n"
                                               "c1,B,1970-01-01T00:00:01Z\n"
                                               "c1,C,1970-01-01T00:00:02Z\n"},
                                   mapping);
    REQUIRE(log.size() == 1);
    CHECK(log[0].size() == 3);
  }
  SUBCASE("two interleaved cases stay ordered") {
    const EventLog log = parse_csv(std::string{"case_id,activity,timestamp\n"
                                               "c1,A,1970-01-01T00:00:00Z\n"
                                               "c2,A,1970-01-01T00:00:01Z\n"
                                               "c1,B,1970-01-01T00:00:02Z\n"
                                               "c2,B,1970-01-01T00:00:03Z\n"},
                                   mapping);
    REQUIRE(log.size() == 2);
    CHECK(log[0].case_id == "c1");
    CHECK(log[0].events[1].activity == "B");
    CHECK(log[1].case_id == "c2");
  }
  SUBCASE("empty file after header") {
    const EventLog log = parse_csv(std::string{"case_id,activity,timestamp\n"}, mapping);
    CHECK(log.empty());
    CHECK(log.vocabulary().empty());
  }
  SUBCASE("missing column is a config error") {
    CHECK_THROWS_AS(parse_csv(std::string{"case,activity,timestamp\n"}, mapping), ParseError);
  }
  SUBCASE("unparsable timestamp names the row") {
    CHECK_THROWS_WITH_AS(parse_csv(std::string{"case_id,activity,timestamp\n"
                                               "c1,A,garbage\n"},
                                   mapping),
                         doctest::Contains("row 2"), ParseError);
  }
  SUBCASE("quoted fields") {
    const EventLog log = parse_csv(std::string{"case_id,activity,timestamp\n"
                                               "\"c,1\",\"say \"\"hi\"\"\",1970-01-01T00:00:00Z\n"},
                                   mapping);
    CHECK(log[0].case_id == "c,1");
    CHECK(log[0].events[0].activity == "say \"hi\"");
  }
}

TEST_CASE("serialize/parse round-trips the internal CSV format exactly") {
  std::mt19937_64 rng(7);
  std::vector<Trace> traces;
  for (int c = 0; c < 25; ++c) {
    Trace trace;
    trace.case_id = "case-" + std::to_string(c);
    Millis at = 1'500'000'000'000 + static_cast<Millis>(rng() % 1'000'000) * 1000;
    const int len = 1 + static_cast<int>(rng() % 6);
    for (int e = 0; e < len; ++e) {
      at += static_cast<Millis>(rng() % 90'000);
      const std::string activity(1, static_cast<char>('A' + rng() % 5));
      trace.events.push_back(Event{activity, at});
    }
    traces.push_back(std::move(trace));
  }
  const EventLog log = EventLog::from_traces(std::move(traces));
  const std::string csv = serialize_csv(log);
  const EventLog parsed = parse_csv(csv);
  REQUIRE(parsed.size() == log.size());
  for (std::size_t i = 0; i < log.size(); ++i) CHECK(parsed[i] == log[i]);
  CHECK(parsed.vocabulary() == log.vocabulary());
  CHECK(serialize_csv(parsed) == csv);
}

TEST_CASE("gzip round-trip and transparent decompression") {
  const std::string csv =
      "case_id,activity,timestamp\nc1,A,1970-01-01T00:00:00Z\nc1,B,1970-01-01T00:01:00Z\n";
  const std::string compressed = gzip_compress(csv);
  CHECK(is_gzip(compressed));
  CHECK(gunzip(compressed) == csv);

  const auto path = std::filesystem::temp_directory_path() / "remtime_test_log.csv.gz";
  {
    std::ofstream out(path, std::ios::binary);
    out << compressed;
  }
  const EventLog log = load_log(path.string());
  CHECK(log.size() == 1);
  CHECK(log[0].size() == 2);
  std::filesystem::remove(path);
}

TEST_CASE("out-of-time split keeps finished traces only") {
  SUBCASE("disjoint spans") {
    std::vector<Trace> traces;
    for (int i = 0; i < 10; ++i) {
      const Millis base = i * 100'000;
      traces.push_back(make_trace("c" + std::to_string(i),
                                  {{"A", base}, {"B", base + 50'000}}));
    }
    const auto [train, test] = split_out_of_time(EventLog::from_traces(traces), 2);
    CHECK(train.size() == 8);
    CHECK(test.size() == 2);
    CHECK(test[0].case_id == "c8");
    CHECK(test[1].case_id == "c9");
  }
  SUBCASE("boundary-overlapping trace is discarded") {
    std::vector<Trace> traces = {
        make_trace("t1", {{"A", 0}, {"B", 10}}),
        make_trace("overlap", {{"A", 20}, {"B", 500}}),  // starts before, ends after
        make_trace("t2", {{"A", 100}, {"B", 200}}),
    };
    const auto [train, test] = split_out_of_time(EventLog::from_traces(traces), 1);
    CHECK(train.size() == 1);
    CHECK(train[0].case_id == "t1");
    CHECK(test[0].case_id == "t2");
  }
  SUBCASE("empty train is an error") {
    std::vector<Trace> traces = {
        make_trace("a", {{"A", 0}, {"B", 1000}}),
        make_trace("b", {{"A", 500}, {"B", 1500}}),
    };
    CHECK_THROWS_AS(split_out_of_time(EventLog::from_traces(traces), 1),
                    std::invalid_argument);
  }
  SUBCASE("train completions precede every test start (random logs)") {
    std::mt19937_64 rng(11);
    for (int round = 0; round < 20; ++round) {
      std::vector<Trace> traces;
      const int n = 5 + static_cast<int>(rng() % 40);
      for (int i = 0; i < n; ++i) {
        const Millis start = static_cast<Millis>(rng() % 1'000'000);
        const Millis span = static_cast<Millis>(rng() % 400'000);
        traces.push_back(
            make_trace("c" + std::to_string(i), {{"A", start}, {"B", start + span}}));
      }
      const std::size_t test_count = 1 + rng() % (traces.size() - 1);
      try {
        const auto [train, test] = split_out_of_time(EventLog::from_traces(traces), test_count);
        Millis max_train_end = std::numeric_limits<Millis>::min();
        for (const auto& t : train.traces()) max_train_end = std::max(max_train_end, t.end_ms());
        Millis min_test_start = std::numeric_limits<Millis>::max();
        for (const auto& t : test.traces()) {
          min_test_start = std::min(min_test_start, t.start_ms());
        }
        CHECK(max_train_end < min_test_start);
        CHECK(test.size() == test_count);
      } catch (const std::invalid_argument&) {
        // an empty training side is a legal outcome for adversarial spans
      }
    }
  }
}

TEST_CASE("prefix_at boundary semantics") {
  const Trace trace = make_trace("c", {{"A", 0}, {"B", 60'000}, {"C", 120'000}});
  CHECK(prefix_at(trace, 60'000).size() == 2);         // boundary inclusive
  CHECK(prefix_at(trace, 120'000).size() == 3);        // full trace
  CHECK(prefix_at(trace, 10'000'000).size() == 3);
  CHECK(prefix_at(trace, 0).size() == 1);              // events at the start instant
  CHECK_THROWS_AS(prefix_at(trace, -1), std::invalid_argument);

  SUBCASE("prefix plus suffix reconstructs the trace") {
    for (Millis t0 : {Millis{0}, Millis{59'999}, Millis{60'000}, Millis{200'000}}) {
      const Trace prefix = prefix_at(trace, t0);
      std::vector<Event> rebuilt = prefix.events;
      for (const auto& event : trace.events) {
        if (event.timestamp > t0) rebuilt.push_back(event);
      }
      CHECK(rebuilt == trace.events);
    }
  }
}

TEST_CASE("mean case duration") {
  std::vector<Trace> traces = {
      make_trace("a", {{"A", 0}, {"B", 10'000}}),
      make_trace("b", {{"A", 0}, {"B", 20'000}}),
  };
  CHECK(mean_case_duration_ms(EventLog::from_traces(traces)) == 15'000);

  traces.push_back(make_trace("single", {{"A", 5'000}}));  // contributes 0
  CHECK(mean_case_duration_ms(EventLog::from_traces(traces)) == 10'000);

  CHECK_THROWS_AS(mean_case_duration_ms(EventLog{}), std::invalid_argument);
}

TEST_CASE("descriptive statistics") {
  SUBCASE("empty log is all zeros") {
    const LogStats stats = descriptive_stats(EventLog{});
    CHECK(stats.cases == 0);
    CHECK(stats.events == 0);
    CHECK(stats.event_classes == 0);
    CHECK(stats.avg_case_time_days == 0.0);
  }
  SUBCASE("one trace three activities") {
    const EventLog log = EventLog::from_traces(
        {make_trace("c", {{"A", 0}, {"B", 1000}, {"C", 2000}})});
    const LogStats stats = descriptive_stats(log);
    CHECK(stats.cases == 1);
    CHECK(stats.events == 3);
    CHECK(stats.event_classes == 3);
    CHECK(stats.max_case_length == 3);
  }
  SUBCASE("single-variant log of length 6 reports 6/6/6") {
    // Shape of the purchase-order subset: six activities, every case the
    // same variant.
    std::vector<Trace> traces;
    const std::vector<std::string> path = {"create", "approve", "record",
                                           "receive", "clear",   "pay"};
    for (int c = 0; c < 40; ++c) {
      Trace trace;
      trace.case_id = "po-" + std::to_string(c);
      Millis at = c * 1'000'000;
      for (const auto& activity : path) {
        at += 3'600'000;
        trace.events.push_back(Event{activity, at});
      }
      traces.push_back(std::move(trace));
    }
    const LogStats stats = descriptive_stats(EventLog::from_traces(traces));
    CHECK(stats.event_classes == 6);
    CHECK(stats.max_case_length == 6);
    CHECK(stats.avg_case_length == doctest::Approx(6.0));
  }
  SUBCASE("cases add up over concatenation") {
    const EventLog a = EventLog::from_traces({make_trace("a1", {{"A", 0}}),
                                              make_trace("a2", {{"B", 0}})});
    const EventLog b = EventLog::from_traces({make_trace("b1", {{"C", 0}})});
    std::vector<Trace> joined = a.traces();
    joined.insert(joined.end(), b.traces().begin(), b.traces().end());
    const LogStats stats = descriptive_stats(EventLog::from_traces(joined));
    CHECK(stats.cases == descriptive_stats(a).cases + descriptive_stats(b).cases);
  }
}

TEST_CASE("event log invariants are enforced") {
  CHECK_THROWS_AS(EventLog::from_traces({Trace{"empty", {}}}), std::invalid_argument);
  CHECK_THROWS_AS(EventLog::from_traces({make_trace("dup", {{"A", 0}}),
                                         make_trace("dup", {{"B", 0}})}),
                  std::invalid_argument);
  CHECK_THROWS_AS(EventLog::from_traces({make_trace("c", {{"", 0}})}), std::invalid_argument);

  SUBCASE("stable sort keeps source order for equal timestamps") {
    Trace trace = make_trace("c", {{"first", 100}, {"second", 100}});
    const EventLog log = EventLog::from_traces({trace});
    CHECK(log[0].events[0].activity == "first");
    CHECK(log[0].events[1].activity == "second");
  }
}
