#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "remtime/time_util.hpp"

namespace remtime {

/// A parse failure carrying the position (line or row) it was detected at.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, long line = -1)
      : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// One completed activity. Only completion timestamps are modeled.
struct Event {
  std::string activity;
  Millis timestamp;  // milliseconds since epoch

  friend bool operator==(const Event&, const Event&) = default;
};

/// One process execution: events sorted non-decreasing by timestamp,
/// equal timestamps keeping source order.
struct Trace {
  std::string case_id;
  std::vector<Event> events;

  Millis start_ms() const { return events.front().timestamp; }
  Millis end_ms() const { return events.back().timestamp; }
  Millis duration_ms() const { return end_ms() - start_ms(); }
  std::size_t size() const { return events.size(); }

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Immutable collection of traces plus the activity vocabulary
/// (all distinct labels, lexicographically ordered, fixed at construction).
class EventLog {
 public:
  EventLog() = default;

  /// Validates and normalizes: sorts events within each trace (stable),
  /// rejects empty traces, empty activity labels and duplicate case ids,
  /// and builds the vocabulary.
  static EventLog from_traces(std::vector<Trace> traces);

  const std::vector<Trace>& traces() const { return traces_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  std::size_t size() const { return traces_.size(); }
  bool empty() const { return traces_.empty(); }
  const Trace& operator[](std::size_t i) const { return traces_[i]; }

  /// Index of a label in the vocabulary, or -1 if absent.
  int activity_index(const std::string& label) const;

 private:
  std::vector<Trace> traces_;
  std::vector<std::string> vocabulary_;
};

/// Table-style descriptive statistics. Times reported in days.
struct LogStats {
  std::size_t cases = 0;
  std::size_t events = 0;
  std::size_t event_classes = 0;
  std::size_t max_case_length = 0;
  double avg_case_length = 0.0;
  double max_case_time_days = 0.0;
  double avg_case_time_days = 0.0;
};

/// Column mapping for CSV ingestion.
struct CsvMapping {
  std::string case_column = "case_id";
  std::string activity_column = "activity";
  std::string timestamp_column = "timestamp";
  std::string timestamp_format = "iso8601";
};

/// Reads an XES document (trace/event elements with "concept:name" and
/// "time:timestamp" attributes). Throws ParseError on malformed XML or
/// missing attributes; the message names the offending case.
EventLog parse_xes(std::istream& source);
EventLog parse_xes(const std::string& text);

/// Reads a header-ful CSV per the mapping. Rows are grouped by case in
/// first-appearance order and sorted by timestamp within each case.
EventLog parse_csv(std::istream& source, const CsvMapping& mapping = {});
EventLog parse_csv(const std::string& text, const CsvMapping& mapping = {});

/// Loads a log from a file path, dispatching on extension (.xes/.csv, with
/// transparent .gz decompression detected by suffix or magic bytes).
EventLog load_log(const std::string& path, const CsvMapping& mapping = {});

/// Canonical internal CSV serialization (case_id,activity,timestamp with
/// ISO-8601 UTC millisecond timestamps). parse_csv(serialize_csv(log))
/// round-trips exactly.
std::string serialize_csv(const EventLog& log);

/// Out-of-time split: the last `test_count` traces by start time form the
/// test log; the training log keeps exactly the traces that complete
/// strictly before the earliest test-trace start. Traces overlapping the
/// boundary are discarded.
std::pair<EventLog, EventLog> split_out_of_time(const EventLog& log, std::size_t test_count);

/// Events of `trace` with timestamp <= t0. Throws std::invalid_argument if
/// t0 precedes the first event.
Trace prefix_at(const Trace& trace, Millis t0);

/// Arithmetic mean of (last - first) timestamps over all traces, rounded
/// to whole milliseconds. Throws std::invalid_argument on an empty log.
Millis mean_case_duration_ms(const EventLog& log);

LogStats descriptive_stats(const EventLog& log);

}  // namespace remtime
