#include "remtime/event_log.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "remtime/gzip.hpp"

namespace remtime {

namespace {

void sort_events_stable(std::vector<Event>& events) {
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.timestamp < b.timestamp; });
}

}  // namespace

EventLog EventLog::from_traces(std::vector<Trace> traces) {
  EventLog log;
  std::set<std::string> case_ids;
  std::set<std::string> labels;
  for (auto& trace : traces) {
    if (trace.events.empty()) {
      throw std::invalid_argument("trace '" + trace.case_id + "' has no events");
    }
    if (!case_ids.insert(trace.case_id).second) {
      throw std::invalid_argument("duplicate case id '" + trace.case_id + "'");
    }
    sort_events_stable(trace.events);
    for (const auto& event : trace.events) {
      if (event.activity.empty()) {
        throw std::invalid_argument("empty activity label in case '" + trace.case_id + "'");
      }
      labels.insert(event.activity);
    }
  }
  log.traces_ = std::move(traces);
  log.vocabulary_.assign(labels.begin(), labels.end());
  return log;
}

int EventLog::activity_index(const std::string& label) const {
  auto it = std::lower_bound(vocabulary_.begin(), vocabulary_.end(), label);
  if (it == vocabulary_.end() || *it != label) return -1;
  return static_cast<int>(it - vocabulary_.begin());
}

// --- XES ---

namespace {

namespace pt = boost::property_tree;

// XES attributes are typed child elements: <string key=".." value=".."/>,
// <date key=".." value=".."/>. Only top-level attributes of the element are
// scanned; container extensions are ignored.
boost::optional<std::string> find_attr(const pt::ptree& element, const char* type,
                                       const char* key) {
  for (const auto& [name, child] : element) {
    if (name != type) continue;
    auto k = child.get_optional<std::string>("<xmlattr>.key");
    if (k && *k == key) return child.get_optional<std::string>("<xmlattr>.value");
  }
  return boost::none;
}

EventLog parse_xes_tree(const pt::ptree& doc) {
  const pt::ptree* log_elem = nullptr;
  if (auto child = doc.get_child_optional("log")) {
    log_elem = &*child;
  } else {
    throw ParseError("XES document has no <log> element");
  }

  std::vector<Trace> traces;
  std::size_t trace_index = 0;
  for (const auto& [name, trace_elem] : *log_elem) {
    if (name != "trace") continue;
    ++trace_index;
    Trace trace;
    if (auto id = find_attr(trace_elem, "string", "concept:name")) {
      trace.case_id = *id;
    } else {
      trace.case_id = "trace-" + std::to_string(trace_index);
    }
    for (const auto& [child_name, event_elem] : trace_elem) {
      if (child_name != "event") continue;
      auto activity = find_attr(event_elem, "string", "concept:name");
      if (!activity || activity->empty()) {
        throw ParseError("event without concept:name in case '" + trace.case_id + "'");
      }
      auto stamp = find_attr(event_elem, "date", "time:timestamp");
      if (!stamp) {
        throw ParseError("event without time:timestamp in case '" + trace.case_id + "'");
      }
      Millis ts;
      try {
        ts = parse_iso8601(*stamp);
      } catch (const std::invalid_argument& e) {
        throw ParseError(std::string(e.what()) + " in case '" + trace.case_id + "'");
      }
      trace.events.push_back(Event{*activity, ts});
    }
    if (!trace.events.empty()) traces.push_back(std::move(trace));
  }
  return EventLog::from_traces(std::move(traces));
}

}  // namespace

EventLog parse_xes(std::istream& source) {
  pt::ptree doc;
  try {
    pt::read_xml(source, doc);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed XML: ") + e.message(), static_cast<long>(e.line()));
  }
  return parse_xes_tree(doc);
}

EventLog parse_xes(const std::string& text) {
  std::istringstream in(text);
  return parse_xes(in);
}

// --- CSV ---

namespace {

// RFC-4180-ish row splitter: quoted fields may contain commas, newlines and
// doubled quotes.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, long& line) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int c;
  while ((c = in.get()) != EOF) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(static_cast<char>(c));
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++line;
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(static_cast<char>(c));
    }
  }
  if (!any) return false;
  if (!field.empty() && field.back() == '\r') field.pop_back();
  fields.push_back(std::move(field));
  return true;
}

std::size_t require_column(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw ParseError("CSV is missing required column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

bool needs_quoting(const std::string& s) {
  return s.find_first_of(",\"\n\r") != std::string::npos;
}

void write_csv_field(std::ostream& out, const std::string& s) {
  if (!needs_quoting(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

EventLog parse_csv(std::istream& source, const CsvMapping& mapping) {
  std::vector<std::string> fields;
  long line = 1;
  if (!read_csv_record(source, fields, line)) {
    throw ParseError("CSV input is empty (no header row)");
  }
  const std::size_t case_col = require_column(fields, mapping.case_column);
  const std::size_t act_col = require_column(fields, mapping.activity_column);
  const std::size_t ts_col = require_column(fields, mapping.timestamp_column);

  std::vector<Trace> traces;
  std::map<std::string, std::size_t> trace_index;  // case id -> position
  long row = 1;
  while (read_csv_record(source, fields, line)) {
    ++row;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    const std::size_t needed = std::max({case_col, act_col, ts_col}) + 1;
    if (fields.size() < needed) {
      throw ParseError("row " + std::to_string(row) + " has " +
                           std::to_string(fields.size()) + " fields, need " +
                           std::to_string(needed),
                       line);
    }
    Millis ts;
    try {
      ts = parse_timestamp(fields[ts_col], mapping.timestamp_format);
    } catch (const std::invalid_argument& e) {
      throw ParseError("row " + std::to_string(row) + ": " + e.what());
    }
    const std::string& case_id = fields[case_col];
    auto [it, inserted] = trace_index.try_emplace(case_id, traces.size());
    if (inserted) traces.push_back(Trace{case_id, {}});
    traces[it->second].events.push_back(Event{fields[act_col], ts});
  }
  return EventLog::from_traces(std::move(traces));
}

EventLog parse_csv(const std::string& text, const CsvMapping& mapping) {
  std::istringstream in(text);
  return parse_csv(in, mapping);
}

EventLog load_log(const std::string& path, const CsvMapping& mapping) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::string stem = path;
  if (is_gzip(bytes)) {
    bytes = gunzip(bytes);
    if (stem.size() > 3 && stem.ends_with(".gz")) stem.resize(stem.size() - 3);
  }
  if (stem.ends_with(".csv")) return parse_csv(bytes, mapping);
  if (stem.ends_with(".xes") || stem.ends_with(".xml")) return parse_xes(bytes);
  // Fall back on content sniffing.
  auto first = bytes.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && bytes[first] == '<') return parse_xes(bytes);
  return parse_csv(bytes, mapping);
}

std::string serialize_csv(const EventLog& log) {
  std::ostringstream out;
  out << "case_id,activity,timestamp\n";
  for (const auto& trace : log.traces()) {
    for (const auto& event : trace.events) {
      write_csv_field(out, trace.case_id);
      out << ',';
      write_csv_field(out, event.activity);
      out << ',' << format_iso8601(event.timestamp) << '\n';
    }
  }
  return out.str();
}

// --- splitting and summaries ---

std::pair<EventLog, EventLog> split_out_of_time(const EventLog& log, std::size_t test_count) {
  if (test_count == 0 || test_count >= log.size()) {
    throw std::invalid_argument("test_count must be in [1, #traces)");
  }
  std::vector<const Trace*> by_start;
  by_start.reserve(log.size());
  for (const auto& t : log.traces()) by_start.push_back(&t);
  std::stable_sort(by_start.begin(), by_start.end(),
                   [](const Trace* a, const Trace* b) { return a->start_ms() < b->start_ms(); });

  const std::size_t first_test = by_start.size() - test_count;
  const Millis boundary = by_start[first_test]->start_ms();

  std::vector<Trace> train, test;
  for (std::size_t i = 0; i < first_test; ++i) {
    if (by_start[i]->end_ms() < boundary) train.push_back(*by_start[i]);
    // traces overlapping the boundary are discarded
  }
  for (std::size_t i = first_test; i < by_start.size(); ++i) test.push_back(*by_start[i]);

  if (train.empty()) {
    throw std::invalid_argument("out-of-time split leaves an empty training log");
  }
  return {EventLog::from_traces(std::move(train)), EventLog::from_traces(std::move(test))};
}

Trace prefix_at(const Trace& trace, Millis t0) {
  if (trace.events.empty() || t0 < trace.start_ms()) {
    throw std::invalid_argument("prefix_at: t0 precedes the start of case '" + trace.case_id +
                                "'");
  }
  Trace prefix;
  prefix.case_id = trace.case_id;
  for (const auto& event : trace.events) {
    if (event.timestamp > t0) break;
    prefix.events.push_back(event);
  }
  return prefix;
}

Millis mean_case_duration_ms(const EventLog& log) {
  if (log.empty()) throw std::invalid_argument("mean_case_duration: empty log");
  double total = 0.0;
  for (const auto& trace : log.traces()) total += static_cast<double>(trace.duration_ms());
  return static_cast<Millis>(std::llround(total / static_cast<double>(log.size())));
}

LogStats descriptive_stats(const EventLog& log) {
  LogStats stats;
  stats.cases = log.size();
  stats.event_classes = log.vocabulary().size();
  if (log.empty()) return stats;
  double total_events = 0.0;
  double total_days = 0.0;
  for (const auto& trace : log.traces()) {
    total_events += static_cast<double>(trace.size());
    stats.max_case_length = std::max(stats.max_case_length, trace.size());
    const double days = ms_to_days(static_cast<double>(trace.duration_ms()));
    stats.max_case_time_days = std::max(stats.max_case_time_days, days);
    total_days += days;
  }
  stats.events = static_cast<std::size_t>(total_events);
  stats.avg_case_length = total_events / static_cast<double>(log.size());
  stats.avg_case_time_days = total_days / static_cast<double>(log.size());
  return stats;
}

}  // namespace remtime
