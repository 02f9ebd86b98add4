#include "remtime/petri.hpp"

#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <deque>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace remtime {

namespace {

void check_place(const PetriNet& net, int place) {
  if (place < 0 || static_cast<std::size_t>(place) >= net.place_count()) {
    throw std::invalid_argument("place index out of range");
  }
}

void check_transition(const PetriNet& net, int transition) {
  if (transition < 0 || static_cast<std::size_t>(transition) >= net.transition_count()) {
    throw std::invalid_argument("transition index out of range");
  }
}

}  // namespace

int PetriNet::add_place(std::string name) {
  if (name.empty()) name = "p" + std::to_string(place_names_.size());
  place_names_.push_back(std::move(name));
  place_consumers_.emplace_back();
  initial_.push_back(0);
  final_.push_back(0);
  return static_cast<int>(place_names_.size()) - 1;
}

int PetriNet::add_transition(std::string label) {
  transitions_.push_back(Transition{std::move(label), {}, {}});
  return static_cast<int>(transitions_.size()) - 1;
}

void PetriNet::add_arc_place_to_transition(int place, int transition) {
  check_place(*this, place);
  check_transition(*this, transition);
  transitions_[static_cast<std::size_t>(transition)].inputs.push_back(place);
  place_consumers_[static_cast<std::size_t>(place)].push_back(transition);
}

void PetriNet::add_arc_transition_to_place(int transition, int place) {
  check_place(*this, place);
  check_transition(*this, transition);
  transitions_[static_cast<std::size_t>(transition)].outputs.push_back(place);
}

int PetriNet::transition_by_label(const std::string& label) const {
  for (std::size_t i = 0; i < transitions_.size(); ++i) {
    if (transitions_[i].label == label) return static_cast<int>(i);
  }
  return -1;
}

void PetriNet::assert_unique_labels() const {
  std::set<std::string> seen;
  for (const auto& t : transitions_) {
    if (t.silent()) continue;
    if (!seen.insert(t.label).second) {
      throw std::invalid_argument("duplicate transition label '" + t.label + "'");
    }
  }
}

namespace {

bool is_token_enabled(const PetriNet& net, const Marking& m, int t) {
  for (int p : net.transition(t).inputs) {
    if (m[static_cast<std::size_t>(p)] == 0) return false;
  }
  return !net.transition(t).inputs.empty();
}

}  // namespace

std::vector<int> token_enabled(const PetriNet& net, const Marking& m) {
  std::vector<int> result;
  for (std::size_t t = 0; t < net.transition_count(); ++t) {
    if (is_token_enabled(net, m, static_cast<int>(t))) result.push_back(static_cast<int>(t));
  }
  return result;
}

std::vector<int> enabled(const PetriNet& net, const Marking& m) {
  std::vector<int> all = token_enabled(net, m);
  std::vector<int> immediates;
  for (int t : all) {
    if (net.transition(t).silent()) immediates.push_back(t);
  }
  return immediates.empty() ? all : immediates;
}

Marking fire(const PetriNet& net, const Marking& m, int t) {
  check_transition(net, t);
  if (!is_token_enabled(net, m, t)) {
    throw std::invalid_argument("transition " + std::to_string(t) + " is not enabled");
  }
  Marking out = m;
  for (int p : net.transition(t).inputs) --out[static_cast<std::size_t>(p)];
  for (int p : net.transition(t).outputs) ++out[static_cast<std::size_t>(p)];
  return out;
}

// --- validation ---

namespace {

struct MarkingHash {
  std::size_t operator()(const Marking& m) const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (std::uint32_t v : m) {
      h ^= v;
      h *= 0x100000001b3ULL;
    }
    return h;
  }
};

}  // namespace

void validate_workflow_net(const PetriNet& net, const ValidationOptions& options) {
  if (net.place_count() == 0 || net.transition_count() == 0) {
    throw std::invalid_argument("workflow net needs at least one place and one transition");
  }

  std::vector<bool> has_preset(net.place_count(), false);
  std::vector<bool> has_postset(net.place_count(), false);
  for (const auto& t : net.transitions()) {
    if (t.inputs.empty() || t.outputs.empty()) {
      throw std::invalid_argument("transition '" + (t.silent() ? "tau" : t.label) +
                                  "' must have input and output places");
    }
    for (int p : t.outputs) has_preset[static_cast<std::size_t>(p)] = true;
    for (int p : t.inputs) has_postset[static_cast<std::size_t>(p)] = true;
  }

  int source = -1, sink = -1;
  for (std::size_t p = 0; p < net.place_count(); ++p) {
    if (!has_preset[p]) {
      if (source >= 0) throw std::invalid_argument("multiple source places");
      source = static_cast<int>(p);
    }
    if (!has_postset[p]) {
      if (sink >= 0) throw std::invalid_argument("multiple sink places");
      sink = static_cast<int>(p);
    }
  }
  if (source < 0) throw std::invalid_argument("no source place (empty preset)");
  if (sink < 0) throw std::invalid_argument("no sink place (empty postset)");

  for (std::size_t p = 0; p < net.place_count(); ++p) {
    const std::uint32_t want_initial = (static_cast<int>(p) == source) ? 1 : 0;
    const std::uint32_t want_final = (static_cast<int>(p) == sink) ? 1 : 0;
    if (net.initial_marking()[p] != want_initial) {
      throw std::invalid_argument("initial marking must be exactly one token on the source");
    }
    if (net.final_marking()[p] != want_final) {
      throw std::invalid_argument("final marking must be exactly one token on the sink");
    }
  }

  net.assert_unique_labels();

  if (!options.check_soundness) return;

  // Bounded explicit-state soundness: option to complete, proper
  // completion, no dead transitions. Plain semantics (priorities are a
  // property of the stochastic simulation, not of soundness).
  std::unordered_map<Marking, std::size_t, MarkingHash> index;
  std::vector<Marking> markings;
  std::vector<std::vector<std::size_t>> successors;
  std::vector<bool> transition_fired(net.transition_count(), false);

  markings.push_back(net.initial_marking());
  index.emplace(net.initial_marking(), 0);
  successors.emplace_back();
  for (std::size_t i = 0; i < markings.size(); ++i) {
    const Marking current = markings[i];
    if (current[static_cast<std::size_t>(sink)] >= 1 && current != net.final_marking()) {
      throw std::invalid_argument("improper completion: token on sink with tokens elsewhere");
    }
    for (int t : token_enabled(net, current)) {
      transition_fired[static_cast<std::size_t>(t)] = true;
      Marking next = fire(net, current, t);
      auto [it, inserted] = index.emplace(next, markings.size());
      if (inserted) {
        markings.push_back(std::move(next));
        successors.emplace_back();
        if (markings.size() > options.max_markings) {
          throw std::invalid_argument("state space exceeds " +
                                      std::to_string(options.max_markings) +
                                      " markings; soundness not decided");
        }
      }
      successors[i].push_back(it->second);
    }
  }

  for (std::size_t t = 0; t < net.transition_count(); ++t) {
    if (!transition_fired[t]) {
      const auto& tr = net.transition(static_cast<int>(t));
      throw std::invalid_argument("dead transition '" + (tr.silent() ? "tau" : tr.label) + "'");
    }
  }

  auto final_it = index.find(net.final_marking());
  if (final_it == index.end()) {
    throw std::invalid_argument("final marking unreachable");
  }

  // Reverse reachability from the final marking.
  std::vector<std::vector<std::size_t>> predecessors(markings.size());
  for (std::size_t i = 0; i < successors.size(); ++i) {
    for (std::size_t j : successors[i]) predecessors[j].push_back(i);
  }
  std::vector<bool> can_finish(markings.size(), false);
  std::deque<std::size_t> queue{final_it->second};
  can_finish[final_it->second] = true;
  while (!queue.empty()) {
    std::size_t i = queue.front();
    queue.pop_front();
    for (std::size_t j : predecessors[i]) {
      if (!can_finish[j]) {
        can_finish[j] = true;
        queue.push_back(j);
      }
    }
  }
  for (std::size_t i = 0; i < markings.size(); ++i) {
    if (!can_finish[i]) {
      throw std::invalid_argument("unsound: a reachable marking cannot reach the final marking");
    }
  }
}

// --- replay ---

Millis ReplayState::enabling_time_of(int transition) const {
  for (const auto& [t, ms] : enabling_times) {
    if (t == transition) return ms;
  }
  throw std::invalid_argument("transition " + std::to_string(transition) +
                              " is not an enabled timed transition");
}

namespace {

// Marking with a timestamp per token; per place the tokens are kept sorted
// so consumption is oldest-first and deterministic.
struct TimedMarking {
  std::vector<std::vector<Millis>> tokens;

  Marking counts() const {
    Marking m(tokens.size(), 0);
    for (std::size_t p = 0; p < tokens.size(); ++p) {
      m[p] = static_cast<std::uint32_t>(tokens[p].size());
    }
    return m;
  }
};

// Consumes the oldest token from each input place; returns the enabling
// time (max over consumed tokens) and stamps produced tokens with
// `fired_ms`.
Millis fire_timed(const PetriNet& net, TimedMarking& tm, int t, Millis fired_ms) {
  Millis enabled_ms = std::numeric_limits<Millis>::min();
  for (int p : net.transition(t).inputs) {
    auto& bag = tm.tokens[static_cast<std::size_t>(p)];
    if (bag.empty()) throw std::logic_error("fire_timed on disabled transition");
    enabled_ms = std::max(enabled_ms, bag.front());
    bag.erase(bag.begin());
  }
  for (int p : net.transition(t).outputs) {
    auto& bag = tm.tokens[static_cast<std::size_t>(p)];
    bag.insert(std::upper_bound(bag.begin(), bag.end(), fired_ms), fired_ms);
  }
  return enabled_ms;
}

constexpr std::size_t kReplaySearchBound = 100'000;

// Shortest sequence of silent firings (BFS, successors expanded in
// ascending transition index) until `goal` holds. Returns false when no
// such sequence exists within the search bound.
bool silent_path(const PetriNet& net, const Marking& from,
                 const std::function<bool(const Marking&)>& goal, std::vector<int>& sequence) {
  sequence.clear();
  struct Node {
    Marking marking;
    std::size_t parent;
    int via;
  };
  std::vector<Node> nodes;
  std::unordered_set<Marking, MarkingHash> visited;
  nodes.push_back(Node{from, 0, -1});
  visited.insert(from);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Marking current = nodes[i].marking;
    if (goal(current)) {
      std::size_t at = i;
      while (nodes[at].via >= 0) {
        sequence.push_back(nodes[at].via);
        at = nodes[at].parent;
      }
      std::reverse(sequence.begin(), sequence.end());
      return true;
    }
    if (nodes.size() > kReplaySearchBound) return false;
    for (std::size_t t = 0; t < net.transition_count(); ++t) {
      if (!net.transition(static_cast<int>(t)).silent()) continue;
      if (!is_token_enabled(net, current, static_cast<int>(t))) continue;
      Marking next = fire(net, current, static_cast<int>(t));
      if (visited.insert(next).second) {
        nodes.push_back(Node{std::move(next), i, static_cast<int>(t)});
      }
    }
  }
  return false;
}

}  // namespace

ReplayResult replay(const PetriNet& net, const std::vector<Event>& events, Millis start_ms,
                    const ReplayOptions& options) {
  net.assert_unique_labels();

  TimedMarking tm;
  tm.tokens.resize(net.place_count());
  for (std::size_t p = 0; p < net.place_count(); ++p) {
    tm.tokens[p].assign(net.initial_marking()[p], start_ms);
  }

  ReplayResult result;
  auto fire_silently = [&](const std::vector<int>& sequence) {
    for (int t : sequence) {
      // Immediate transition: fires at its enabling time.
      Millis enabled_at = std::numeric_limits<Millis>::min();
      for (int p : net.transition(t).inputs) {
        enabled_at = std::max(enabled_at, tm.tokens[static_cast<std::size_t>(p)].front());
      }
      fire_timed(net, tm, t, enabled_at);
      result.firings.push_back(ReplayFiring{t, enabled_at, enabled_at});
    }
  };

  std::vector<int> silent_sequence;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& event = events[i];
    const int target = net.transition_by_label(event.activity);
    if (target < 0) {
      throw ReplayError("activity '" + event.activity + "' not in net (event " +
                            std::to_string(i) + ")",
                        static_cast<long>(i));
    }
    const auto enables_target = [&](const Marking& m) {
      return is_token_enabled(net, m, target);
    };
    if (!silent_path(net, tm.counts(), enables_target, silent_sequence)) {
      throw ReplayError("no silent sequence enables '" + event.activity + "' (event " +
                            std::to_string(i) + ")",
                        static_cast<long>(i));
    }
    fire_silently(silent_sequence);
    const Millis enabled_at = fire_timed(net, tm, target, event.timestamp);
    result.firings.push_back(ReplayFiring{target, enabled_at, event.timestamp});
  }

  if (options.complete_to_final) {
    const auto at_final = [&](const Marking& m) { return m == net.final_marking(); };
    if (!silent_path(net, tm.counts(), at_final, silent_sequence)) {
      throw ReplayError("trace does not reach the final marking via silent transitions",
                        static_cast<long>(events.size()));
    }
    fire_silently(silent_sequence);
  }

  ReplayState& state = result.state;
  state.marking = tm.counts();
  state.last_event_ms = events.empty() ? start_ms : events.back().timestamp;
  for (int t : token_enabled(net, state.marking)) {
    if (net.transition(t).silent()) continue;
    Millis enabled_at = std::numeric_limits<Millis>::min();
    for (int p : net.transition(t).inputs) {
      enabled_at = std::max(enabled_at, tm.tokens[static_cast<std::size_t>(p)].front());
    }
    state.enabling_times.emplace_back(t, enabled_at);
  }
  return result;
}

ReplayResult replay(const PetriNet& net, const Trace& trace, const ReplayOptions& options) {
  if (trace.events.empty()) {
    throw std::invalid_argument("replay of an empty trace needs an explicit start time");
  }
  return replay(net, trace.events, trace.start_ms(), options);
}

// --- PNML / dot ---

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::string write_pnml(const PetriNet& net, const TransitionAnnotations& annotations) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<pnml>\n  <net id=\"net0\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\">\n"
      << "    <page id=\"page0\">\n";
  for (std::size_t p = 0; p < net.place_count(); ++p) {
    out << "      <place id=\"p" << p << "\">\n"
        << "        <name><text>" << xml_escape(net.place_name(static_cast<int>(p)))
        << "</text></name>\n";
    if (net.initial_marking()[p] > 0) {
      out << "        <initialMarking><text>" << net.initial_marking()[p]
          << "</text></initialMarking>\n";
    }
    out << "      </place>\n";
  }
  for (std::size_t t = 0; t < net.transition_count(); ++t) {
    const auto& tr = net.transition(static_cast<int>(t));
    out << "      <transition id=\"t" << t << "\">\n";
    if (!tr.silent()) {
      out << "        <name><text>" << xml_escape(tr.label) << "</text></name>\n";
    }
    if (t < annotations.size() && !annotations[t].empty()) {
      out << "        <toolspecific tool=\"remtime\" version=\"1\">\n";
      for (const auto& [key, value] : annotations[t]) {
        out << "          <attr key=\"" << xml_escape(key) << "\" value=\"" << xml_escape(value)
            << "\"/>\n";
      }
      out << "        </toolspecific>\n";
    }
    out << "      </transition>\n";
  }
  std::size_t arc_id = 0;
  for (std::size_t t = 0; t < net.transition_count(); ++t) {
    const auto& tr = net.transition(static_cast<int>(t));
    for (int p : tr.inputs) {
      out << "      <arc id=\"a" << arc_id++ << "\" source=\"p" << p << "\" target=\"t" << t
          << "\"/>\n";
    }
    for (int p : tr.outputs) {
      out << "      <arc id=\"a" << arc_id++ << "\" source=\"t" << t << "\" target=\"p" << p
          << "\"/>\n";
    }
  }
  out << "    </page>\n    <finalmarkings>\n      <marking>\n";
  for (std::size_t p = 0; p < net.place_count(); ++p) {
    if (net.final_marking()[p] > 0) {
      out << "        <place idref=\"p" << p << "\"><text>" << net.final_marking()[p]
          << "</text></place>\n";
    }
  }
  out << "      </marking>\n    </finalmarkings>\n  </net>\n</pnml>\n";
  return out.str();
}

PnmlNet read_pnml(const std::string& xml) {
  namespace pt = boost::property_tree;
  pt::ptree doc;
  std::istringstream in(xml);
  try {
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed PNML: ") + e.message(), static_cast<long>(e.line()));
  }

  auto net_elem = doc.get_child_optional("pnml.net");
  if (!net_elem) throw ParseError("PNML document has no <net> element");

  PnmlNet result;
  std::map<std::string, int> place_ids;
  std::map<std::string, int> transition_ids;
  Marking initial;

  // Nodes may sit directly under <net> or inside <page> elements.
  auto for_each_node = [&](auto&& visit) {
    for (const auto& [name, child] : *net_elem) {
      if (name == "page") {
        for (const auto& [inner_name, inner] : child) visit(inner_name, inner);
      } else {
        visit(name, child);
      }
    }
  };

  for_each_node([&](const std::string& name, const pt::ptree& elem) {
    if (name == "place") {
      const auto id = elem.get<std::string>("<xmlattr>.id");
      const int p = result.net.add_place(elem.get("name.text", id));
      place_ids[id] = p;
      initial.resize(result.net.place_count(), 0);
      initial[static_cast<std::size_t>(p)] =
          elem.get<std::uint32_t>("initialMarking.text", 0);
    } else if (name == "transition") {
      const auto id = elem.get<std::string>("<xmlattr>.id");
      const int t = result.net.add_transition(elem.get("name.text", std::string{}));
      transition_ids[id] = t;
      result.annotations.resize(result.net.transition_count());
      if (auto tool = elem.get_child_optional("toolspecific")) {
        for (const auto& [attr_name, attr] : *tool) {
          if (attr_name != "attr") continue;
          result.annotations[static_cast<std::size_t>(t)]
                            [attr.get<std::string>("<xmlattr>.key")] =
              attr.get<std::string>("<xmlattr>.value");
        }
      }
    }
  });

  for_each_node([&](const std::string& name, const pt::ptree& elem) {
    if (name != "arc") return;
    const auto source = elem.get<std::string>("<xmlattr>.source");
    const auto target = elem.get<std::string>("<xmlattr>.target");
    if (place_ids.count(source) && transition_ids.count(target)) {
      result.net.add_arc_place_to_transition(place_ids[source], transition_ids[target]);
    } else if (transition_ids.count(source) && place_ids.count(target)) {
      result.net.add_arc_transition_to_place(transition_ids[source], place_ids[target]);
    } else {
      throw ParseError("arc endpoints '" + source + "' -> '" + target +
                       "' are not a place/transition pair");
    }
  });

  initial.resize(result.net.place_count(), 0);
  result.net.set_initial_marking(initial);

  Marking final_marking(result.net.place_count(), 0);
  bool have_final = false;
  if (auto markings = net_elem->get_child_optional("finalmarkings.marking")) {
    for (const auto& [name, place_ref] : *markings) {
      if (name != "place") continue;
      const auto idref = place_ref.get<std::string>("<xmlattr>.idref");
      if (!place_ids.count(idref)) throw ParseError("final marking references unknown place");
      final_marking[static_cast<std::size_t>(place_ids[idref])] =
          place_ref.get<std::uint32_t>("text", 1);
      have_final = true;
    }
  }
  if (!have_final) {
    // Infer: one token on the sink place (empty postset).
    std::vector<bool> has_postset(result.net.place_count(), false);
    for (const auto& tr : result.net.transitions()) {
      for (int p : tr.inputs) has_postset[static_cast<std::size_t>(p)] = true;
    }
    for (std::size_t p = 0; p < result.net.place_count(); ++p) {
      if (!has_postset[p]) final_marking[p] = 1;
    }
  }
  result.net.set_final_marking(final_marking);
  result.annotations.resize(result.net.transition_count());
  return result;
}

std::string write_dot(const PetriNet& net) {
  std::ostringstream out;
  out << "digraph petri {\n  rankdir=LR;\n";
  for (std::size_t p = 0; p < net.place_count(); ++p) {
    out << "  p" << p << " [shape=circle,label=\"" << net.place_name(static_cast<int>(p));
    if (net.initial_marking()[p] > 0) out << "\\n&#9679;";
    out << "\"];\n";
  }
  for (std::size_t t = 0; t < net.transition_count(); ++t) {
    const auto& tr = net.transition(static_cast<int>(t));
    if (tr.silent()) {
      out << "  t" << t << " [shape=box,style=filled,fillcolor=black,label=\"\",width=0.15];\n";
    } else {
      out << "  t" << t << " [shape=box,label=\"" << tr.label << "\"];\n";
    }
  }
  for (std::size_t t = 0; t < net.transition_count(); ++t) {
    const auto& tr = net.transition(static_cast<int>(t));
    for (int p : tr.inputs) out << "  p" << p << " -> t" << t << ";\n";
    for (int p : tr.outputs) out << "  t" << t << " -> p" << p << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace remtime
