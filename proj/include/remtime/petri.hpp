#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "remtime/event_log.hpp"
#include "remtime/time_util.hpp"

namespace remtime {

/// Multiset of tokens over place indices.
using Marking = std::vector<std::uint32_t>;

struct ReplayError : std::runtime_error {
  explicit ReplayError(const std::string& msg, long event_index = -1)
      : std::runtime_error(msg), event_index(event_index) {}
  long event_index;
};

/// A place/transition net with arc weights fixed at 1. Labeled transitions
/// are timed; unlabeled (silent) transitions are immediate. Arcs are kept
/// as per-transition input/output place lists, which keeps the flow
/// relation bipartite by construction.
class PetriNet {
 public:
  struct Transition {
    std::string label;  // empty = silent/immediate
    std::vector<int> inputs;
    std::vector<int> outputs;
    bool silent() const { return label.empty(); }
  };

  int add_place(std::string name = {});
  int add_transition(std::string label = {});
  void add_arc_place_to_transition(int place, int transition);
  void add_arc_transition_to_place(int transition, int place);

  std::size_t place_count() const { return place_names_.size(); }
  std::size_t transition_count() const { return transitions_.size(); }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const Transition& transition(int i) const { return transitions_[static_cast<std::size_t>(i)]; }
  const std::string& place_name(int i) const { return place_names_[static_cast<std::size_t>(i)]; }

  const Marking& initial_marking() const { return initial_; }
  const Marking& final_marking() const { return final_; }
  void set_initial_marking(Marking m) { initial_ = std::move(m); }
  void set_final_marking(Marking m) { final_ = std::move(m); }

  /// Transitions producing into / consuming from each place.
  const std::vector<std::vector<int>>& place_consumers() const { return place_consumers_; }

  /// Unique labeled transition carrying `label`, or -1.
  int transition_by_label(const std::string& label) const;

  /// Throws std::invalid_argument if two labeled transitions share a label.
  void assert_unique_labels() const;

 private:
  std::vector<std::string> place_names_;
  std::vector<Transition> transitions_;
  std::vector<std::vector<int>> place_consumers_;  // place -> transitions with arc from it
  Marking initial_;
  Marking final_;
};

/// Transitions whose every input place holds a token (plain Petri net
/// enabling, ignoring priorities). Ascending transition index.
std::vector<int> token_enabled(const PetriNet& net, const Marking& m);

/// Firing-rule enabled set: if any immediate (silent) transition is token
/// enabled, only immediate transitions are returned — immediates preempt
/// timed transitions.
std::vector<int> enabled(const PetriNet& net, const Marking& m);

/// Consumes one token per input place, produces one per output place.
/// Throws std::invalid_argument if `t` is not token-enabled.
Marking fire(const PetriNet& net, const Marking& m, int t);

struct ValidationOptions {
  bool check_soundness = true;
  std::size_t max_markings = 100'000;
};

/// Asserts workflow-net shape (single source/sink place, matching initial
/// and final markings, unique labels, arc-connected transitions) and,
/// optionally, classical soundness by bounded explicit-state reachability.
/// Throws std::invalid_argument with a descriptive message on violation.
void validate_workflow_net(const PetriNet& net, const ValidationOptions& options = {});

/// State recovered by replaying a (partial) trace: the current marking,
/// the absolute time each currently token-enabled timed transition became
/// enabled, and the last replayed event time.
struct ReplayState {
  Marking marking;
  std::vector<std::pair<int, Millis>> enabling_times;  // timed transition -> enabled at
  Millis last_event_ms = 0;

  Millis enabling_time_of(int transition) const;
};

/// One transition firing observed during replay.
struct ReplayFiring {
  int transition;
  Millis enabled_ms;  // max over consumed token timestamps
  Millis fired_ms;    // event timestamp for labeled, == enabled_ms for silent
};

struct ReplayResult {
  ReplayState state;
  std::vector<ReplayFiring> firings;
};

struct ReplayOptions {
  /// After the last event, fire the shortest silent sequence leading to
  /// the final marking (error if none exists). Used when replaying
  /// complete traces, e.g. for enrichment; prefix replay must leave the
  /// marking where the events ended.
  bool complete_to_final = false;
};

/// Replays events on the net from the initial marking, with source tokens
/// stamped at `start_ms`. Before each event the shortest silent firing
/// sequence (ties: lowest transition index) enabling the event's transition
/// is fired; token timestamps propagate through every firing. Throws
/// ReplayError naming the event index when no silent sequence can enable
/// the required label or the label is not in the net.
ReplayResult replay(const PetriNet& net, const std::vector<Event>& events, Millis start_ms,
                    const ReplayOptions& options = {});
ReplayResult replay(const PetriNet& net, const Trace& trace, const ReplayOptions& options = {});

/// Random-walk firing sequence check helpers live with the tests; here we
/// only expose deterministic semantics.

// --- interchange formats ---

/// Per-transition key/value annotations carried in PNML toolspecific
/// blocks (used for stochastic parameters).
using TransitionAnnotations = std::vector<std::map<std::string, std::string>>;

std::string write_pnml(const PetriNet& net, const TransitionAnnotations& annotations = {});

struct PnmlNet {
  PetriNet net;
  TransitionAnnotations annotations;
};

PnmlNet read_pnml(const std::string& xml);

std::string write_dot(const PetriNet& net);

}  // namespace remtime
