#pragma once

#include <map>
#include <string>
#include <vector>

#include "remtime/event_log.hpp"
#include "remtime/petri.hpp"

namespace remtime {

struct DirectlyFollowsGraph {
  std::vector<std::string> nodes;  // lexicographic
  std::map<std::pair<std::string, std::string>, std::size_t> edges;
  std::map<std::string, std::size_t> start_activities;
  std::map<std::string, std::size_t> end_activities;
};

/// Adjacent-pair counts per trace, plus first/last activity counts.
DirectlyFollowsGraph build_dfg(const EventLog& log);

/// Operator tree over activity leaves. Loop nodes have the body first and
/// one or more redo children.
struct ProcessTree {
  enum class Kind { Activity, Silent, Sequence, Xor, Parallel, Loop };

  Kind kind = Kind::Silent;
  std::string activity;  // Kind::Activity only
  std::vector<ProcessTree> children;

  static ProcessTree leaf(std::string label);
  static ProcessTree silent();
  static ProcessTree make(Kind kind, std::vector<ProcessTree> children);

  /// Compact notation: seq(A, xor(B, tau)).
  std::string to_string() const;

  friend bool operator==(const ProcessTree&, const ProcessTree&) = default;
};

/// Basic Inductive Miner: recursive cut detection on the directly-follows
/// graph in the order exclusive-choice, sequence, parallel, loop, with the
/// flower model as fall-through. The result fits every trace of the log.
/// Throws std::invalid_argument on an empty log.
ProcessTree inductive_miner(const EventLog& log);

/// Recursive construction of a sound workflow net; every visible leaf
/// becomes exactly one labeled transition.
PetriNet tree_to_petri(const ProcessTree& tree);

}  // namespace remtime
