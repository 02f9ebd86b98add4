#include "remtime/discovery.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <sstream>

namespace remtime {

DirectlyFollowsGraph build_dfg(const EventLog& log) {
  if (log.empty()) throw std::invalid_argument("build_dfg: empty log");
  DirectlyFollowsGraph dfg;
  dfg.nodes = log.vocabulary();
  for (const auto& trace : log.traces()) {
    dfg.start_activities[trace.events.front().activity] += 1;
    dfg.end_activities[trace.events.back().activity] += 1;
    for (std::size_t i = 0; i + 1 < trace.events.size(); ++i) {
      dfg.edges[{trace.events[i].activity, trace.events[i + 1].activity}] += 1;
    }
  }
  return dfg;
}

// --- process tree ---

ProcessTree ProcessTree::leaf(std::string label) {
  ProcessTree t;
  t.kind = Kind::Activity;
  t.activity = std::move(label);
  return t;
}

ProcessTree ProcessTree::silent() { return ProcessTree{}; }

ProcessTree ProcessTree::make(Kind kind, std::vector<ProcessTree> children) {
  ProcessTree t;
  t.kind = kind;
  t.children = std::move(children);
  return t;
}

std::string ProcessTree::to_string() const {
  switch (kind) {
    case Kind::Activity: return activity;
    case Kind::Silent: return "tau";
    default: break;
  }
  const char* op = kind == Kind::Sequence ? "seq"
                   : kind == Kind::Xor   ? "xor"
                   : kind == Kind::Parallel ? "par"
                                            : "loop";
  std::ostringstream out;
  out << op << '(';
  for (std::size_t i = 0; i < children.size(); ++i) {
    if (i) out << ", ";
    out << children[i].to_string();
  }
  out << ')';
  return out.str();
}

// --- inductive miner ---

namespace {

// Recursion works on integer-encoded traces over the log vocabulary.
using IntTrace = std::vector<int>;
using Sublog = std::vector<IntTrace>;

struct Dfg {
  std::vector<int> alphabet;  // sorted global activity ids
  std::set<std::pair<int, int>> edges;
  std::set<int> starts;
  std::set<int> ends;

  bool has_edge(int a, int b) const { return edges.count({a, b}) > 0; }
};

Dfg make_dfg(const Sublog& sublog) {
  Dfg dfg;
  std::set<int> alphabet;
  for (const auto& trace : sublog) {
    alphabet.insert(trace.begin(), trace.end());
    dfg.starts.insert(trace.front());
    dfg.ends.insert(trace.back());
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
      dfg.edges.insert({trace[i], trace[i + 1]});
    }
  }
  dfg.alphabet.assign(alphabet.begin(), alphabet.end());
  return dfg;
}

using Partition = std::vector<std::vector<int>>;

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Groups union-find classes into partitions sorted by smallest member
// (global ids follow lexicographic label order, so ties are lexicographic).
Partition collect_groups(const std::vector<int>& alphabet, UnionFind& uf) {
  std::map<int, std::vector<int>> groups;
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    groups[uf.find(static_cast<int>(i))].push_back(alphabet[i]);
  }
  Partition partition;
  std::vector<std::pair<int, std::vector<int>>> ordered;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    ordered.emplace_back(members.front(), std::move(members));
  }
  std::sort(ordered.begin(), ordered.end());
  for (auto& [min_id, members] : ordered) partition.push_back(std::move(members));
  return partition;
}

std::optional<Partition> xor_cut(const Dfg& dfg) {
  const auto& alphabet = dfg.alphabet;
  std::map<int, int> local;  // activity id -> position in alphabet
  for (std::size_t i = 0; i < alphabet.size(); ++i) local[alphabet[i]] = static_cast<int>(i);
  UnionFind uf(alphabet.size());
  for (const auto& [a, b] : dfg.edges) uf.unite(local[a], local[b]);
  Partition partition = collect_groups(alphabet, uf);
  if (partition.size() < 2) return std::nullopt;
  return partition;
}

std::optional<Partition> sequence_cut(const Dfg& dfg) {
  const auto& alphabet = dfg.alphabet;
  const std::size_t n = alphabet.size();
  std::map<int, int> local;
  for (std::size_t i = 0; i < n; ++i) local[alphabet[i]] = static_cast<int>(i);

  // Transitive closure of the directly-follows relation.
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (const auto& [a, b] : dfg.edges) reach[local[a]][local[b]] = true;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[k][j]) reach[i][j] = true;
      }
    }
  }

  // Merge mutually reachable pairs (same SCC) and mutually unreachable
  // pairs (no order between them).
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (reach[i][j] == reach[j][i]) uf.unite(static_cast<int>(i), static_cast<int>(j));
    }
  }
  Partition partition = collect_groups(alphabet, uf);
  if (partition.size() < 2) return std::nullopt;

  // Order groups by how many other groups reach them; the cut is valid
  // only if that yields a strict total order.
  auto group_reaches = [&](const std::vector<int>& from, const std::vector<int>& to) {
    for (int a : from) {
      for (int b : to) {
        if (reach[local.at(a)][local.at(b)]) return true;
      }
    }
    return false;
  };
  std::vector<std::pair<std::size_t, std::size_t>> order;  // (#predecessors, group index)
  for (std::size_t i = 0; i < partition.size(); ++i) {
    std::size_t predecessors = 0;
    for (std::size_t j = 0; j < partition.size(); ++j) {
      if (j != i && group_reaches(partition[j], partition[i])) ++predecessors;
    }
    order.emplace_back(predecessors, i);
  }
  std::sort(order.begin(), order.end());
  Partition sorted;
  for (const auto& [rank, i] : order) sorted.push_back(partition[i]);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (!group_reaches(sorted[i], sorted[j]) || group_reaches(sorted[j], sorted[i])) {
        return std::nullopt;
      }
    }
  }
  return sorted;
}

std::optional<Partition> parallel_cut(const Dfg& dfg) {
  const auto& alphabet = dfg.alphabet;
  const std::size_t n = alphabet.size();
  std::map<int, int> local;
  for (std::size_t i = 0; i < n; ++i) local[alphabet[i]] = static_cast<int>(i);

  // Connect activities that cannot be concurrent (missing a mutual edge).
  UnionFind uf(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int a = alphabet[i], b = alphabet[j];
      if (!(dfg.has_edge(a, b) && dfg.has_edge(b, a))) {
        uf.unite(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  Partition partition = collect_groups(alphabet, uf);
  if (partition.size() < 2) return std::nullopt;
  for (const auto& component : partition) {
    bool has_start = false, has_end = false;
    for (int a : component) {
      has_start |= dfg.starts.count(a) > 0;
      has_end |= dfg.ends.count(a) > 0;
    }
    if (!has_start || !has_end) return std::nullopt;
  }
  return partition;
}

std::optional<Partition> loop_cut(const Dfg& dfg) {
  const auto& alphabet = dfg.alphabet;
  std::set<int> body(dfg.starts.begin(), dfg.starts.end());
  body.insert(dfg.ends.begin(), dfg.ends.end());
  if (body.size() == alphabet.size()) return std::nullopt;

  // Candidate redo components: connectivity among non-body activities.
  std::vector<int> rest;
  for (int a : alphabet) {
    if (!body.count(a)) rest.push_back(a);
  }
  std::map<int, int> rest_local;
  for (std::size_t i = 0; i < rest.size(); ++i) rest_local[rest[i]] = static_cast<int>(i);
  UnionFind uf(rest.size());
  for (const auto& [a, b] : dfg.edges) {
    if (rest_local.count(a) && rest_local.count(b)) uf.unite(rest_local[a], rest_local[b]);
  }
  Partition candidates = collect_groups(rest, uf);

  // A redo component may only be entered from end activities (and from all
  // of them at each entry point) and may only lead back to start
  // activities (all of them from each exit point). Invalid components are
  // absorbed into the body, which can invalidate others: iterate to a
  // fixpoint.
  std::vector<bool> is_redo(candidates.size(), true);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (!is_redo[c]) continue;
      std::set<int> members(candidates[c].begin(), candidates[c].end());
      bool valid = true;
      for (const auto& [a, b] : dfg.edges) {
        const bool a_in = members.count(a) > 0, b_in = members.count(b) > 0;
        if (!a_in && b_in && !dfg.ends.count(a)) valid = false;
        if (a_in && !b_in && !dfg.starts.count(b)) valid = false;
        if (!valid) break;
      }
      if (valid) {
        for (int m : members) {
          for (int e : dfg.ends) {
            if (dfg.has_edge(e, m)) {
              for (int e2 : dfg.ends) {
                if (!dfg.has_edge(e2, m)) valid = false;
              }
              break;
            }
          }
          for (int s : dfg.starts) {
            if (dfg.has_edge(m, s)) {
              for (int s2 : dfg.starts) {
                if (!dfg.has_edge(m, s2)) valid = false;
              }
              break;
            }
          }
        }
      }
      if (!valid) {
        body.insert(candidates[c].begin(), candidates[c].end());
        is_redo[c] = false;
        changed = true;
      }
    }
  }

  Partition partition;
  partition.emplace_back(body.begin(), body.end());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (is_redo[c]) partition.push_back(candidates[c]);
  }
  if (partition.size() < 2) return std::nullopt;
  return partition;
}

// --- log splitting per cut ---

std::vector<Sublog> split_xor(const Sublog& sublog, const Partition& partition) {
  std::vector<std::set<int>> member(partition.size());
  for (std::size_t i = 0; i < partition.size(); ++i) {
    member[i].insert(partition[i].begin(), partition[i].end());
  }
  std::vector<Sublog> parts(partition.size());
  for (const auto& trace : sublog) {
    std::size_t target = 0;
    for (std::size_t i = 0; i < partition.size(); ++i) {
      if (member[i].count(trace.front())) {
        target = i;
        break;
      }
    }
    IntTrace projected;
    for (int a : trace) {
      if (member[target].count(a)) projected.push_back(a);
    }
    parts[target].push_back(std::move(projected));
  }
  return parts;
}

std::vector<Sublog> split_project(const Sublog& sublog, const Partition& partition) {
  std::vector<std::set<int>> member(partition.size());
  for (std::size_t i = 0; i < partition.size(); ++i) {
    member[i].insert(partition[i].begin(), partition[i].end());
  }
  std::vector<Sublog> parts(partition.size());
  for (const auto& trace : sublog) {
    for (std::size_t i = 0; i < partition.size(); ++i) {
      IntTrace projected;
      for (int a : trace) {
        if (member[i].count(a)) projected.push_back(a);
      }
      parts[i].push_back(std::move(projected));
    }
  }
  return parts;
}

std::vector<Sublog> split_loop(const Sublog& sublog, const Partition& partition) {
  std::vector<std::set<int>> member(partition.size());
  for (std::size_t i = 0; i < partition.size(); ++i) {
    member[i].insert(partition[i].begin(), partition[i].end());
  }
  auto part_of = [&](int a) {
    for (std::size_t i = 0; i < partition.size(); ++i) {
      if (member[i].count(a)) return i;
    }
    return std::size_t{0};
  };
  std::vector<Sublog> parts(partition.size());
  for (const auto& trace : sublog) {
    std::size_t current = part_of(trace.front());
    IntTrace segment;
    for (int a : trace) {
      const std::size_t p = part_of(a);
      if (p != current) {
        parts[current].push_back(std::move(segment));
        segment.clear();
        current = p;
      }
      segment.push_back(a);
    }
    parts[current].push_back(std::move(segment));
  }
  return parts;
}

ProcessTree mine(const Sublog& sublog, const std::vector<std::string>& vocabulary);

ProcessTree mine_children(ProcessTree::Kind kind, const std::vector<Sublog>& parts,
                          const std::vector<std::string>& vocabulary) {
  std::vector<ProcessTree> children;
  children.reserve(parts.size());
  for (const auto& part : parts) children.push_back(mine(part, vocabulary));
  return ProcessTree::make(kind, std::move(children));
}

ProcessTree mine(const Sublog& sublog, const std::vector<std::string>& vocabulary) {
  const bool all_empty =
      std::all_of(sublog.begin(), sublog.end(), [](const IntTrace& t) { return t.empty(); });
  if (sublog.empty() || all_empty) return ProcessTree::silent();

  const bool any_empty =
      std::any_of(sublog.begin(), sublog.end(), [](const IntTrace& t) { return t.empty(); });
  if (any_empty) {
    Sublog non_empty;
    for (const auto& t : sublog) {
      if (!t.empty()) non_empty.push_back(t);
    }
    return ProcessTree::make(ProcessTree::Kind::Xor,
                             {ProcessTree::silent(), mine(non_empty, vocabulary)});
  }

  Dfg dfg = make_dfg(sublog);
  if (dfg.alphabet.size() == 1) {
    const std::string& label = vocabulary[static_cast<std::size_t>(dfg.alphabet[0])];
    const bool all_singleton =
        std::all_of(sublog.begin(), sublog.end(), [](const IntTrace& t) { return t.size() == 1; });
    if (all_singleton) return ProcessTree::leaf(label);
    return ProcessTree::make(ProcessTree::Kind::Loop,
                             {ProcessTree::leaf(label), ProcessTree::silent()});
  }

  if (auto cut = xor_cut(dfg)) {
    return mine_children(ProcessTree::Kind::Xor, split_xor(sublog, *cut), vocabulary);
  }
  if (auto cut = sequence_cut(dfg)) {
    return mine_children(ProcessTree::Kind::Sequence, split_project(sublog, *cut), vocabulary);
  }
  if (auto cut = parallel_cut(dfg)) {
    return mine_children(ProcessTree::Kind::Parallel, split_project(sublog, *cut), vocabulary);
  }
  if (auto cut = loop_cut(dfg)) {
    return mine_children(ProcessTree::Kind::Loop, split_loop(sublog, *cut), vocabulary);
  }

  // Flower model over the alphabet.
  std::vector<ProcessTree> leaves;
  for (int a : dfg.alphabet) {
    leaves.push_back(ProcessTree::leaf(vocabulary[static_cast<std::size_t>(a)]));
  }
  return ProcessTree::make(
      ProcessTree::Kind::Loop,
      {ProcessTree::silent(), ProcessTree::make(ProcessTree::Kind::Xor, std::move(leaves))});
}

}  // namespace

ProcessTree inductive_miner(const EventLog& log) {
  if (log.empty()) throw std::invalid_argument("inductive_miner: empty log");
  Sublog sublog;
  sublog.reserve(log.size());
  for (const auto& trace : log.traces()) {
    IntTrace encoded;
    encoded.reserve(trace.size());
    for (const auto& event : trace.events) {
      encoded.push_back(log.activity_index(event.activity));
    }
    sublog.push_back(std::move(encoded));
  }
  return mine(sublog, log.vocabulary());
}

// --- tree to net ---

namespace {

void build_fragment(const ProcessTree& tree, PetriNet& net, int entry, int exit) {
  switch (tree.kind) {
    case ProcessTree::Kind::Activity: {
      const int t = net.add_transition(tree.activity);
      net.add_arc_place_to_transition(entry, t);
      net.add_arc_transition_to_place(t, exit);
      return;
    }
    case ProcessTree::Kind::Silent: {
      const int t = net.add_transition();
      net.add_arc_place_to_transition(entry, t);
      net.add_arc_transition_to_place(t, exit);
      return;
    }
    case ProcessTree::Kind::Sequence: {
      int at = entry;
      for (std::size_t i = 0; i < tree.children.size(); ++i) {
        const int next = (i + 1 == tree.children.size()) ? exit : net.add_place();
        build_fragment(tree.children[i], net, at, next);
        at = next;
      }
      return;
    }
    case ProcessTree::Kind::Xor: {
      for (const auto& child : tree.children) build_fragment(child, net, entry, exit);
      return;
    }
    case ProcessTree::Kind::Parallel: {
      const int split = net.add_transition();
      const int join = net.add_transition();
      net.add_arc_place_to_transition(entry, split);
      net.add_arc_transition_to_place(join, exit);
      for (const auto& child : tree.children) {
        const int in = net.add_place();
        const int out = net.add_place();
        net.add_arc_transition_to_place(split, in);
        net.add_arc_place_to_transition(out, join);
        build_fragment(child, net, in, out);
      }
      return;
    }
    case ProcessTree::Kind::Loop: {
      const int enter = net.add_transition();
      const int leave = net.add_transition();
      const int in = net.add_place();
      const int out = net.add_place();
      net.add_arc_place_to_transition(entry, enter);
      net.add_arc_transition_to_place(enter, in);
      net.add_arc_place_to_transition(out, leave);
      net.add_arc_transition_to_place(leave, exit);
      build_fragment(tree.children.front(), net, in, out);
      // Each redo part starts with its own silent transition, so the
      // exit-vs-redo decision at `out` is a choice among weighted
      // immediates rather than a preempted race.
      for (std::size_t i = 1; i < tree.children.size(); ++i) {
        const int redo = net.add_transition();
        const int redo_in = net.add_place();
        net.add_arc_place_to_transition(out, redo);
        net.add_arc_transition_to_place(redo, redo_in);
        build_fragment(tree.children[i], net, redo_in, in);
      }
      return;
    }
  }
}

}  // namespace

PetriNet tree_to_petri(const ProcessTree& tree) {
  PetriNet net;
  const int source = net.add_place("source");
  const int sink = net.add_place("sink");
  build_fragment(tree, net, source, sink);
  Marking initial(net.place_count(), 0);
  Marking final_marking(net.place_count(), 0);
  initial[static_cast<std::size_t>(source)] = 1;
  final_marking[static_cast<std::size_t>(sink)] = 1;
  net.set_initial_marking(std::move(initial));
  net.set_final_marking(std::move(final_marking));
  net.assert_unique_labels();
  return net;
}

}  // namespace remtime
