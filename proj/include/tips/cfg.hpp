// Control-flow model of one real-time task: basic blocks of timed
// instructions, an edge relation, and declared natural-loop annotations.
// Everything downstream (abstraction, trace enumeration, profiles) consumes
// the validated form produced here; validation is total and rejects anything
// it cannot prove well-formed.
#ifndef TIPS_CFG_HPP
#define TIPS_CFG_HPP 1

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tips/errors.hpp"

namespace tips {

using Cycles = std::uint64_t;

// Private-cache classification of a memory instruction. Only NotClassified
// instructions can reach the shared bus and become points of interest.
enum class MemClass { AlwaysHit, NotClassified, NonMemory };

inline const char* to_string(MemClass m) {
  switch (m) {
    case MemClass::AlwaysHit: return "AlwaysHit";
    case MemClass::NotClassified: return "NotClassified";
    case MemClass::NonMemory: return "NonMemory";
  }
  return "?";
}

struct Instruction {
  std::string id;
  Cycles wcet = 0;             // pipeline cost, excludes bus access time
  MemClass mem_class = MemClass::NonMemory;
  Cycles max_accesses = 0;     // worst-case bus accesses; >0 iff NotClassified

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct BasicBlock {
  std::string id;
  std::vector<Instruction> instructions;  // program order, never empty

  friend bool operator==(const BasicBlock&, const BasicBlock&) = default;
};

inline Cycles block_wcet(const BasicBlock& b) {
  Cycles sum = 0;
  for (const auto& i : b.instructions) sum += i.wcet;
  return sum;
}

using Edge = std::pair<std::string, std::string>;

struct LoopInfo {
  std::string header;
  std::set<std::string> members;  // includes header and all nested members
  std::set<Edge> back_edges;      // edges (src, header) with src in members
  std::set<Edge> exit_edges;      // edges leaving members
  Cycles min_iter = 0;            // iteration = one back-edge traversal
  Cycles max_iter = 1;

  friend bool operator==(const LoopInfo&, const LoopInfo&) = default;
};

struct TaskCFG {
  std::string name;
  std::vector<BasicBlock> blocks;  // input order preserved
  std::vector<Edge> edges;         // sorted, unique
  std::string entry;
  std::string exit;
  std::vector<LoopInfo> loops;     // sorted by header id

  const BasicBlock* find_block(const std::string& id) const {
    for (const auto& b : blocks)
      if (b.id == id) return &b;
    return nullptr;
  }

  friend bool operator==(const TaskCFG&, const TaskCFG&) = default;
};

struct AnalysisConfig {
  Cycles access_time = 1;             // cycles per bus access
  Cycles delta = 0;                   // fusion granularity
  std::uint64_t max_traces = 1000000; // enumeration guard
  Cycles bus_access_latency = 1;      // interference cost; defaults to access_time at load

  friend bool operator==(const AnalysisConfig&, const AnalysisConfig&) = default;
};

// Static assignment of one task to a core with a fixed release date.
struct Placement {
  std::string task;
  std::uint32_t core = 0;
  Cycles release = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

// A whole loaded analysis input.
struct TaskSystem {
  AnalysisConfig config;
  std::vector<TaskCFG> tasks;          // sorted by name
  std::vector<Placement> placements;   // one per task (defaulted when absent)

  friend bool operator==(const TaskSystem&, const TaskSystem&) = default;
};

// Puts edges/loops into their canonical order so that structural equality and
// serialization are input-order independent.
inline void normalize(TaskCFG& cfg) {
  std::sort(cfg.edges.begin(), cfg.edges.end());
  cfg.edges.erase(std::unique(cfg.edges.begin(), cfg.edges.end()), cfg.edges.end());
  std::sort(cfg.loops.begin(), cfg.loops.end(),
            [](const LoopInfo& a, const LoopInfo& b) { return a.header < b.header; });
}

// Loop containment forest plus per-block membership chains. Built after (and
// relied on by) validation; ordering inside chains is outermost first.
struct LoopNesting {
  std::vector<int> parent;                              // -1 for roots
  std::vector<std::vector<int>> children;
  std::vector<int> roots;
  std::map<std::string, std::vector<int>> block_chain;  // block -> enclosing loops, outer->inner
  std::map<std::string, int> header_loop;               // header block -> loop index

  static LoopNesting build(const TaskCFG& cfg) {
    const int n = static_cast<int>(cfg.loops.size());
    LoopNesting nest;
    nest.parent.assign(n, -1);
    nest.children.assign(n, {});
    // Parent = smallest strictly containing loop (member sets are validated
    // to be disjoint or nested, so "smallest superset" is well defined).
    for (int i = 0; i < n; ++i) {
      int best = -1;
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const auto& mi = cfg.loops[i].members;
        const auto& mj = cfg.loops[j].members;
        if (mi.size() < mj.size() &&
            std::includes(mj.begin(), mj.end(), mi.begin(), mi.end())) {
          if (best < 0 || cfg.loops[j].members.size() < cfg.loops[best].members.size()) best = j;
        }
      }
      nest.parent[i] = best;
    }
    for (int i = 0; i < n; ++i) {
      if (nest.parent[i] >= 0)
        nest.children[nest.parent[i]].push_back(i);
      else
        nest.roots.push_back(i);
    }
    for (int i = 0; i < n; ++i) nest.header_loop[cfg.loops[i].header] = i;
    for (const auto& b : cfg.blocks) {
      std::vector<int> chain;
      int innermost = -1;
      for (int i = 0; i < n; ++i) {
        if (cfg.loops[i].members.count(b.id) &&
            (innermost < 0 || cfg.loops[i].members.size() < cfg.loops[innermost].members.size()))
          innermost = i;
      }
      for (int l = innermost; l >= 0; l = nest.parent[l]) chain.push_back(l);
      std::reverse(chain.begin(), chain.end());
      nest.block_chain[b.id] = std::move(chain);
    }
    return nest;
  }

  const std::vector<int>& chain_of(const std::string& block) const {
    static const std::vector<int> empty;
    auto it = block_chain.find(block);
    return it == block_chain.end() ? empty : it->second;
  }
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

inline std::string edge_str(const Edge& e) { return e.first + "->" + e.second; }

}  // namespace detail

inline void validate_config(const AnalysisConfig& c) {
  detail::require(c.access_time > 0, "config: access_time must be positive");
  detail::require(c.max_traces > 0, "config: max_traces must be positive");
  detail::require(c.bus_access_latency > 0, "config: bus_access_latency must be positive");
}

// Full structural validation of one task. Throws ValidationError naming the
// violated invariant and the offending entity.
inline void validate_task(const TaskCFG& cfg) {
  using detail::edge_str;
  using detail::require;
  const std::string t = "task '" + cfg.name + "': ";

  require(!cfg.name.empty(), "task with empty name");
  require(!cfg.blocks.empty(), t + "no basic blocks");

  std::set<std::string> block_ids;
  std::set<std::string> instr_ids;
  for (const auto& b : cfg.blocks) {
    require(!b.id.empty(), t + "block with empty id");
    require(block_ids.insert(b.id).second, t + "duplicate block id '" + b.id + "'");
    require(!b.instructions.empty(), t + "empty basic block '" + b.id + "'");
    for (const auto& i : b.instructions) {
      require(!i.id.empty(), t + "instruction with empty id in block '" + b.id + "'");
      require(i.id.rfind("__", 0) != 0 && i.id.rfind("loop:", 0) != 0,
              t + "reserved instruction id '" + i.id + "'");
      require(instr_ids.insert(i.id).second, t + "duplicate instruction id '" + i.id + "'");
      if (i.mem_class == MemClass::NotClassified)
        require(i.max_accesses >= 1,
                t + "instruction '" + i.id + "' is NotClassified but max_accesses is 0");
      else
        require(i.max_accesses == 0,
                t + "instruction '" + i.id + "' has max_accesses > 0 but is not NotClassified");
    }
  }

  require(block_ids.count(cfg.entry), t + "entry block '" + cfg.entry + "' does not exist");
  require(block_ids.count(cfg.exit), t + "exit block '" + cfg.exit + "' does not exist");

  std::map<std::string, std::vector<std::string>> succ, pred;
  for (const auto& e : cfg.edges) {
    require(block_ids.count(e.first), t + "edge " + edge_str(e) + " from unknown block");
    require(block_ids.count(e.second), t + "edge " + edge_str(e) + " to unknown block");
    succ[e.first].push_back(e.second);
    pred[e.second].push_back(e.first);
  }
  require(pred[cfg.entry].empty(), t + "entry block '" + cfg.entry + "' has incoming edges");
  require(succ[cfg.exit].empty(), t + "exit block '" + cfg.exit + "' has outgoing edges");

  // Reachability: entry reaches everything, everything reaches exit.
  auto bfs = [&](const std::string& from, const std::map<std::string, std::vector<std::string>>& adj) {
    std::set<std::string> seen{from};
    std::deque<std::string> q{from};
    while (!q.empty()) {
      auto u = q.front();
      q.pop_front();
      auto it = adj.find(u);
      if (it == adj.end()) continue;
      for (const auto& v : it->second)
        if (seen.insert(v).second) q.push_back(v);
    }
    return seen;
  };
  const auto fwd = bfs(cfg.entry, succ);
  const auto bwd = bfs(cfg.exit, pred);
  for (const auto& b : cfg.blocks) {
    require(fwd.count(b.id), t + "block '" + b.id + "' not reachable from entry");
    require(bwd.count(b.id), t + "exit not reachable from block '" + b.id + "'");
  }

  const std::set<Edge> edge_set(cfg.edges.begin(), cfg.edges.end());
  std::set<Edge> all_back;
  std::set<std::string> headers;
  for (const auto& L : cfg.loops) {
    const std::string lt = t + "loop '" + L.header + "': ";
    require(block_ids.count(L.header), lt + "header does not exist");
    require(headers.insert(L.header).second, t + "duplicate loop header '" + L.header + "'");
    require(L.members.count(L.header), lt + "header not in members");
    for (const auto& m : L.members)
      require(block_ids.count(m), lt + "member '" + m + "' does not exist");
    require(!L.members.count(cfg.entry), lt + "entry block inside loop members");
    require(!L.members.count(cfg.exit), lt + "exit block inside loop members");
    require(L.max_iter >= 1, lt + "max_iter must be positive");
    require(L.min_iter <= L.max_iter,
            lt + "inverted loop bounds (min_iter " + std::to_string(L.min_iter) +
                " > max_iter " + std::to_string(L.max_iter) + ")");
    require(!L.back_edges.empty(), lt + "no back edges");
    for (const auto& e : L.back_edges) {
      require(edge_set.count(e), lt + "back edge " + edge_str(e) + " not a CFG edge");
      require(e.second == L.header, lt + "back edge " + edge_str(e) + " does not target header");
      require(L.members.count(e.first), lt + "back edge source '" + e.first + "' outside members");
      require(all_back.insert(e).second,
              lt + "back edge " + edge_str(e) + " claimed by two loops");
    }
    // Declared exits must be exactly the edges leaving the member set.
    std::set<Edge> computed_exits;
    for (const auto& e : cfg.edges)
      if (L.members.count(e.first) && !L.members.count(e.second)) computed_exits.insert(e);
    require(L.exit_edges == computed_exits,
            lt + "declared exit_edges differ from the edges leaving the loop");
    // The only way into the loop from outside is through the header.
    for (const auto& e : cfg.edges)
      if (!L.members.count(e.first) && L.members.count(e.second))
        require(e.second == L.header,
                lt + "edge " + edge_str(e) + " enters the loop bypassing its header");
    // Every member is reachable from the header without leaving the loop.
    std::set<std::string> seen{L.header};
    std::deque<std::string> q{L.header};
    while (!q.empty()) {
      auto u = q.front();
      q.pop_front();
      auto it = succ.find(u);
      if (it == succ.end()) continue;
      for (const auto& v : it->second)
        if (L.members.count(v) && seen.insert(v).second) q.push_back(v);
    }
    for (const auto& m : L.members)
      require(seen.count(m), lt + "member '" + m + "' not reachable from header inside the loop");
  }

  // Nesting forms a forest: member sets pairwise disjoint or nested.
  for (size_t i = 0; i < cfg.loops.size(); ++i) {
    for (size_t j = i + 1; j < cfg.loops.size(); ++j) {
      const auto& a = cfg.loops[i].members;
      const auto& b = cfg.loops[j].members;
      std::vector<std::string> common;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
      const bool disjoint = common.empty();
      const bool nested = common.size() == std::min(a.size(), b.size());
      require(disjoint || nested,
              t + "loops '" + cfg.loops[i].header + "' and '" + cfg.loops[j].header +
                  "' overlap without nesting");
    }
  }

  // Removing all declared back edges must leave the graph acyclic; otherwise
  // some cycle is not covered by any loop annotation.
  {
    std::map<std::string, int> indeg;
    std::map<std::string, std::vector<std::string>> fsucc;
    for (const auto& b : cfg.blocks) indeg[b.id] = 0;
    for (const auto& e : cfg.edges) {
      if (all_back.count(e)) continue;
      fsucc[e.first].push_back(e.second);
      ++indeg[e.second];
    }
    std::deque<std::string> q;
    for (auto& [id, d] : indeg)
      if (d == 0) q.push_back(id);
    size_t visited = 0;
    while (!q.empty()) {
      auto u = q.front();
      q.pop_front();
      ++visited;
      for (const auto& v : fsucc[u])
        if (--indeg[v] == 0) q.push_back(v);
    }
    if (visited != cfg.blocks.size()) {
      std::string on_cycle;
      for (auto& [id, d] : indeg)
        if (d > 0) {
          on_cycle = id;
          break;
        }
      throw ValidationError(t + "cycle through block '" + on_cycle +
                            "' not covered by any declared loop");
    }
  }
}

inline void validate_system(const TaskSystem& sys) {
  validate_config(sys.config);
  std::set<std::string> names;
  for (const auto& task : sys.tasks) {
    detail::require(names.insert(task.name).second,
                    "duplicate task name '" + task.name + "'");
    validate_task(task);
  }
  // Placements are optional (the scheduler derives a default layout when the
  // list is empty) but when given they must cover every task exactly once.
  std::set<std::string> placed;
  for (const auto& p : sys.placements) {
    detail::require(names.count(p.task), "placement for unknown task '" + p.task + "'");
    detail::require(placed.insert(p.task).second,
                    "duplicate placement for task '" + p.task + "'");
  }
  detail::require(sys.placements.empty() || placed.size() == names.size(),
                  "placements must cover every task exactly once");
}

}  // namespace tips

#endif
