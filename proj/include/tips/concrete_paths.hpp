// Brute-force enumeration of feasible concrete executions of a task CFG.
// Deliberately independent of the graph abstraction: it walks basic blocks
// instruction by instruction, accumulating a clock from wcets and bus access
// latencies, and enforces loop bounds by counting back-edge traversals.
// Verification passes replay these paths against abstract results.
#ifndef TIPS_CONCRETE_PATHS_HPP
#define TIPS_CONCRETE_PATHS_HPP 1

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tips/cfg.hpp"
#include "tips/errors.hpp"

namespace tips {

inline const std::string kStartTip = "__start";
inline const std::string kEndTip = "__end";

inline std::string loop_head_tip_id(const std::string& header_block) {
  return "loop:" + header_block;
}

// One observable point along a concrete execution: the task start, a bus
// access point (dated after the instruction's own wcet, before its accesses),
// an arrival at a recorded loop header, or the task end.
struct TipOccurrence {
  std::string tip;
  Cycles date = 0;

  friend bool operator==(const TipOccurrence&, const TipOccurrence&) = default;
  friend bool operator<(const TipOccurrence& a, const TipOccurrence& b) {
    return std::tie(a.tip, a.date) < std::tie(b.tip, b.date);
  }
};

struct PathLimits {
  std::uint64_t max_paths = 200000;    // completed-path cap
  std::uint64_t max_steps = 20000000;  // total block-visit cap
  Cycles iter_clamp = ~Cycles{0};      // per-loop iteration clamp (unrolling limit)
};

// Loops that contain at least one bus-accessing instruction, straight from the
// annotations (these are the loops whose header arrivals stay observable).
inline std::set<int> loops_with_bus_access(const TaskCFG& cfg) {
  std::set<int> out;
  for (size_t l = 0; l < cfg.loops.size(); ++l) {
    bool found = false;
    for (const auto& b : cfg.blocks) {
      if (!cfg.loops[l].members.count(b.id)) continue;
      for (const auto& i : b.instructions)
        if (i.mem_class == MemClass::NotClassified) {
          found = true;
          break;
        }
      if (found) break;
    }
    if (found) out.insert(static_cast<int>(l));
  }
  return out;
}

// Calls f(occurrences) for every feasible concrete path of cfg. Occurrences
// always begin with (__start, 0) and end with (__end, total duration).
template <class F>
void for_each_concrete_path(const TaskCFG& cfg, const AnalysisConfig& conf,
                            const std::set<int>& recorded_loops, const PathLimits& lim, F&& f) {
  const LoopNesting nest = LoopNesting::build(cfg);
  std::map<std::string, const BasicBlock*> blocks;
  for (const auto& b : cfg.blocks) blocks[b.id] = &b;
  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& e : cfg.edges) succ[e.first].push_back(e.second);  // edges sorted -> deterministic

  std::vector<TipOccurrence> occs{{kStartTip, 0}};
  std::vector<std::pair<int, Cycles>> stack;  // loops containing the current block, outer->inner
  std::uint64_t paths = 0, steps = 0;

  auto effective_max = [&](int l) { return std::min(cfg.loops[l].max_iter, lim.iter_clamp); };

  auto walk = [&](auto&& self, const std::string& bid, Cycles clock) -> void {
    if (++steps > lim.max_steps)
      throw ExplosionError("concrete path search exceeded step cap in task '" + cfg.name + "'");
    const size_t occ_mark = occs.size();

    auto hl = nest.header_loop.find(bid);
    if (hl != nest.header_loop.end() && recorded_loops.count(hl->second))
      occs.push_back({loop_head_tip_id(bid), clock});

    for (const auto& i : blocks.at(bid)->instructions) {
      clock += i.wcet;
      if (i.mem_class == MemClass::NotClassified) {
        occs.push_back({i.id, clock});
        clock += i.max_accesses * conf.access_time;
      }
    }

    if (bid == cfg.exit) {
      occs.push_back({kEndTip, clock});
      f(static_cast<const std::vector<TipOccurrence>&>(occs));
      occs.pop_back();
      if (++paths > lim.max_paths)
        throw ExplosionError("concrete path count exceeded cap in task '" + cfg.name + "'");
      occs.resize(occ_mark);
      return;
    }

    const auto& chain_b = nest.chain_of(bid);
    auto it = succ.find(bid);
    if (it != succ.end()) {
      for (const auto& v : it->second) {
        const auto& chain_v = nest.chain_of(v);
        size_t common = 0;
        while (common < chain_b.size() && common < chain_v.size() &&
               chain_b[common] == chain_v[common])
          ++common;

        const auto saved_stack = stack;
        bool feasible = true;

        // Leaving loops, innermost first; each needs its minimum met. The
        // stack tail mirrors chain_b, so popping from the back lines up.
        for (size_t k = chain_b.size(); k > common && feasible; --k) {
          if (stack.back().second < cfg.loops[chain_b[k - 1]].min_iter)
            feasible = false;
          else
            stack.pop_back();
        }

        if (feasible) {
          auto hv = nest.header_loop.find(v);
          if (hv != nest.header_loop.end()) {
            const int l = hv->second;
            if (common == chain_v.size()) {
              // Back edge: one more completed iteration, bounded by max_iter.
              if (stack.back().second >= effective_max(l))
                feasible = false;
              else
                ++stack.back().second;
            } else {
              stack.emplace_back(l, 0);  // fresh activation
            }
          }
        }

        if (feasible) self(self, v, clock);
        stack = saved_stack;
      }
    }
    occs.resize(occ_mark);
  };

  walk(walk, cfg.entry, 0);
}

}  // namespace tips

#endif
