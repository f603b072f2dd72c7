// Seeded generator of small well-formed task CFGs for property tests.
// Tasks are valid by construction: reducible single-entry/single-exit graphs
// assembled from sequential chains, diamonds, and while-style loops with
// declared bounds. Shape parameters are tuned so that the number of concrete
// paths stays small enough for brute-force verification. The same seed always
// yields the same task.
#ifndef TIPS_TESTUTIL_RANDOM_TASK_HPP
#define TIPS_TESTUTIL_RANDOM_TASK_HPP 1

#include <cstdint>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tips/cfg.hpp"

namespace tips::testutil {

class TaskGen {
 public:
  explicit TaskGen(std::uint64_t seed) : rng_(seed) {}

  TaskCFG operator()(const std::string& name) {
    cfg_ = TaskCFG{};
    cfg_.name = name;
    next_block_ = 0;
    next_instr_ = 0;
    loops_made_ = 0;
    open_loops_.clear();

    const std::string entry = make_block(false);
    cfg_.entry = entry;
    const std::string out = chain(entry, 0);
    const std::string exit = make_block(true);
    cfg_.exit = exit;
    link(out, exit);

    finalize_loops();
    normalize(cfg_);
    return cfg_;
  }

 private:
  std::mt19937_64 rng_;
  TaskCFG cfg_;
  int next_block_ = 0;
  int next_instr_ = 0;
  int loops_made_ = 0;
  // Indices into cfg_.loops of loops whose member sets are still growing.
  std::vector<size_t> open_loops_;

  Cycles pick(Cycles lo, Cycles hi) {
    return std::uniform_int_distribution<Cycles>(lo, hi)(rng_);
  }

  std::string make_block(bool force_positive_tail) {
    BasicBlock b;
    b.id = "b" + std::to_string(next_block_++);
    const int n = static_cast<int>(pick(1, 3));
    for (int k = 0; k < n; ++k) {
      Instruction i;
      i.id = "i" + std::to_string(next_instr_++);
      i.wcet = pick(0, 50);
      if (pick(0, 99) < 30) {
        i.mem_class = MemClass::NotClassified;
        i.max_accesses = pick(1, 3);
      } else {
        i.mem_class = pick(0, 1) ? MemClass::AlwaysHit : MemClass::NonMemory;
      }
      b.instructions.push_back(std::move(i));
    }
    // A strictly positive final wcet keeps the tail cost of the block
    // mutable downward, which edge-weight mutation tests rely on.
    if (force_positive_tail && b.instructions.back().wcet == 0)
      b.instructions.back().wcet = 1;
    for (size_t l : open_loops_) cfg_.loops[l].members.insert(b.id);
    cfg_.blocks.push_back(b);
    return b.id;
  }

  void link(const std::string& a, const std::string& b) { cfg_.edges.emplace_back(a, b); }

  // Appends a fragment after `from`; returns the fragment's last block.
  std::string chain(const std::string& from, int depth) {
    std::string cur = from;
    const int parts = static_cast<int>(pick(1, 2));
    for (int p = 0; p < parts; ++p) {
      std::string head, tail;
      const Cycles roll = pick(0, 99);
      if (depth == 0 && loops_made_ < 2 && roll < 35) {
        std::tie(head, tail) = while_loop();
      } else if (depth < 2 && roll < 70) {
        std::tie(head, tail) = diamond(depth);
      } else {
        head = tail = make_block(false);
      }
      link(cur, head);
      cur = tail;
    }
    return cur;
  }

  std::pair<std::string, std::string> diamond(int depth) {
    const std::string split = make_block(false);
    const std::string a_out = chain(split, depth + 1);
    const std::string b_out = chain(split, depth + 1);
    const std::string join = make_block(false);
    link(a_out, join);
    link(b_out, join);
    return {split, join};
  }

  // while-style loop: the header tests, the body runs and returns via the
  // back edge, and the sole exits leave from the header itself. Bodies are
  // linear (plus at most one directly nested loop) to bound path counts.
  std::pair<std::string, std::string> while_loop() {
    const size_t idx = open_loop();
    const std::string header = make_block(false);
    cfg_.loops[idx].header = header;

    std::string cur = header;
    if (loops_made_ < 2 && pick(0, 99) < 40) {
      if (pick(0, 1)) cur = straight(cur);
      const size_t inner = open_loop();
      const std::string ih = make_block(false);
      cfg_.loops[inner].header = ih;
      link(cur, ih);
      const std::string ib = straight(ih);
      link(ib, ih);
      cfg_.loops[inner].back_edges.insert({ib, ih});
      open_loops_.pop_back();
      cur = ih;
      if (pick(0, 1)) cur = straight(cur);
    } else {
      cur = straight(cur);
      if (pick(0, 1)) cur = straight(cur);
    }
    link(cur, header);
    cfg_.loops[idx].back_edges.insert({cur, header});

    open_loops_.pop_back();
    return {header, header};
  }

  size_t open_loop() {
    ++loops_made_;
    LoopInfo loop;
    loop.max_iter = pick(1, 2);
    loop.min_iter = pick(0, loop.max_iter);
    cfg_.loops.push_back(loop);
    open_loops_.push_back(cfg_.loops.size() - 1);
    return cfg_.loops.size() - 1;
  }

  std::string straight(const std::string& from) {
    const std::string b = make_block(false);
    link(from, b);
    return b;
  }

  // Exit edges are exactly the CFG edges from a member to a non-member; they
  // can only be computed once the whole graph exists.
  void finalize_loops() {
    for (auto& loop : cfg_.loops) {
      loop.exit_edges.clear();
      for (const auto& e : cfg_.edges)
        if (loop.members.count(e.first) && !loop.members.count(e.second))
          loop.exit_edges.insert(e);
    }
  }
};

// Convenience: a full system around one or more generated tasks.
inline TaskSystem make_system(std::uint64_t seed, int tasks = 1) {
  TaskGen gen(seed);
  TaskSystem sys;
  sys.config.access_time = 2;
  sys.config.bus_access_latency = 2;
  sys.config.delta = 0;
  sys.config.max_traces = 1000000;
  for (int t = 0; t < tasks; ++t) sys.tasks.push_back(gen("task" + std::to_string(t)));
  return sys;
}

}  // namespace tips::testutil

#endif
