// Abstraction of a task CFG into a graph over its points of interest: the
// task start/end, every instruction that may reach the shared bus, and the
// headers of loops containing such instructions. Edge weights conservatively
// bound (and, absent infeasible-path knowledge, exactly match) the worst cost
// of any bus-silent path between two points, with bus-silent loops folded in
// symbolically as max_iter * worst-iteration + worst exit tail.
#ifndef TIPS_TIPSGRAPH_HPP
#define TIPS_TIPSGRAPH_HPP 1

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tips/cfg.hpp"
#include "tips/concrete_paths.hpp"
#include "tips/errors.hpp"

namespace tips {

enum class TipKind { Start, End, LoopHead, Access };

inline const char* to_string(TipKind k) {
  switch (k) {
    case TipKind::Start: return "start";
    case TipKind::End: return "end";
    case TipKind::LoopHead: return "loophead";
    case TipKind::Access: return "access";
  }
  return "?";
}

struct Tip {
  std::string id;
  TipKind kind = TipKind::Access;
  Cycles max_accesses = 0;               // 0 for Start/End/LoopHead
  std::string block;                     // containing block ("" for Start/End)
  std::string instr;                     // instruction id for Access tips
  std::vector<std::string> loop_context; // enclosing kept loops, outer->inner (header ids)

  friend bool operator==(const Tip&, const Tip&) = default;
};

struct TgEdge {
  std::string src;
  std::string dst;
  Cycles w = 0;

  friend bool operator==(const TgEdge&, const TgEdge&) = default;
  friend bool operator<(const TgEdge& a, const TgEdge& b) {
    return std::tie(a.src, a.dst, a.w) < std::tie(b.src, b.dst, b.w);
  }
};

struct LoopMeta {
  Cycles min_iter = 0;
  Cycles max_iter = 1;
  std::vector<std::pair<std::string, std::string>> return_edges;
  std::vector<std::pair<std::string, std::string>> exit_edges;

  friend bool operator==(const LoopMeta&, const LoopMeta&) = default;
};

struct TipsGraph {
  std::string task;
  std::vector<Tip> tips;                  // __start first, __end last, middles sorted by id
  std::vector<TgEdge> edges;              // sorted by (src, dst)
  std::map<std::string, LoopMeta> loop_meta;  // keyed by LoopHead tip id

  const Tip* find_tip(const std::string& id) const {
    for (const auto& t : tips)
      if (t.id == id) return &t;
    return nullptr;
  }
  const TgEdge* find_edge(const std::string& src, const std::string& dst) const {
    for (const auto& e : edges)
      if (e.src == src && e.dst == dst) return &e;
    return nullptr;
  }

  friend bool operator==(const TipsGraph&, const TipsGraph&) = default;
};

// All bus-access candidates of a task, paired with their blocks, in program
// order (block input order, then instruction order).
inline std::vector<std::pair<std::string, Instruction>> extract_tips(const TaskCFG& cfg) {
  std::vector<std::pair<std::string, Instruction>> out;
  for (const auto& b : cfg.blocks)
    for (const auto& i : b.instructions)
      if (i.mem_class == MemClass::NotClassified) out.emplace_back(b.id, i);
  return out;
}

namespace detail {

inline Cycles checked_add(Cycles a, Cycles b) {
  if (a > ~Cycles{0} - b) throw ValidationError("cycle arithmetic overflow while weighting edges");
  return a + b;
}

inline Cycles checked_mul(Cycles a, Cycles b) {
  if (a != 0 && b > ~Cycles{0} / a)
    throw ValidationError("cycle arithmetic overflow while abstracting a loop");
  return a * b;
}

// Builds the point-level position graph and extracts the abstract edges.
class TipsGraphBuilder {
 public:
  TipsGraphBuilder(const TaskCFG& cfg, const AnalysisConfig& conf)
      : cfg_(cfg), conf_(conf), nest_(LoopNesting::build(cfg)) {}

  TipsGraph build() {
    classify_loops();
    assemble_tips();
    build_position_graph();
    extract_edges();
    fill_loop_meta();
    check_connectivity();
    return std::move(tg_);
  }

 private:
  struct InactiveInfo {
    Cycles iter_cost = 0;
    std::map<Edge, Cycles> ports;  // exit edge -> worst cost from loop entry to that exit
  };

  const TaskCFG& cfg_;
  const AnalysisConfig& conf_;
  LoopNesting nest_;
  std::vector<bool> active_;
  std::vector<int> maximal_inactive_;            // loop indices
  std::map<int, InactiveInfo> inactive_info_;
  TipsGraph tg_;
  std::map<std::string, int> tip_index_;

  // Position graph: nodes are either a tip (tip_of >= 0) or internal.
  std::vector<std::vector<std::pair<int, Cycles>>> out_;
  std::vector<int> tip_of_;
  std::map<std::string, int> in_node_, out_node_;  // per expanded block
  std::map<int, int> abs_node_;                    // per maximal inactive loop
  int start_node_ = -1, end_node_ = -1;

  int add_node(int tip = -1) {
    out_.emplace_back();
    tip_of_.push_back(tip);
    return static_cast<int>(out_.size()) - 1;
  }

  bool block_expanded(const std::string& b) const {
    for (int l : nest_.chain_of(b))
      if (!active_[l]) return false;
    return true;
  }

  // The loop right below `outer` on the chain of `block`, if any.
  std::optional<int> child_under(int outer, const std::string& block) const {
    const auto& chain = nest_.chain_of(block);
    for (size_t k = 0; k < chain.size(); ++k)
      if (chain[k] == outer) return k + 1 < chain.size() ? std::optional<int>(chain[k + 1])
                                                         : std::nullopt;
    return std::nullopt;  // block not inside `outer` at all
  }

  void classify_loops() {
    const auto with_access = loops_with_bus_access(cfg_);
    active_.assign(cfg_.loops.size(), false);
    for (int l : with_access) active_[l] = true;
    for (size_t l = 0; l < cfg_.loops.size(); ++l) {
      if (active_[l]) continue;
      const int parent = nest_.parent[l];
      if (parent < 0 || active_[parent]) maximal_inactive_.push_back(static_cast<int>(l));
    }
    for (int m : maximal_inactive_) analyze_inactive(m);
  }

  const InactiveInfo& analyze_inactive(int l) {
    auto memo = inactive_info_.find(l);
    if (memo != inactive_info_.end()) return memo->second;
    for (int c : nest_.children[l]) analyze_inactive(c);

    const LoopInfo& L = cfg_.loops[l];
    // Local DAG over the loop body: bus-silent blocks split as in->out, child
    // loops collapsed to single nodes whose out-edges carry their port costs.
    std::map<std::string, int> in_id, out_id;
    std::map<int, int> abs_id;
    std::vector<std::vector<std::pair<int, Cycles>>> adj;
    auto fresh = [&]() {
      adj.emplace_back();
      return static_cast<int>(adj.size()) - 1;
    };
    for (const auto& b : cfg_.blocks) {
      if (!L.members.count(b.id)) continue;
      const auto& chain = nest_.chain_of(b.id);
      if (chain.back() == l) {  // direct member
        in_id[b.id] = fresh();
        out_id[b.id] = fresh();
        adj[in_id[b.id]].emplace_back(out_id[b.id], block_wcet(b));
      }
    }
    for (int c : nest_.children[l]) abs_id[c] = fresh();

    auto source_of = [&](const Edge& e) -> std::pair<int, Cycles> {
      auto c = child_under(l, e.first);
      if (c) return {abs_id.at(*c), inactive_info_.at(*c).ports.at(e)};
      return {out_id.at(e.first), 0};
    };

    for (const auto& e : cfg_.edges) {
      if (!L.members.count(e.first) || !L.members.count(e.second)) continue;
      if (L.back_edges.count(e)) continue;
      auto cu = child_under(l, e.first);
      auto cv = child_under(l, e.second);
      if (cu && cv && *cu == *cv) continue;  // internal to one child
      auto [src, cost] = source_of(e);
      const int dst = cv ? abs_id.at(*cv) : in_id.at(e.second);
      adj[src].emplace_back(dst, cost);
    }

    // Longest path from the header entry over the local DAG.
    std::vector<std::optional<Cycles>> dist(adj.size());
    dist[in_id.at(L.header)] = 0;
    std::vector<int> indeg(adj.size(), 0);
    for (const auto& edges : adj)
      for (auto [d, c] : edges) ++indeg[d];
    std::deque<int> q;
    for (size_t n = 0; n < adj.size(); ++n)
      if (indeg[n] == 0) q.push_back(static_cast<int>(n));
    while (!q.empty()) {
      const int n = q.front();
      q.pop_front();
      for (auto [d, c] : adj[n]) {
        if (dist[n]) {
          const Cycles cand = checked_add(*dist[n], c);
          if (!dist[d] || cand > *dist[d]) dist[d] = cand;
        }
        if (--indeg[d] == 0) q.push_back(d);
      }
    }

    auto cost_to_source = [&](const Edge& e) -> std::optional<Cycles> {
      auto c = child_under(l, e.first);
      if (c) {
        const auto& d = dist[abs_id.at(*c)];
        if (!d) return std::nullopt;
        return checked_add(*d, inactive_info_.at(*c).ports.at(e));
      }
      const auto& d = dist[out_id.at(e.first)];
      return d;
    };

    InactiveInfo info;
    bool any_back = false;
    for (const auto& e : L.back_edges) {
      auto c = cost_to_source(e);
      if (!c) continue;
      any_back = true;
      info.iter_cost = std::max(info.iter_cost, *c);
    }
    if (!any_back)
      throw ValidationError("task '" + cfg_.name + "': loop '" + L.header +
                            "' has no back edge source reachable from its header");
    const Cycles full_iters = checked_mul(L.max_iter, info.iter_cost);
    for (const auto& e : L.exit_edges) {
      auto tail = cost_to_source(e);
      if (!tail)
        throw ValidationError("task '" + cfg_.name + "': loop '" + L.header +
                              "' exit source '" + e.first + "' unreachable from its header");
      info.ports[e] = checked_add(full_iters, *tail);
    }
    return inactive_info_.emplace(l, std::move(info)).first->second;
  }

  void assemble_tips() {
    tg_.task = cfg_.name;
    std::vector<Tip> middles;
    for (const auto& b : cfg_.blocks) {
      for (const auto& i : b.instructions) {
        if (i.mem_class != MemClass::NotClassified) continue;
        Tip t{i.id, TipKind::Access, i.max_accesses, b.id, i.id, {}};
        for (int l : nest_.chain_of(b.id)) t.loop_context.push_back(cfg_.loops[l].header);
        middles.push_back(std::move(t));
      }
    }
    for (size_t l = 0; l < cfg_.loops.size(); ++l) {
      if (!active_[l]) continue;
      const std::string& h = cfg_.loops[l].header;
      Tip t{loop_head_tip_id(h), TipKind::LoopHead, 0, h, "", {}};
      for (int a : nest_.chain_of(h)) t.loop_context.push_back(cfg_.loops[a].header);
      middles.push_back(std::move(t));
    }
    std::sort(middles.begin(), middles.end(),
              [](const Tip& a, const Tip& b) { return a.id < b.id; });
    tg_.tips.push_back(Tip{kStartTip, TipKind::Start, 0, "", "", {}});
    tg_.tips.insert(tg_.tips.end(), middles.begin(), middles.end());
    tg_.tips.push_back(Tip{kEndTip, TipKind::End, 0, "", "", {}});
    for (size_t k = 0; k < tg_.tips.size(); ++k) tip_index_[tg_.tips[k].id] = static_cast<int>(k);
  }

  // Target node for a CFG edge arriving at block v from an expanded context.
  int resolve(const std::string& v) {
    auto hl = nest_.header_loop.find(v);
    if (hl != nest_.header_loop.end()) {
      const int l = hl->second;
      if (active_[l]) return tip_node(loop_head_tip_id(v));
      int m = l;
      while (nest_.parent[m] >= 0 && !active_[nest_.parent[m]]) m = nest_.parent[m];
      return abs_node_.at(m);
    }
    return in_node_.at(v);
  }

  int tip_node(const std::string& id) const { return tip_index_.at(id); }

  void build_position_graph() {
    // Tip nodes share indices with tg_.tips.
    for (size_t k = 0; k < tg_.tips.size(); ++k) add_node(static_cast<int>(k));
    start_node_ = tip_node(kStartTip);
    end_node_ = tip_node(kEndTip);

    for (const auto& b : cfg_.blocks) {
      if (!block_expanded(b.id)) continue;
      in_node_[b.id] = add_node();
      out_node_[b.id] = add_node();
    }
    for (int m : maximal_inactive_) abs_node_[m] = add_node();

    // Intra-block chains: costs into a point include that point's own wcet;
    // costs out of a point start with its worst access time.
    for (const auto& b : cfg_.blocks) {
      if (!block_expanded(b.id)) continue;
      int cur = in_node_.at(b.id);
      Cycles pending = 0;
      for (const auto& i : b.instructions) {
        pending = checked_add(pending, i.wcet);
        if (i.mem_class == MemClass::NotClassified) {
          const int tn = tip_node(i.id);
          out_[cur].emplace_back(tn, pending);
          cur = tn;
          pending = checked_mul(i.max_accesses, conf_.access_time);
        }
      }
      out_[cur].emplace_back(out_node_.at(b.id), pending);
    }

    out_[start_node_].emplace_back(resolve(cfg_.entry), 0);
    out_[out_node_.at(cfg_.exit)].emplace_back(end_node_, 0);

    for (const auto& e : cfg_.edges)
      if (block_expanded(e.first)) out_[out_node_.at(e.first)].emplace_back(resolve(e.second), 0);

    for (size_t l = 0; l < cfg_.loops.size(); ++l)
      if (active_[l])
        out_[tip_node(loop_head_tip_id(cfg_.loops[l].header))].emplace_back(
            in_node_.at(cfg_.loops[l].header), 0);

    for (int m : maximal_inactive_)
      for (const auto& [e, cost] : inactive_info_.at(m).ports)
        out_[abs_node_.at(m)].emplace_back(resolve(e.second), cost);
  }

  void extract_edges() {
    // Topological order of the internal (non-tip) subgraph; every cycle of the
    // position graph passes through a tip node, so this is a DAG.
    const int n = static_cast<int>(out_.size());
    std::vector<int> indeg(n, 0);
    for (int u = 0; u < n; ++u) {
      if (tip_of_[u] >= 0) continue;
      for (auto [v, c] : out_[u])
        if (tip_of_[v] < 0) ++indeg[v];
    }
    std::vector<int> topo;
    std::deque<int> q;
    for (int u = 0; u < n; ++u)
      if (tip_of_[u] < 0 && indeg[u] == 0) q.push_back(u);
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      topo.push_back(u);
      for (auto [v, c] : out_[u])
        if (tip_of_[v] < 0 && --indeg[v] == 0) q.push_back(v);
    }
    if (topo.size() != static_cast<size_t>(std::count(tip_of_.begin(), tip_of_.end(), -1)))
      throw ValidationError("task '" + cfg_.name +
                            "': internal cycle not cut by any point of interest");

    std::map<std::pair<int, int>, Cycles> best;
    auto offer = [&](int s, int d, Cycles w) {
      auto [it, inserted] = best.emplace(std::make_pair(s, d), w);
      if (!inserted && w > it->second) it->second = w;
    };

    for (int s = 0; s < n; ++s) {
      if (tip_of_[s] < 0) continue;
      std::vector<std::optional<Cycles>> dist(n);
      for (auto [v, c] : out_[s]) {
        if (tip_of_[v] >= 0)
          offer(tip_of_[s], tip_of_[v], c);
        else if (!dist[v] || c > *dist[v])
          dist[v] = c;
      }
      for (int u : topo) {
        if (!dist[u]) continue;
        for (auto [v, c] : out_[u]) {
          const Cycles cand = checked_add(*dist[u], c);
          if (tip_of_[v] >= 0)
            offer(tip_of_[s], tip_of_[v], cand);
          else if (!dist[v] || cand > *dist[v])
            dist[v] = cand;
        }
      }
    }

    for (const auto& [key, w] : best)
      tg_.edges.push_back(TgEdge{tg_.tips[key.first].id, tg_.tips[key.second].id, w});
    std::sort(tg_.edges.begin(), tg_.edges.end());
  }

  void fill_loop_meta() {
    auto ctx_contains = [&](const std::string& tip_id, const std::string& header) {
      const auto& ctx = tg_.tips[tip_index_.at(tip_id)].loop_context;
      return std::find(ctx.begin(), ctx.end(), header) != ctx.end();
    };
    for (size_t l = 0; l < cfg_.loops.size(); ++l) {
      if (!active_[l]) continue;
      const std::string& h = cfg_.loops[l].header;
      LoopMeta meta;
      meta.min_iter = cfg_.loops[l].min_iter;
      meta.max_iter = cfg_.loops[l].max_iter;
      const std::string lh = loop_head_tip_id(h);
      for (const auto& e : tg_.edges) {
        const bool src_inside = ctx_contains(e.src, h);
        const bool dst_inside = ctx_contains(e.dst, h);
        if (e.dst == lh && src_inside) meta.return_edges.emplace_back(e.src, e.dst);
        if (src_inside && !dst_inside) meta.exit_edges.emplace_back(e.src, e.dst);
      }
      tg_.loop_meta[lh] = std::move(meta);
    }
  }

  void check_connectivity() {
    std::map<std::string, std::vector<std::string>> fwd, bwd;
    for (const auto& e : tg_.edges) {
      fwd[e.src].push_back(e.dst);
      bwd[e.dst].push_back(e.src);
    }
    auto bfs = [&](const std::string& from, auto& adj) {
      std::set<std::string> seen{from};
      std::deque<std::string> q{from};
      while (!q.empty()) {
        auto u = q.front();
        q.pop_front();
        for (const auto& v : adj[u])
          if (seen.insert(v).second) q.push_back(v);
      }
      return seen;
    };
    const auto from_start = bfs(kStartTip, fwd);
    const auto to_end = bfs(kEndTip, bwd);
    for (const auto& t : tg_.tips)
      if (!from_start.count(t.id) || !to_end.count(t.id))
        throw ValidationError("task '" + cfg_.name + "': point '" + t.id +
                              "' is not on any start-to-end path");
  }
};

}  // namespace detail

inline TipsGraph build_tipsgraph(const TaskCFG& cfg, const AnalysisConfig& conf) {
  return detail::TipsGraphBuilder(cfg, conf).build();
}

// Plain-text graph dump: one `tip` line per node, one `edge` line per edge.
inline std::string tipsgraph_text(const TipsGraph& tg) {
  std::string out;
  for (const auto& t : tg.tips) {
    out += "tip " + t.id + " " + to_string(t.kind) + " " + std::to_string(t.max_accesses) + "\n";
  }
  for (const auto& e : tg.edges)
    out += "edge " + e.src + " " + e.dst + " " + std::to_string(e.w) + "\n";
  return out;
}

// Replays every feasible concrete path and checks that consecutive points are
// connected by an abstract edge whose weight dominates the concrete cost.
inline Report verify_edge_bounds(const TaskCFG& cfg, const TipsGraph& tg,
                                 const AnalysisConfig& conf, const PathLimits& lim = {}) {
  Report rep;
  std::set<std::string> dedup;
  std::map<std::pair<std::string, std::string>, Cycles> weight;
  for (const auto& e : tg.edges) weight[{e.src, e.dst}] = e.w;
  for_each_concrete_path(cfg, conf, loops_with_bus_access(cfg), lim,
                         [&](const std::vector<TipOccurrence>& occs) {
                           for (size_t k = 0; k + 1 < occs.size(); ++k) {
                             const auto& a = occs[k];
                             const auto& b = occs[k + 1];
                             const Cycles cost = b.date - a.date;
                             auto it = weight.find({a.tip, b.tip});
                             std::string v;
                             if (it == weight.end())
                               v = "task '" + cfg.name + "': no abstract edge " + a.tip + "->" +
                                   b.tip + " though a concrete path needs one";
                             else if (it->second < cost)
                               v = "task '" + cfg.name + "': edge " + a.tip + "->" + b.tip +
                                   " weight " + std::to_string(it->second) +
                                   " below concrete path cost " + std::to_string(cost);
                             if (!v.empty() && dedup.insert(v).second) rep.add(v);
                           }
                         });
  return rep;
}

}  // namespace tips

#endif
