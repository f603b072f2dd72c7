// Enumeration of the worst-case timed traces admitted by a TipsGraph. A trace
// is the sequence of (point, date) pairs produced by one resolution of all
// loop iteration counts within their declared bounds; dates are conservative
// because every edge weight already bounds the worst bus-silent gap.
#ifndef TIPS_TRACE_ENUM_HPP
#define TIPS_TRACE_ENUM_HPP 1

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tips/cfg.hpp"
#include "tips/concrete_paths.hpp"
#include "tips/errors.hpp"
#include "tips/tipsgraph.hpp"

namespace tips {

using Trace = std::vector<TipOccurrence>;

struct TraceSet {
  std::string task;
  std::vector<Trace> traces;  // sorted lexicographically, duplicates removed
  Cycles d_max = 0;           // latest task end date over all traces

  friend bool operator==(const TraceSet&, const TraceSet&) = default;
};

namespace detail {

struct EnumState {
  Trace trace;
  std::vector<std::pair<std::string, Cycles>> counters;  // (header, completed iterations)
};

}  // namespace detail

inline TraceSet enumerate_traces(const TipsGraph& tg, const AnalysisConfig& conf) {
  std::map<std::string, std::vector<const TgEdge*>> out;
  std::map<std::string, const Tip*> tip_by_id;
  for (const auto& t : tg.tips) tip_by_id[t.id] = &t;
  for (const auto& e : tg.edges) out[e.src].push_back(&e);

  auto meta_of = [&](const std::string& header) -> const LoopMeta& {
    auto it = tg.loop_meta.find(loop_head_tip_id(header));
    if (it == tg.loop_meta.end())
      throw ValidationError("task '" + tg.task + "': missing loop bounds for header '" + header +
                            "'");
    return it->second;
  };

  TraceSet result;
  result.task = tg.task;

  // No trace can legitimately outgrow the declared iteration bounds; treat a
  // longer one as a structural runaway rather than looping forever.
  constexpr Cycles kCap = Cycles{1} << 50;
  Cycles len_bound = 2;
  for (const auto& t : tg.tips) {
    if (t.kind == TipKind::Start || t.kind == TipKind::End) continue;
    Cycles occ = 1;
    for (const auto& h : t.loop_context) {
      const Cycles factor = meta_of(h).max_iter + 1;
      occ = occ > kCap / factor ? kCap : occ * factor;
    }
    len_bound = len_bound > kCap - occ ? kCap : len_bound + occ;
  }

  std::vector<detail::EnumState> work;
  work.push_back({{{kStartTip, 0}}, {}});
  const auto overflow = [&]() {
    throw ExplosionError("task '" + tg.task + "': trace enumeration exceeded max_traces=" +
                         std::to_string(conf.max_traces));
  };

  while (!work.empty()) {
    detail::EnumState st = std::move(work.back());
    work.pop_back();
    const TipOccurrence& at = st.trace.back();

    if (at.tip == kEndTip) {
      result.traces.push_back(std::move(st.trace));
      if (result.traces.size() > conf.max_traces) overflow();
      continue;
    }

    auto oit = out.find(at.tip);
    if (oit == out.end())
      throw ValidationError("task '" + tg.task + "': point '" + at.tip +
                            "' has no outgoing edge");

    const auto& ctx_u = tip_by_id.at(at.tip)->loop_context;
    for (const TgEdge* e : oit->second) {
      const Tip& v = *tip_by_id.at(e->dst);
      const auto& ctx_v = v.loop_context;
      size_t common = 0;
      while (common < ctx_u.size() && common < ctx_v.size() && ctx_u[common] == ctx_v[common])
        ++common;
      const bool return_arc =
          v.kind == TipKind::LoopHead && !ctx_v.empty() && common == ctx_v.size();

      detail::EnumState next = st;  // each branch owns its copies
      bool feasible = true;
      const size_t keep = return_arc ? ctx_v.size() : common;
      while (next.counters.size() > keep) {  // leave loops, innermost first
        const auto& [header, count] = next.counters.back();
        if (count < meta_of(header).min_iter) {
          feasible = false;
          break;
        }
        next.counters.pop_back();
      }
      if (!feasible) continue;
      if (return_arc) {
        auto& [header, count] = next.counters.back();
        if (count >= meta_of(header).max_iter) continue;  // bound reached, arc infeasible
        ++count;
      } else {
        for (size_t k = common; k < ctx_v.size(); ++k) next.counters.emplace_back(ctx_v[k], 0);
      }
      next.trace.push_back({v.id, detail::checked_add(at.date, e->w)});
      if (next.trace.size() > len_bound)
        throw ValidationError("task '" + tg.task +
                              "': trace grows past its loop-bound ceiling; graph is inconsistent");
      work.push_back(std::move(next));
      if (work.size() > conf.max_traces) overflow();
    }
  }

  std::sort(result.traces.begin(), result.traces.end());
  result.traces.erase(std::unique(result.traces.begin(), result.traces.end()),
                      result.traces.end());
  for (const auto& tr : result.traces) result.d_max = std::max(result.d_max, tr.back().date);
  return result;
}

// Plain-text dump: one line per trace in canonical order, then the horizon.
inline std::string traces_text(const TraceSet& ts) {
  std::string s;
  for (size_t k = 0; k < ts.traces.size(); ++k) {
    s += "trace " + std::to_string(k) + ":";
    for (const auto& o : ts.traces[k]) s += " (" + o.tip + "," + std::to_string(o.date) + ")";
    s += "\n";
  }
  s += "d_max " + std::to_string(ts.d_max) + "\n";
  return s;
}

// Replays every feasible concrete path of the task and checks that some
// abstract trace visits the same points no earlier, point for point.
inline Report check_trace_conservativeness(const TaskCFG& cfg, const TraceSet& ts,
                                           const AnalysisConfig& conf,
                                           const PathLimits& lim = {}) {
  Report rep;
  std::set<std::string> dedup;
  std::map<std::vector<std::string>, std::vector<const Trace*>> by_signature;
  for (const auto& tr : ts.traces) {
    std::vector<std::string> sig;
    sig.reserve(tr.size());
    for (const auto& o : tr) sig.push_back(o.tip);
    by_signature[sig].push_back(&tr);
  }

  auto join = [](const std::vector<std::string>& sig) {
    std::string s;
    for (const auto& t : sig) s += (s.empty() ? "" : " ") + t;
    return s;
  };

  for_each_concrete_path(
      cfg, conf, loops_with_bus_access(cfg), lim, [&](const std::vector<TipOccurrence>& occs) {
        std::vector<std::string> sig;
        sig.reserve(occs.size());
        for (const auto& o : occs) sig.push_back(o.tip);
        auto it = by_signature.find(sig);
        std::string v;
        if (it == by_signature.end()) {
          v = "task '" + cfg.name + "': no trace covers concrete point sequence [" + join(sig) +
              "]";
        } else {
          const bool dominated =
              std::any_of(it->second.begin(), it->second.end(), [&](const Trace* tr) {
                for (size_t k = 0; k < occs.size(); ++k)
                  if ((*tr)[k].date < occs[k].date) return false;
                return true;
              });
          if (!dominated)
            v = "task '" + cfg.name + "': every trace for point sequence [" + join(sig) +
                "] is beaten by a concrete execution";
        }
        if (!v.empty() && dedup.insert(v).second) rep.add(v);
      });
  return rep;
}

}  // namespace tips

#endif
