// Pipeline plumbing: every analysis stage can persist its result as a JSON
// artifact that embeds the normalized input system, the effective
// configuration and a digest of the original input bytes. Any artifact can
// feed the next stage (stages re-derive from the embedded system, so a chained
// run is byte-identical to a direct one) and any artifact can be audited
// against independently recomputed ground truth.
#ifndef TIPS_PIPELINE_HPP
#define TIPS_PIPELINE_HPP 1

#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "tips/cfg.hpp"
#include "tips/concrete_paths.hpp"
#include "tips/errors.hpp"
#include "tips/io.hpp"
#include "tips/scheduler.hpp"
#include "tips/segments.hpp"
#include "tips/tipsgraph.hpp"
#include "tips/trace_enum.hpp"

namespace tips {

inline std::string fnv1a_digest(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::string s = "fnv1a:";
  for (int k = 15; k >= 0; --k) s += "0123456789abcdef"[(h >> (k * 4)) & 0xF];
  return s;
}

// ---------------------------------------------------------------------------
// Stage payloads <-> JSON
// ---------------------------------------------------------------------------

inline Json tipsgraph_to_json(const TipsGraph& tg) {
  Json tips = Json::array();
  for (const auto& t : tg.tips) {
    Json ctx = Json::array();
    for (const auto& h : t.loop_context) ctx.push_back(h);
    tips.push_back(Json{{"id", t.id},
                        {"kind", to_string(t.kind)},
                        {"mu", t.max_accesses},
                        {"block", t.block},
                        {"instr", t.instr},
                        {"context", std::move(ctx)}});
  }
  Json edges = Json::array();
  for (const auto& e : tg.edges)
    edges.push_back(Json{{"src", e.src}, {"dst", e.dst}, {"w", e.w}});
  Json meta = Json::object();
  for (const auto& [id, m] : tg.loop_meta) {
    Json ret = Json::array(), ex = Json::array();
    for (const auto& e : m.return_edges) ret.push_back(Json::array({e.first, e.second}));
    for (const auto& e : m.exit_edges) ex.push_back(Json::array({e.first, e.second}));
    meta[id] = Json{{"min_iter", m.min_iter},
                    {"max_iter", m.max_iter},
                    {"return_edges", std::move(ret)},
                    {"exit_edges", std::move(ex)}};
  }
  return Json{{"task", tg.task},
              {"tips", std::move(tips)},
              {"edges", std::move(edges)},
              {"loop_meta", std::move(meta)}};
}

inline TipKind tip_kind_from(const std::string& s, const std::string& ctx) {
  if (s == "start") return TipKind::Start;
  if (s == "end") return TipKind::End;
  if (s == "loophead") return TipKind::LoopHead;
  if (s == "access") return TipKind::Access;
  throw ParseError(ctx + ": unknown tip kind '" + s + "'");
}

inline TipsGraph tipsgraph_from_json(const Json& j) {
  using namespace detail;
  TipsGraph tg;
  tg.task = str_field(j, "task", "graph");
  const std::string ctx = "graph '" + tg.task + "'";
  for (const auto& tj : member(j, "tips", ctx)) {
    Tip t;
    t.id = str_field(tj, "id", ctx);
    t.kind = tip_kind_from(str_field(tj, "kind", ctx), ctx);
    t.max_accesses = u64_field(tj, "mu", ctx);
    t.block = str_field(tj, "block", ctx);
    t.instr = str_field(tj, "instr", ctx);
    for (const auto& h : member(tj, "context", ctx)) {
      if (!h.is_string()) throw ParseError(ctx + ": tip context must hold strings");
      t.loop_context.push_back(h.get<std::string>());
    }
    tg.tips.push_back(std::move(t));
  }
  for (const auto& ej : member(j, "edges", ctx))
    tg.edges.push_back(
        TgEdge{str_field(ej, "src", ctx), str_field(ej, "dst", ctx), u64_field(ej, "w", ctx)});
  const Json& meta = member(j, "loop_meta", ctx);
  if (!meta.is_object()) throw ParseError(ctx + ".loop_meta: expected an object");
  for (auto it = meta.begin(); it != meta.end(); ++it) {
    LoopMeta m;
    m.min_iter = u64_field(it.value(), "min_iter", ctx);
    m.max_iter = u64_field(it.value(), "max_iter", ctx);
    for (const auto& e : edge_list(member(it.value(), "return_edges", ctx), ctx))
      m.return_edges.push_back(e);
    for (const auto& e : edge_list(member(it.value(), "exit_edges", ctx), ctx))
      m.exit_edges.push_back(e);
    tg.loop_meta[it.key()] = std::move(m);
  }
  return tg;
}

inline Json traceset_to_json(const TraceSet& ts) {
  Json traces = Json::array();
  for (const auto& tr : ts.traces) {
    Json one = Json::array();
    for (const auto& o : tr) one.push_back(Json::array({o.tip, o.date}));
    traces.push_back(std::move(one));
  }
  return Json{{"task", ts.task}, {"d_max", ts.d_max}, {"traces", std::move(traces)}};
}

inline TraceSet traceset_from_json(const Json& j) {
  using namespace detail;
  TraceSet ts;
  ts.task = str_field(j, "task", "traces");
  const std::string ctx = "traces '" + ts.task + "'";
  ts.d_max = u64_field(j, "d_max", ctx);
  const Json& traces = member(j, "traces", ctx);
  if (!traces.is_array()) throw ParseError(ctx + ".traces: expected an array");
  for (const auto& tj : traces) {
    if (!tj.is_array()) throw ParseError(ctx + ": each trace must be an array");
    Trace tr;
    for (const auto& oj : tj) {
      if (!oj.is_array() || oj.size() != 2 || !oj[0].is_string())
        throw ParseError(ctx + ": each trace element must be a [point, date] pair");
      tr.push_back(TipOccurrence{oj[0].get<std::string>(), as_u64(oj[1], ctx + ".date")});
    }
    ts.traces.push_back(std::move(tr));
  }
  return ts;
}

inline Json sequence_to_json(const SegmentSequence& seq) {
  Json segs = Json::array();
  for (const auto& s : seq.segments) {
    Json acc = Json::object();
    for (const auto& [key, n] : s.accesses) acc[key] = n;
    segs.push_back(
        Json{{"start", s.start}, {"duration", s.duration}, {"accesses", std::move(acc)}});
  }
  return Json{{"task", seq.task}, {"d_max", seq.d_max}, {"segments", std::move(segs)}};
}

inline SegmentSequence sequence_from_json(const Json& j) {
  using namespace detail;
  SegmentSequence seq;
  seq.task = str_field(j, "task", "profile");
  const std::string ctx = "profile '" + seq.task + "'";
  seq.d_max = u64_field(j, "d_max", ctx);
  for (const auto& sj : member(j, "segments", ctx)) {
    Segment s;
    s.start = u64_field(sj, "start", ctx);
    s.duration = u64_field(sj, "duration", ctx);
    const Json& acc = member(sj, "accesses", ctx);
    if (!acc.is_object()) throw ParseError(ctx + ".accesses: expected an object");
    for (auto it = acc.begin(); it != acc.end(); ++it)
      s.accesses[it.key()] = as_u64(it.value(), ctx + ".accesses");
    seq.segments.push_back(std::move(s));
  }
  return seq;
}

inline Json schedule_to_json(const Schedule& sch) {
  Json tasks = Json::array();
  for (const auto& t : sch.tasks) {
    Json segs = Json::array();
    for (const auto& s : t.segments)
      segs.push_back(Json{{"start", s.start},
                          {"duration", s.duration},
                          {"base_duration", s.base_duration},
                          {"access_bound", s.access_bound},
                          {"inflation", s.inflation}});
    tasks.push_back(Json{{"task", t.task},
                         {"core", t.core},
                         {"release", t.release},
                         {"segments", std::move(segs)}});
  }
  return Json{{"makespan", sch.makespan}, {"rounds", sch.rounds}, {"tasks", std::move(tasks)}};
}

inline Schedule schedule_from_json(const Json& j) {
  using namespace detail;
  Schedule sch;
  sch.makespan = u64_field(j, "makespan", "schedule");
  sch.rounds = static_cast<int>(u64_field(j, "rounds", "schedule"));
  for (const auto& tj : member(j, "tasks", "schedule")) {
    ScheduledTask t;
    t.task = str_field(tj, "task", "schedule");
    const std::string ctx = "schedule '" + t.task + "'";
    t.core = static_cast<std::uint32_t>(u64_field(tj, "core", ctx));
    t.release = u64_field(tj, "release", ctx);
    for (const auto& sj : member(tj, "segments", ctx)) {
      PlacedSegment s;
      s.start = u64_field(sj, "start", ctx);
      s.duration = u64_field(sj, "duration", ctx);
      s.base_duration = u64_field(sj, "base_duration", ctx);
      s.access_bound = u64_field(sj, "access_bound", ctx);
      s.inflation = u64_field(sj, "inflation", ctx);
      t.segments.push_back(s);
    }
    sch.tasks.push_back(std::move(t));
  }
  return sch;
}

// ---------------------------------------------------------------------------
// Input loading (raw system or upstream artifact)
// ---------------------------------------------------------------------------

struct PipelineInput {
  TaskSystem system;
  std::string digest;         // digest of the original raw input, chain-stable
  std::string artifact_kind;  // "" when the input was a raw system document
  Json payload;               // stage payload of the artifact (null otherwise)
};

inline PipelineInput load_input(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  PipelineInput in;
  if (j.is_object() && j.contains("artifact")) {
    using namespace detail;
    in.artifact_kind = str_field(j, "artifact", "artifact");
    const Json& prov = member(j, "provenance", "artifact");
    in.digest = str_field(prov, "input_digest", "artifact.provenance");
    in.system = system_from_json(member(j, "system", "artifact"));
    const char* key = in.artifact_kind == "tipsgraph"  ? "graphs"
                      : in.artifact_kind == "traces"   ? "traces"
                      : in.artifact_kind == "segments" ? "profiles"
                      : in.artifact_kind == "schedule" ? "schedule"
                                                       : nullptr;
    if (key == nullptr)
      throw ParseError("unknown artifact kind '" + in.artifact_kind + "'");
    in.payload = member(j, key, "artifact");
  } else {
    in.system = system_from_json(j);
    in.digest = fnv1a_digest(text);
  }
  return in;
}

// ---------------------------------------------------------------------------
// Stage computation (optionally parallel across tasks)
// ---------------------------------------------------------------------------

template <class F>
inline void parallel_for(size_t n, unsigned jobs, F&& f) {
  if (jobs <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<size_t>(jobs, n));
  std::vector<std::exception_ptr> errs(n);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t)
    pool.emplace_back([&, t] {
      for (size_t i = t; i < n; i += workers) {
        try {
          f(i);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)  // lowest task index wins: parallel failures are deterministic
    if (e) std::rethrow_exception(e);
}

inline std::vector<TipsGraph> compute_graphs(const TaskSystem& sys, unsigned jobs) {
  std::vector<TipsGraph> out(sys.tasks.size());
  parallel_for(sys.tasks.size(), jobs,
               [&](size_t i) { out[i] = build_tipsgraph(sys.tasks[i], sys.config); });
  return out;
}

inline std::vector<TraceSet> compute_traces(const TaskSystem& sys,
                                            const std::vector<TipsGraph>& graphs, unsigned jobs) {
  std::vector<TraceSet> out(sys.tasks.size());
  parallel_for(sys.tasks.size(), jobs,
               [&](size_t i) { out[i] = enumerate_traces(graphs[i], sys.config); });
  return out;
}

inline std::vector<SegmentSequence> compute_profiles(const TaskSystem& sys,
                                                     const std::vector<TipsGraph>& graphs,
                                                     const std::vector<TraceSet>& traces,
                                                     unsigned jobs) {
  std::vector<SegmentSequence> out(sys.tasks.size());
  parallel_for(sys.tasks.size(), jobs,
               [&](size_t i) { out[i] = segments_for_task(graphs[i], traces[i], sys.config); });
  return out;
}

// ---------------------------------------------------------------------------
// Artifact assembly
// ---------------------------------------------------------------------------

inline Json artifact_shell(const std::string& kind, const PipelineInput& in) {
  return Json{{"artifact", kind},
              {"provenance", Json{{"input_digest", in.digest},
                                  {"config", config_to_json(in.system.config)}}},
              {"system", system_to_json(in.system)}};
}

inline std::string artifact_tipsgraph(const PipelineInput& in, unsigned jobs) {
  const auto graphs = compute_graphs(in.system, jobs);
  Json g = Json::object();
  for (size_t i = 0; i < graphs.size(); ++i) g[graphs[i].task] = tipsgraph_to_json(graphs[i]);
  Json a = artifact_shell("tipsgraph", in);
  a["graphs"] = std::move(g);
  return a.dump(2) + "\n";
}

inline std::string artifact_traces(const PipelineInput& in, unsigned jobs) {
  const auto graphs = compute_graphs(in.system, jobs);
  const auto traces = compute_traces(in.system, graphs, jobs);
  Json t = Json::object();
  for (size_t i = 0; i < traces.size(); ++i) t[traces[i].task] = traceset_to_json(traces[i]);
  Json a = artifact_shell("traces", in);
  a["traces"] = std::move(t);
  return a.dump(2) + "\n";
}

inline std::string artifact_segments(const PipelineInput& in, unsigned jobs) {
  const auto graphs = compute_graphs(in.system, jobs);
  const auto traces = compute_traces(in.system, graphs, jobs);
  const auto profiles = compute_profiles(in.system, graphs, traces, jobs);
  Json p = Json::object();
  for (size_t i = 0; i < profiles.size(); ++i) p[profiles[i].task] = sequence_to_json(profiles[i]);
  Json a = artifact_shell("segments", in);
  a["profiles"] = std::move(p);
  return a.dump(2) + "\n";
}

inline Schedule compute_schedule(const PipelineInput& in, unsigned jobs) {
  const auto graphs = compute_graphs(in.system, jobs);
  const auto traces = compute_traces(in.system, graphs, jobs);
  const auto profiles = compute_profiles(in.system, graphs, traces, jobs);
  return build_schedule(profiles, in.system.placements, in.system.config);
}

inline std::string artifact_schedule(const PipelineInput& in, unsigned jobs) {
  Json a = artifact_shell("schedule", in);
  a["schedule"] = schedule_to_json(compute_schedule(in, jobs));
  return a.dump(2) + "\n";
}

inline std::string budget_summary(const PipelineInput& in, unsigned jobs, Cycles budget,
                                  bool& ok) {
  const auto graphs = compute_graphs(in.system, jobs);
  const auto traces = compute_traces(in.system, graphs, jobs);
  const auto profiles = compute_profiles(in.system, graphs, traces, jobs);
  const BudgetReport rep = check_budgets(profiles, in.system.placements, budget,
                                         in.system.config);
  ok = rep.ok;
  return budget_text(rep);
}

inline std::string report_summary(const PipelineInput& in, unsigned jobs,
                                  std::optional<Cycles> window) {
  const auto graphs = compute_graphs(in.system, jobs);
  const auto traces = compute_traces(in.system, graphs, jobs);
  const auto profiles = compute_profiles(in.system, graphs, traces, jobs);
  std::string out;
  for (size_t i = 0; i < graphs.size(); ++i) {
    out += "task " + graphs[i].task + ": tips=" + std::to_string(graphs[i].tips.size()) +
           " edges=" + std::to_string(graphs[i].edges.size()) +
           " traces=" + std::to_string(traces[i].traces.size()) +
           " d_max=" + std::to_string(traces[i].d_max) +
           " segments=" + std::to_string(profiles[i].segments.size()) + "\n";
    if (window)
      out += "task " + graphs[i].task + ": window " + std::to_string(*window) +
             " -> accesses <= " + std::to_string(window_access_bound(profiles[i], *window)) +
             "\n";
  }
  const Schedule sch = build_schedule(profiles, in.system.placements, in.system.config);
  out += "schedule: tasks=" + std::to_string(sch.tasks.size()) +
         " makespan=" + std::to_string(sch.makespan) + " rounds=" + std::to_string(sch.rounds) +
         "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

// Self-check of a raw system: recompute every stage and run every verifier.
inline Report verify_system(const TaskSystem& sys, unsigned jobs, const PathLimits& lim = {}) {
  const auto graphs = compute_graphs(sys, jobs);
  const auto traces = compute_traces(sys, graphs, jobs);
  const auto profiles = compute_profiles(sys, graphs, traces, jobs);
  std::vector<Report> per(sys.tasks.size());
  parallel_for(sys.tasks.size(), jobs, [&](size_t i) {
    per[i].merge(verify_edge_bounds(sys.tasks[i], graphs[i], sys.config, lim));
    per[i].merge(check_trace_conservativeness(sys.tasks[i], traces[i], sys.config, lim));
    per[i].merge(verify_segments(graphs[i], traces[i], profiles[i], sys.config));
  });
  Report rep;
  for (auto& r : per) rep.merge(r);
  try {
    const Schedule sch = build_schedule(profiles, sys.placements, sys.config);
    rep.merge(verify_schedule(sch, profiles, sys.config));
  } catch (const std::runtime_error& e) {
    rep.add(std::string("schedule: ") + e.what());
  }
  return rep;
}

// Audit of a persisted artifact payload against recomputed ground truth.
inline Report verify_artifact(const PipelineInput& in, unsigned jobs, const PathLimits& lim = {}) {
  const TaskSystem& sys = in.system;
  Report rep;
  auto payload_for = [&](const std::string& name) -> const Json* {
    auto it = in.payload.find(name);
    if (it == in.payload.end()) {
      rep.add("artifact has no payload for task '" + name + "'");
      return nullptr;
    }
    return &*it;
  };

  if (in.artifact_kind == "tipsgraph") {
    for (const auto& task : sys.tasks) {
      const Json* pj = payload_for(task.name);
      if (!pj) continue;
      rep.merge(verify_edge_bounds(task, tipsgraph_from_json(*pj), sys.config, lim));
    }
  } else if (in.artifact_kind == "traces") {
    for (const auto& task : sys.tasks) {
      const Json* pj = payload_for(task.name);
      if (!pj) continue;
      const TraceSet ts = traceset_from_json(*pj);
      Cycles latest = 0;
      for (const auto& tr : ts.traces)
        if (!tr.empty()) latest = std::max(latest, tr.back().date);
      if (ts.d_max != latest)
        rep.add("task '" + task.name + "': recorded horizon " + std::to_string(ts.d_max) +
                " differs from latest trace end " + std::to_string(latest));
      rep.merge(check_trace_conservativeness(task, ts, sys.config, lim));
    }
  } else if (in.artifact_kind == "segments") {
    const auto graphs = compute_graphs(sys, jobs);
    const auto traces = compute_traces(sys, graphs, jobs);
    for (size_t i = 0; i < sys.tasks.size(); ++i) {
      const Json* pj = payload_for(sys.tasks[i].name);
      if (!pj) continue;
      rep.merge(verify_segments(graphs[i], traces[i], sequence_from_json(*pj), sys.config));
    }
  } else if (in.artifact_kind == "schedule") {
    const auto graphs = compute_graphs(sys, jobs);
    const auto traces = compute_traces(sys, graphs, jobs);
    const auto profiles = compute_profiles(sys, graphs, traces, jobs);
    rep.merge(verify_schedule(schedule_from_json(in.payload), profiles, sys.config));
  } else {
    rep.add("artifact kind '" + in.artifact_kind + "' cannot be audited");
  }
  return rep;
}

}  // namespace tips

#endif
