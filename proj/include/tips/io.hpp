// JSON (de)serialization of analysis inputs. Parsing is strict about types
// (cycle counts must be non-negative integers) and funnels structural checks
// through validate_system, so a loaded TaskSystem is always usable as-is.
#ifndef TIPS_IO_HPP
#define TIPS_IO_HPP 1

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tips/cfg.hpp"
#include "tips/errors.hpp"

namespace tips {

using Json = nlohmann::json;

namespace detail {

inline const Json& member(const Json& j, const char* key, const std::string& ctx) {
  if (!j.is_object()) throw ParseError(ctx + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(ctx + ": missing key '" + key + "'");
  return *it;
}

inline std::uint64_t as_u64(const Json& j, const std::string& ctx) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  throw ParseError(ctx + ": expected a non-negative integer");
}

inline std::uint64_t u64_field(const Json& j, const char* key, const std::string& ctx) {
  return as_u64(member(j, key, ctx), ctx + "." + key);
}

inline std::string str_field(const Json& j, const char* key, const std::string& ctx) {
  const Json& v = member(j, key, ctx);
  if (!v.is_string()) throw ParseError(ctx + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline MemClass mem_class_from(const std::string& s, const std::string& ctx) {
  if (s == "AlwaysHit") return MemClass::AlwaysHit;
  if (s == "NotClassified") return MemClass::NotClassified;
  if (s == "NonMemory") return MemClass::NonMemory;
  throw ParseError(ctx + ": unknown mem_class '" + s + "'");
}

inline std::vector<Edge> edge_list(const Json& j, const std::string& ctx) {
  if (!j.is_array()) throw ParseError(ctx + ": expected an array of [src, dst] pairs");
  std::vector<Edge> out;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
      throw ParseError(ctx + ": each edge must be a [src, dst] string pair");
    out.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  return out;
}

}  // namespace detail

inline AnalysisConfig config_from_json(const Json& j) {
  using namespace detail;
  AnalysisConfig c;
  c.access_time = u64_field(j, "access_time", "config");
  c.delta = u64_field(j, "delta", "config");
  c.max_traces = u64_field(j, "max_traces", "config");
  if (j.contains("bus_access_latency"))
    c.bus_access_latency = as_u64(j["bus_access_latency"], "config.bus_access_latency");
  else
    c.bus_access_latency = c.access_time;
  return c;
}

inline TaskCFG task_from_json(const Json& j) {
  using namespace detail;
  TaskCFG cfg;
  cfg.name = str_field(j, "name", "task");
  const std::string ctx = "task '" + cfg.name + "'";
  cfg.entry = str_field(j, "entry", ctx);
  cfg.exit = str_field(j, "exit", ctx);

  const Json& blocks = member(j, "blocks", ctx);
  if (!blocks.is_array()) throw ParseError(ctx + ".blocks: expected an array");
  for (const auto& bj : blocks) {
    BasicBlock b;
    b.id = str_field(bj, "id", ctx + ".blocks[]");
    const std::string bctx = ctx + " block '" + b.id + "'";
    const Json& instrs = member(bj, "instructions", bctx);
    if (!instrs.is_array()) throw ParseError(bctx + ".instructions: expected an array");
    for (const auto& ij : instrs) {
      Instruction in;
      in.id = str_field(ij, "id", bctx + ".instructions[]");
      const std::string ictx = bctx + " instruction '" + in.id + "'";
      in.wcet = u64_field(ij, "wcet", ictx);
      in.mem_class = mem_class_from(str_field(ij, "mem_class", ictx), ictx);
      in.max_accesses = ij.contains("max_accesses") ? as_u64(ij["max_accesses"], ictx) : 0;
      b.instructions.push_back(std::move(in));
    }
    cfg.blocks.push_back(std::move(b));
  }

  cfg.edges = edge_list(member(j, "edges", ctx), ctx + ".edges");

  if (j.contains("loops")) {
    const Json& loops = j["loops"];
    if (!loops.is_array()) throw ParseError(ctx + ".loops: expected an array");
    for (const auto& lj : loops) {
      LoopInfo L;
      L.header = str_field(lj, "header", ctx + ".loops[]");
      const std::string lctx = ctx + " loop '" + L.header + "'";
      const Json& members = member(lj, "members", lctx);
      if (!members.is_array()) throw ParseError(lctx + ".members: expected an array");
      for (const auto& m : members) {
        if (!m.is_string()) throw ParseError(lctx + ".members: expected block ids");
        L.members.insert(m.get<std::string>());
      }
      auto backs = detail::edge_list(member(lj, "back_edges", lctx), lctx + ".back_edges");
      L.back_edges.insert(backs.begin(), backs.end());
      auto exits = detail::edge_list(member(lj, "exit_edges", lctx), lctx + ".exit_edges");
      L.exit_edges.insert(exits.begin(), exits.end());
      L.min_iter = lj.contains("min_iter") ? as_u64(lj["min_iter"], lctx + ".min_iter") : 0;
      L.max_iter = u64_field(lj, "max_iter", lctx);
      cfg.loops.push_back(std::move(L));
    }
  }

  normalize(cfg);
  return cfg;
}

inline TaskSystem system_from_json(const Json& j) {
  using namespace detail;
  TaskSystem sys;
  sys.config = config_from_json(member(j, "config", "document"));
  const Json& tasks = member(j, "tasks", "document");
  if (!tasks.is_array()) throw ParseError("document.tasks: expected an array");
  for (const auto& tj : tasks) sys.tasks.push_back(task_from_json(tj));
  std::sort(sys.tasks.begin(), sys.tasks.end(),
            [](const TaskCFG& a, const TaskCFG& b) { return a.name < b.name; });
  if (j.contains("placements")) {
    const Json& ps = j["placements"];
    if (!ps.is_array()) throw ParseError("document.placements: expected an array");
    for (const auto& pj : ps) {
      Placement p;
      p.task = str_field(pj, "task", "placement");
      const std::string pctx = "placement '" + p.task + "'";
      p.core = static_cast<std::uint32_t>(u64_field(pj, "core", pctx));
      p.release = pj.contains("release") ? as_u64(pj["release"], pctx + ".release") : 0;
      sys.placements.push_back(std::move(p));
    }
    std::sort(sys.placements.begin(), sys.placements.end(),
              [](const Placement& a, const Placement& b) { return a.task < b.task; });
  }
  validate_system(sys);
  return sys;
}

// Parses and validates a whole input document.
inline TaskSystem load_task_system(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return system_from_json(j);
}

inline Json config_to_json(const AnalysisConfig& c) {
  return Json{{"access_time", c.access_time},
              {"delta", c.delta},
              {"max_traces", c.max_traces},
              {"bus_access_latency", c.bus_access_latency}};
}

inline Json task_to_json(const TaskCFG& cfg) {
  Json blocks = Json::array();
  for (const auto& b : cfg.blocks) {
    Json instrs = Json::array();
    for (const auto& i : b.instructions)
      instrs.push_back(Json{{"id", i.id},
                            {"wcet", i.wcet},
                            {"mem_class", to_string(i.mem_class)},
                            {"max_accesses", i.max_accesses}});
    blocks.push_back(Json{{"id", b.id}, {"instructions", std::move(instrs)}});
  }
  Json edges = Json::array();
  for (const auto& e : cfg.edges) edges.push_back(Json::array({e.first, e.second}));
  Json loops = Json::array();
  for (const auto& L : cfg.loops) {
    Json members = Json::array();
    for (const auto& m : L.members) members.push_back(m);
    Json backs = Json::array();
    for (const auto& e : L.back_edges) backs.push_back(Json::array({e.first, e.second}));
    Json exits = Json::array();
    for (const auto& e : L.exit_edges) exits.push_back(Json::array({e.first, e.second}));
    loops.push_back(Json{{"header", L.header},
                         {"members", std::move(members)},
                         {"back_edges", std::move(backs)},
                         {"exit_edges", std::move(exits)},
                         {"min_iter", L.min_iter},
                         {"max_iter", L.max_iter}});
  }
  return Json{{"name", cfg.name}, {"entry", cfg.entry},   {"exit", cfg.exit},
              {"blocks", std::move(blocks)}, {"edges", std::move(edges)},
              {"loops", std::move(loops)}};
}

inline Json system_to_json(const TaskSystem& sys) {
  Json tasks = Json::array();
  for (const auto& t : sys.tasks) tasks.push_back(task_to_json(t));
  Json placements = Json::array();
  for (const auto& p : sys.placements)
    placements.push_back(Json{{"task", p.task}, {"core", p.core}, {"release", p.release}});
  return Json{{"config", config_to_json(sys.config)},
              {"tasks", std::move(tasks)},
              {"placements", std::move(placements)}};
}

inline std::string save_task_system(const TaskSystem& sys) {
  return system_to_json(sys).dump(2) + "\n";
}

}  // namespace tips

#endif
