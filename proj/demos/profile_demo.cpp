// End-to-end library walkthrough: builds two small annotated CFGs in code,
// abstracts them, enumerates their worst-case traces, derives fused access
// profiles and schedules them on two cores.
#include <iostream>

#include "tips/render.hpp"
#include "tips/scheduler.hpp"
#include "tips/segments.hpp"
#include "tips/tipsgraph.hpp"
#include "tips/trace_enum.hpp"

namespace {

tips::TaskCFG make_sensor_task() {
  using namespace tips;
  TaskCFG cfg;
  cfg.name = "sensor";
  cfg.entry = "init";
  cfg.exit = "emit";
  cfg.blocks = {
      BasicBlock{"init", {Instruction{"setup", 4, MemClass::NonMemory, 0}}},
      BasicBlock{"poll",
                 {Instruction{"cond", 1, MemClass::AlwaysHit, 0},
                  Instruction{"read", 0, MemClass::NotClassified, 2}}},
      BasicBlock{"emit", {Instruction{"pack", 3, MemClass::NonMemory, 0},
                          Instruction{"send", 0, MemClass::NotClassified, 1}}},
  };
  cfg.edges = {{"init", "poll"}, {"poll", "poll"}, {"poll", "emit"}};
  LoopInfo loop;
  loop.header = "poll";
  loop.members = {"poll"};
  loop.back_edges = {{"poll", "poll"}};
  loop.exit_edges = {{"poll", "emit"}};
  loop.min_iter = 1;
  loop.max_iter = 3;
  cfg.loops = {loop};
  normalize(cfg);
  return cfg;
}

tips::TaskCFG make_filter_task() {
  using namespace tips;
  TaskCFG cfg;
  cfg.name = "filter";
  cfg.entry = "in";
  cfg.exit = "out";
  cfg.blocks = {
      BasicBlock{"in", {Instruction{"fetch", 0, MemClass::NotClassified, 3}}},
      BasicBlock{"out", {Instruction{"store", 6, MemClass::NonMemory, 0}}},
  };
  cfg.edges = {{"in", "out"}};
  normalize(cfg);
  return cfg;
}

}  // namespace

int main() {
  using namespace tips;
  AnalysisConfig conf;
  conf.access_time = 5;
  conf.bus_access_latency = 5;
  conf.delta = 12;
  conf.max_traces = 100;

  std::vector<SegmentSequence> profiles;
  for (const TaskCFG& cfg : {make_sensor_task(), make_filter_task()}) {
    validate_task(cfg);
    const TipsGraph tg = build_tipsgraph(cfg, conf);
    const TraceSet ts = enumerate_traces(tg, conf);
    const SegmentSequence seq = segments_for_task(tg, ts, conf);
    std::cout << "== " << cfg.name << " ==\n"
              << tipsgraph_text(tg) << traces_text(ts) << segments_text(seq) << "\n";
    profiles.push_back(seq);
  }

  const std::vector<Placement> placements = {{"filter", 1, 0}, {"sensor", 0, 0}};
  const Schedule sch = build_schedule(profiles, placements, conf);
  std::cout << schedule_text(sch) << "\n" << render_text(sch, 60);
  return 0;
}
