// Baseline partitioned scheduler over task access profiles. Tasks are placed
// rigidly (fixed core, fixed release); cross-core bus contention stretches
// their segments: a segment pays min(own accesses, peer accesses) extra bus
// slots for every peer segment it overlaps on another core. Stretching moves
// later segments, which changes overlaps, so the layout is iterated to a
// fixed point.
#ifndef TIPS_SCHEDULER_HPP
#define TIPS_SCHEDULER_HPP 1

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tips/cfg.hpp"
#include "tips/errors.hpp"
#include "tips/segments.hpp"

namespace tips {

struct PlacedSegment {
  Cycles start = 0;          // absolute date
  Cycles duration = 0;       // base duration plus inflation
  Cycles base_duration = 0;
  Cycles access_bound = 0;   // worst single-run accesses of the base segment
  Cycles inflation = 0;

  Cycles end() const { return start + duration; }

  friend bool operator==(const PlacedSegment&, const PlacedSegment&) = default;
};

struct ScheduledTask {
  std::string task;
  std::uint32_t core = 0;
  Cycles release = 0;
  std::vector<PlacedSegment> segments;

  Cycles start() const { return release; }
  Cycles end() const { return segments.empty() ? release : segments.back().end(); }
  Cycles total_inflation() const {
    Cycles sum = 0;
    for (const auto& s : segments) sum += s.inflation;
    return sum;
  }

  friend bool operator==(const ScheduledTask&, const ScheduledTask&) = default;
};

struct Schedule {
  std::vector<ScheduledTask> tasks;  // sorted by task name
  Cycles makespan = 0;
  int rounds = 0;  // fixed-point sweeps until stable

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

namespace detail {

inline bool spans_overlap(Cycles s1, Cycles e1, Cycles s2, Cycles e2) {
  return s1 < e2 && s2 < e1;
}

// Chain a task's segments contiguously from its release using the current
// inflations.
inline void relayout(ScheduledTask& t) {
  Cycles at = t.release;
  for (auto& s : t.segments) {
    s.start = at;
    s.duration = checked_add(s.base_duration, s.inflation);
    at = checked_add(at, s.duration);
  }
}

inline std::vector<Placement> default_placements(const std::vector<SegmentSequence>& profiles) {
  std::vector<Placement> out;
  Cycles at = 0;
  for (const auto& p : profiles) {  // profiles already sorted by task name
    out.push_back(Placement{p.task, 0, at});
    at = checked_add(at, p.d_max);
  }
  return out;
}

// Bus delay suffered by one segment from every overlapping segment on other
// cores, under the current layout.
inline Cycles segment_interference(const Schedule& sch, size_t ti, size_t si,
                                   const AnalysisConfig& conf) {
  const auto& me = sch.tasks[ti].segments[si];
  if (me.access_bound == 0) return 0;
  Cycles delay = 0;
  for (size_t tj = 0; tj < sch.tasks.size(); ++tj) {
    if (tj == ti || sch.tasks[tj].core == sch.tasks[ti].core) continue;
    for (const auto& peer : sch.tasks[tj].segments) {
      if (peer.access_bound == 0) continue;
      if (!spans_overlap(me.start, me.end(), peer.start, peer.end())) continue;
      delay = checked_add(delay, checked_mul(std::min(me.access_bound, peer.access_bound),
                                             conf.bus_access_latency));
    }
  }
  return delay;
}

inline Schedule initial_layout(const std::vector<SegmentSequence>& profiles,
                               std::vector<Placement> placements) {
  std::vector<SegmentSequence> sorted = profiles;
  std::sort(sorted.begin(), sorted.end(),
            [](const SegmentSequence& a, const SegmentSequence& b) { return a.task < b.task; });
  for (size_t k = 0; k + 1 < sorted.size(); ++k)
    if (sorted[k].task == sorted[k + 1].task)
      throw ValidationError("duplicate profile for task '" + sorted[k].task + "'");

  if (placements.empty()) {
    placements = default_placements(sorted);
  } else {
    std::sort(placements.begin(), placements.end(),
              [](const Placement& a, const Placement& b) { return a.task < b.task; });
    if (placements.size() != sorted.size())
      throw ValidationError("placements must cover every task exactly once");
    for (size_t k = 0; k < sorted.size(); ++k)
      if (placements[k].task != sorted[k].task)
        throw ValidationError("placement refers to unknown task '" + placements[k].task + "'");
  }

  Schedule sch;
  for (size_t k = 0; k < sorted.size(); ++k) {
    validate_sequence(sorted[k]);
    ScheduledTask t;
    t.task = sorted[k].task;
    t.core = placements[k].core;
    t.release = placements[k].release;
    for (const auto& s : sorted[k].segments)
      t.segments.push_back(PlacedSegment{0, 0, s.duration, max_access(s), 0});
    relayout(t);
    sch.tasks.push_back(std::move(t));
  }
  return sch;
}

}  // namespace detail

// Iterates bus-contention inflation to a fixed point and returns the stable
// schedule. Throws ConvergenceError if the layout keeps changing after 100
// rounds, ValidationError if tasks end up overlapping on a shared core.
inline Schedule build_schedule(const std::vector<SegmentSequence>& profiles,
                               const std::vector<Placement>& placements,
                               const AnalysisConfig& conf) {
  Schedule sch = detail::initial_layout(profiles, placements);

  constexpr int kMaxRounds = 100;
  for (int round = 1;; ++round) {
    if (round > kMaxRounds)
      throw ConvergenceError("schedule did not stabilize after " + std::to_string(kMaxRounds) +
                             " rounds");
    // Jacobi sweep: all inflations are read off the same frozen layout.
    std::vector<std::vector<Cycles>> next(sch.tasks.size());
    bool changed = false;
    for (size_t ti = 0; ti < sch.tasks.size(); ++ti) {
      next[ti].resize(sch.tasks[ti].segments.size());
      for (size_t si = 0; si < sch.tasks[ti].segments.size(); ++si) {
        next[ti][si] = detail::segment_interference(sch, ti, si, conf);
        changed = changed || next[ti][si] != sch.tasks[ti].segments[si].inflation;
      }
    }
    if (!changed) {
      sch.rounds = round;
      break;
    }
    for (size_t ti = 0; ti < sch.tasks.size(); ++ti) {
      for (size_t si = 0; si < sch.tasks[ti].segments.size(); ++si)
        sch.tasks[ti].segments[si].inflation = next[ti][si];
      detail::relayout(sch.tasks[ti]);
    }
  }

  for (size_t a = 0; a < sch.tasks.size(); ++a)
    for (size_t b = a + 1; b < sch.tasks.size(); ++b) {
      if (sch.tasks[a].core != sch.tasks[b].core) continue;
      if (detail::spans_overlap(sch.tasks[a].start(), sch.tasks[a].end(), sch.tasks[b].start(),
                                sch.tasks[b].end()))
        throw ValidationError("schedule infeasible: tasks '" + sch.tasks[a].task + "' and '" +
                              sch.tasks[b].task + "' overlap on core " +
                              std::to_string(sch.tasks[a].core));
    }

  for (const auto& t : sch.tasks) sch.makespan = std::max(sch.makespan, t.end());
  return sch;
}

// Independent re-check of a finished schedule: segments chain from their
// release, every inflation equals the interference implied by the final
// layout, no shared core double-books, and the makespan is the latest end.
inline Report verify_schedule(const Schedule& sch, const std::vector<SegmentSequence>& profiles,
                              const AnalysisConfig& conf) {
  Report rep;
  std::map<std::string, const SegmentSequence*> by_name;
  for (const auto& p : profiles) by_name[p.task] = &p;
  {
    std::set<std::string> scheduled;
    for (const auto& t : sch.tasks) scheduled.insert(t.task);
    for (const auto& [name, prof] : by_name)
      if (!scheduled.count(name)) rep.add("task '" + name + "' missing from schedule");
  }

  for (size_t ti = 0; ti < sch.tasks.size(); ++ti) {
    const auto& t = sch.tasks[ti];
    auto pit = by_name.find(t.task);
    if (pit == by_name.end()) {
      rep.add("schedule contains unknown task '" + t.task + "'");
      continue;
    }
    const auto& prof = pit->second->segments;
    if (prof.size() != t.segments.size()) {
      rep.add("task '" + t.task + "': schedule has " + std::to_string(t.segments.size()) +
              " segments, profile has " + std::to_string(prof.size()));
      continue;
    }
    Cycles at = t.release;
    for (size_t si = 0; si < t.segments.size(); ++si) {
      const auto& s = t.segments[si];
      if (s.base_duration != prof[si].duration || s.access_bound != max_access(prof[si]))
        rep.add("task '" + t.task + "': segment " + std::to_string(si) +
                " does not match its profile");
      if (s.start != at)
        rep.add("task '" + t.task + "': segment " + std::to_string(si) + " starts at " +
                std::to_string(s.start) + ", expected " + std::to_string(at));
      if (s.duration != s.base_duration + s.inflation)
        rep.add("task '" + t.task + "': segment " + std::to_string(si) +
                " duration disagrees with its inflation");
      const Cycles want = detail::segment_interference(sch, ti, si, conf);
      if (s.inflation != want)
        rep.add("task '" + t.task + "': segment " + std::to_string(si) + " inflation " +
                std::to_string(s.inflation) + " != interference " + std::to_string(want));
      at = s.end();
    }
  }

  for (size_t a = 0; a < sch.tasks.size(); ++a)
    for (size_t b = a + 1; b < sch.tasks.size(); ++b)
      if (sch.tasks[a].core == sch.tasks[b].core &&
          detail::spans_overlap(sch.tasks[a].start(), sch.tasks[a].end(), sch.tasks[b].start(),
                                sch.tasks[b].end()))
        rep.add("tasks '" + sch.tasks[a].task + "' and '" + sch.tasks[b].task +
                "' overlap on core " + std::to_string(sch.tasks[a].core));

  Cycles end = 0;
  for (const auto& t : sch.tasks) end = std::max(end, t.end());
  if (end != sch.makespan)
    rep.add("makespan " + std::to_string(sch.makespan) + " != latest task end " +
            std::to_string(end));
  return rep;
}

struct BudgetEntry {
  std::string task;
  Cycles interference = 0;
  Cycles budget = 0;
  bool over = false;

  friend bool operator==(const BudgetEntry&, const BudgetEntry&) = default;
};

struct BudgetReport {
  std::vector<BudgetEntry> entries;  // sorted by task name
  bool ok = true;

  friend bool operator==(const BudgetReport&, const BudgetReport&) = default;
};

// Budget mode: one interference pass over the uninflated layout; each task's
// total cross-core delay is compared against the per-task budget.
inline BudgetReport check_budgets(const std::vector<SegmentSequence>& profiles,
                                  const std::vector<Placement>& placements, Cycles budget,
                                  const AnalysisConfig& conf) {
  const Schedule base = detail::initial_layout(profiles, placements);
  BudgetReport rep;
  for (size_t ti = 0; ti < base.tasks.size(); ++ti) {
    BudgetEntry e;
    e.task = base.tasks[ti].task;
    e.budget = budget;
    for (size_t si = 0; si < base.tasks[ti].segments.size(); ++si)
      e.interference =
          detail::checked_add(e.interference, detail::segment_interference(base, ti, si, conf));
    e.over = e.interference > budget;
    rep.ok = rep.ok && !e.over;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

inline std::string schedule_text(const Schedule& sch) {
  std::string s;
  for (const auto& t : sch.tasks)
    s += "task " + t.task + " core " + std::to_string(t.core) + " release " +
         std::to_string(t.release) + " start " + std::to_string(t.start()) + " end " +
         std::to_string(t.end()) + " inflation " + std::to_string(t.total_inflation()) + "\n";
  s += "makespan " + std::to_string(sch.makespan) + "\n";
  return s;
}

inline std::string budget_text(const BudgetReport& rep) {
  std::string s;
  for (const auto& e : rep.entries)
    s += "task " + e.task + " interference " + std::to_string(e.interference) + " budget " +
         std::to_string(e.budget) + (e.over ? " OVER" : " OK") + "\n";
  s += std::string("result ") + (rep.ok ? "OK" : "OVER") + "\n";
  return s;
}

}  // namespace tips

#endif
