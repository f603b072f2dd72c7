// Temporal access profiles: each task's timeline [0, d_max) is partitioned
// into segments annotated, per worst-case trace, with a conservative bound on
// the bus accesses that trace may perform inside the segment. Profiles from
// all traces are aligned on a common refinement, then short segments are fused
// until they reach the scheduler's granularity delta.
#ifndef TIPS_SEGMENTS_HPP
#define TIPS_SEGMENTS_HPP 1

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tips/cfg.hpp"
#include "tips/errors.hpp"
#include "tips/tipsgraph.hpp"
#include "tips/trace_enum.hpp"

namespace tips {

struct Segment {
  Cycles start = 0;
  Cycles duration = 0;
  std::map<std::string, Cycles> accesses;  // trace key -> access bound, positive entries only

  Cycles end() const { return start + duration; }

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct SegmentSequence {
  std::string task;
  Cycles d_max = 0;
  std::vector<Segment> segments;  // contiguous partition of [0, d_max)

  friend bool operator==(const SegmentSequence&, const SegmentSequence&) = default;
};

// Worst accesses any single execution may perform in the segment: traces are
// alternative runs, so the bound is the max entry, not the sum.
inline Cycles max_access(const Segment& s) {
  Cycles m = 0;
  for (const auto& [key, n] : s.accesses) m = std::max(m, n);
  return m;
}

// Overlap of two segments; empty (or merely touching) windows yield nothing.
// Access bounds merge by per-key maximum.
inline std::optional<Segment> segment_intersect(const Segment& a, const Segment& b) {
  const Cycles lo = std::max(a.start, b.start);
  const Cycles hi = std::min(a.end(), b.end());
  if (lo >= hi) return std::nullopt;
  Segment s;
  s.start = lo;
  s.duration = hi - lo;
  s.accesses = a.accesses;
  for (const auto& [key, n] : b.accesses) {
    auto [it, inserted] = s.accesses.emplace(key, n);
    if (!inserted) it->second = std::max(it->second, n);
  }
  return s;
}

// Profile of one trace: an access segment per bus burst, silent gaps between,
// padded with a final gap up to the common horizon. Zero-length pieces are
// dropped.
inline std::vector<Segment> segments_of_trace(const Trace& trace, const std::string& key,
                                              Cycles d_max, const TipsGraph& tg,
                                              const AnalysisConfig& conf) {
  std::map<std::string, Cycles> mu;
  for (const auto& t : tg.tips) mu[t.id] = t.max_accesses;
  auto mu_of = [&](const std::string& tip) {
    auto it = mu.find(tip);
    if (it == mu.end())
      throw ValidationError("task '" + tg.task + "': trace visits unknown point '" + tip + "'");
    return it->second;
  };

  std::vector<Segment> out;
  Cycles cur = 0;
  auto gap_until = [&](Cycles to) {
    if (to > cur) out.push_back(Segment{cur, to - cur, {}});
    cur = to;
  };
  for (const auto& occ : trace) {
    const Cycles m = mu_of(occ.tip);
    if (m == 0) continue;
    if (occ.date < cur)
      throw ValidationError("task '" + tg.task + "': overlapping access bursts at point '" +
                            occ.tip + "'");
    gap_until(occ.date);
    const Cycles burst = detail::checked_mul(m, conf.access_time);
    out.push_back(Segment{cur, burst, {{key, m}}});
    cur = detail::checked_add(cur, burst);
  }
  if (cur > d_max)
    throw ValidationError("task '" + tg.task + "': access burst runs past the horizon");
  gap_until(d_max);
  return out;
}

// Common refinement of two aligned partitions: cut both at the union of their
// boundaries and merge the covering segments piecewise.
inline std::vector<Segment> sequence_intersection(const std::vector<Segment>& a,
                                                  const std::vector<Segment>& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.front().start != b.front().start || a.back().end() != b.back().end())
    throw ValidationError("cannot align segment sequences over different spans");
  std::vector<Segment> out;
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    auto piece = segment_intersect(a[i], b[j]);
    if (!piece)
      throw ValidationError("segment sequences are not contiguous partitions");
    out.push_back(std::move(*piece));
    if (a[i].end() <= b[j].end()) ++i;
    if (b[j].end() <= out.back().end()) ++j;
  }
  if (i != a.size() || j != b.size())
    throw ValidationError("segment sequences are not contiguous partitions");
  return out;
}

// Coarsens a partition for scheduling at granularity delta: silent stretches
// already >= delta survive untouched, everything else accumulates left to
// right until a chunk reaches delta. Counts of one trace add up when its
// pieces land in the same chunk.
inline std::vector<Segment> fuse_segments(const std::vector<Segment>& in, Cycles delta) {
  std::vector<Segment> out;
  std::optional<Segment> run;
  auto flush = [&]() {
    if (run) {
      out.push_back(std::move(*run));
      run.reset();
    }
  };
  for (const auto& s : in) {
    if (s.accesses.empty() && s.duration >= delta) {
      flush();
      out.push_back(s);
      continue;
    }
    if (!run) {
      run = s;
    } else {
      run->duration += s.duration;
      for (const auto& [key, n] : s.accesses) run->accesses[key] += n;
    }
    if (run->duration >= delta) flush();
  }
  flush();
  return out;
}

// Full profile of a task: per-trace profiles (keys t0, t1, ... in canonical
// trace order) aligned on their common refinement, then fused at delta.
inline SegmentSequence segments_for_task(const TipsGraph& tg, const TraceSet& ts,
                                         const AnalysisConfig& conf) {
  SegmentSequence seq;
  seq.task = tg.task;
  seq.d_max = ts.d_max;
  std::vector<Segment> acc;
  for (size_t k = 0; k < ts.traces.size(); ++k) {
    auto one = segments_of_trace(ts.traces[k], "t" + std::to_string(k), ts.d_max, tg, conf);
    acc = k == 0 ? std::move(one) : sequence_intersection(acc, one);
  }
  seq.segments = fuse_segments(acc, conf.delta);
  return seq;
}

inline void validate_sequence(const SegmentSequence& seq) {
  if (seq.segments.empty()) {
    if (seq.d_max != 0)
      throw ValidationError("task '" + seq.task + "': empty profile over nonzero horizon");
    return;
  }
  if (seq.segments.front().start != 0)
    throw ValidationError("task '" + seq.task + "': profile does not start at 0");
  for (size_t k = 0; k < seq.segments.size(); ++k) {
    const auto& s = seq.segments[k];
    if (s.duration == 0)
      throw ValidationError("task '" + seq.task + "': zero-length segment at " +
                            std::to_string(s.start));
    if (k + 1 < seq.segments.size() && seq.segments[k + 1].start != s.end())
      throw ValidationError("task '" + seq.task + "': profile gap or overlap at " +
                            std::to_string(s.end()));
    for (const auto& [key, n] : s.accesses)
      if (key.empty() || n == 0)
        throw ValidationError("task '" + seq.task + "': degenerate access entry at " +
                              std::to_string(s.start));
  }
  if (seq.segments.back().end() != seq.d_max)
    throw ValidationError("task '" + seq.task + "': profile ends at " +
                          std::to_string(seq.segments.back().end()) + ", horizon is " +
                          std::to_string(seq.d_max));
}

// Worst accesses the task may perform inside any window of the given width,
// counting a segment's bound as soon as the window touches it. The maximum
// over all placements is reached at a boundary of the piecewise-constant
// overlap pattern, so only those candidates are evaluated.
inline Cycles window_access_bound(const SegmentSequence& seq, Cycles window) {
  if (window == 0 || seq.segments.empty()) return 0;
  std::set<Cycles> candidates{0};
  for (const auto& s : seq.segments) {
    candidates.insert(s.end());  // piece where s is no longer covered
    if (s.start + 1 > window) candidates.insert(s.start + 1 - window);  // piece gaining s
  }
  Cycles best = 0;
  for (Cycles x : candidates) {
    std::map<std::string, Cycles> per_key;
    for (const auto& s : seq.segments) {
      if (x < s.end() && s.start < x + window)
        for (const auto& [key, n] : s.accesses) per_key[key] += n;
    }
    for (const auto& [key, n] : per_key) best = std::max(best, n);
  }
  return best;
}

// Independent soundness replay: for every worst-case trace, place its bus
// transactions back on the timeline and check each segment claims at least as
// many of that trace's accesses as can overlap it.
inline Report verify_segments(const TipsGraph& tg, const TraceSet& ts, const SegmentSequence& seq,
                              const AnalysisConfig& conf) {
  Report rep;
  try {
    validate_sequence(seq);
  } catch (const ValidationError& e) {
    rep.add(e.what());
    return rep;
  }
  if (seq.d_max != ts.d_max)
    rep.add("task '" + seq.task + "': profile horizon " + std::to_string(seq.d_max) +
            " differs from trace horizon " + std::to_string(ts.d_max));

  std::map<std::string, Cycles> mu;
  for (const auto& t : tg.tips) mu[t.id] = t.max_accesses;

  for (size_t k = 0; k < ts.traces.size(); ++k) {
    const std::string key = "t" + std::to_string(k);
    std::vector<std::pair<Cycles, Cycles>> events;  // one [lo, hi) slot per bus access
    for (const auto& occ : ts.traces[k]) {
      auto mit = mu.find(occ.tip);
      if (mit == mu.end()) {
        rep.add("task '" + seq.task + "': trace visits unknown point '" + occ.tip + "'");
        continue;
      }
      const Cycles m = mit->second;
      for (Cycles i = 0; i < m; ++i)
        events.emplace_back(occ.date + i * conf.access_time,
                            occ.date + (i + 1) * conf.access_time);
    }
    for (const auto& s : seq.segments) {
      Cycles overlapping = 0;
      for (const auto& [lo, hi] : events)
        if (lo < s.end() && s.start < hi) ++overlapping;
      auto it = s.accesses.find(key);
      const Cycles claimed = it == s.accesses.end() ? 0 : it->second;
      if (overlapping > claimed)
        rep.add("task '" + seq.task + "': segment [" + std::to_string(s.start) + "," +
                std::to_string(s.end()) + ") claims " + std::to_string(claimed) +
                " accesses for " + key + " but " + std::to_string(overlapping) + " can overlap");
    }
  }
  return rep;
}

// Plain-text dump: one line per segment with its worst single-run access
// count, then the horizon.
inline std::string segments_text(const SegmentSequence& seq) {
  std::string s;
  for (const auto& seg : seq.segments)
    s += "segment " + std::to_string(seg.start) + " " + std::to_string(seg.duration) + " " +
         std::to_string(max_access(seg)) + "\n";
  s += "d_max " + std::to_string(seq.d_max) + "\n";
  return s;
}

}  // namespace tips

#endif
