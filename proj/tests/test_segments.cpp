// Segment-profile tests: burst extraction from traces, partition refinement,
// delta-fusion, window bounds (with brute-force cross-checks) and the
// occupancy replay that guards profiles against undercounting.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "tips/segments.hpp"
#include "tips/tipsgraph.hpp"
#include "tips/trace_enum.hpp"
#include "testutil/fixtures.hpp"
#include "testutil/random_task.hpp"

using namespace tips;
using namespace tips::testutil;

namespace {

struct Built {
  TipsGraph tg;
  TraceSet ts;
  SegmentSequence seq;
};

Built build_all(const TaskSystem& sys, size_t task = 0) {
  Built b;
  b.tg = build_tipsgraph(sys.tasks[task], sys.config);
  b.ts = enumerate_traces(b.tg, sys.config);
  b.seq = segments_for_task(b.tg, b.ts, sys.config);
  return b;
}

// Reference implementation of the window bound: slide the window start over
// every integer offset instead of only the breakpoints.
Cycles brute_window(const SegmentSequence& seq, Cycles w) {
  if (w == 0 || seq.segments.empty()) return 0;
  Cycles best = 0;
  for (Cycles x = 0; x <= seq.d_max; ++x) {
    std::map<std::string, Cycles> per;
    for (const auto& s : seq.segments)
      if (x < s.end() && s.start < x + w)
        for (const auto& [k, n] : s.accesses) per[k] += n;
    for (const auto& [k, n] : per) best = std::max(best, n);
  }
  return best;
}

Cycles key_total(const SegmentSequence& seq, const std::string& key) {
  Cycles sum = 0;
  for (const auto& s : seq.segments) {
    auto it = s.accesses.find(key);
    if (it != s.accesses.end()) sum += it->second;
  }
  return sum;
}

}  // namespace

TEST_CASE("segment_intersect merges overlaps by per-key maximum") {
  const Segment a{0, 10, {{"t0", 3}, {"t1", 1}}};
  const Segment b{4, 10, {{"t0", 2}, {"t2", 5}}};
  const auto s = segment_intersect(a, b);
  REQUIRE(s.has_value());
  CHECK(s->start == 4);
  CHECK(s->duration == 6);
  CHECK(s->accesses == std::map<std::string, Cycles>{{"t0", 3}, {"t1", 1}, {"t2", 5}});

  CHECK_FALSE(segment_intersect({0, 4, {}}, {4, 2, {}}).has_value());  // touching
  CHECK_FALSE(segment_intersect({0, 2, {}}, {5, 2, {}}).has_value());  // disjoint
  const auto nested = segment_intersect({0, 10, {{"a", 1}}}, {3, 2, {}});
  REQUIRE(nested.has_value());
  CHECK(nested->start == 3);
  CHECK(nested->duration == 2);
}

TEST_CASE("trace profile alternates silent gaps and access bursts") {
  const TaskSystem sys = load_fixture("fig3b.json");
  const Built b = build_all(sys);
  REQUIRE(b.ts.traces.size() == 1);
  const auto segs = segments_of_trace(b.ts.traces[0], "t0", b.ts.d_max, b.tg, sys.config);

  const std::vector<Segment> want = {{0, 5, {}},
                                     {5, 10, {{"t0", 1}}},
                                     {15, 678, {}},
                                     {693, 10, {{"t0", 1}}},
                                     {703, 4, {}}};
  CHECK(segs == want);
}

TEST_CASE("trace profile rejects inconsistent traces") {
  const TaskSystem sys = load_fixture("fig3b.json");
  const Built b = build_all(sys);

  Trace unknown = b.ts.traces[0];
  unknown[1].tip = "ghost";
  CHECK_THROWS_MATCHES(segments_of_trace(unknown, "t0", b.ts.d_max, b.tg, sys.config),
                       ValidationError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("unknown point 'ghost'")));

  Trace overlapping = b.ts.traces[0];
  overlapping[2].date = 7;  // i2 burst would start inside i1's burst [5,15)
  CHECK_THROWS_MATCHES(segments_of_trace(overlapping, "t0", b.ts.d_max, b.tg, sys.config),
                       ValidationError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("overlapping access bursts")));

  CHECK_THROWS_MATCHES(segments_of_trace(b.ts.traces[0], "t0", 700, b.tg, sys.config),
                       ValidationError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("past the horizon")));
}

TEST_CASE("sequence_intersection refines two partitions at the boundary union") {
  const std::vector<Segment> a = {{0, 4, {{"t0", 2}}}, {4, 6, {}}};
  const std::vector<Segment> b = {{0, 2, {}}, {2, 8, {{"t1", 1}}}};
  const std::vector<Segment> want = {
      {0, 2, {{"t0", 2}}}, {2, 2, {{"t0", 2}, {"t1", 1}}}, {4, 6, {{"t1", 1}}}};
  CHECK(sequence_intersection(a, b) == want);
  CHECK(sequence_intersection(b, a) == want);     // symmetric
  CHECK(sequence_intersection(a, a) == a);        // self-refinement is identity
  CHECK(sequence_intersection({}, a) == a);       // empty acts as neutral
  CHECK(sequence_intersection(a, {}) == a);

  CHECK_THROWS_MATCHES(sequence_intersection(a, {{0, 99, {}}}), ValidationError,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("different spans")));
  CHECK_THROWS_MATCHES(
      sequence_intersection({{0, 1, {}}, {7, 1, {}}}, {{0, 4, {}}, {4, 4, {}}}), ValidationError,
      Catch::Matchers::MessageMatches(
          Catch::Matchers::ContainsSubstring("not contiguous")));
}

TEST_CASE("fuse_segments at delta 0 is the identity") {
  const TaskSystem sys = load_fixture("fig1a.json");
  const Built b = build_all(sys);
  CHECK(fuse_segments(b.seq.segments, 0) == b.seq.segments);
  CHECK(fuse_segments({}, 0).empty());
}

TEST_CASE("fuse_segments keeps long silences and coalesces short pieces") {
  const std::vector<Segment> in = {{0, 3, {{"t0", 1}}},
                                   {3, 2, {}},
                                   {5, 1, {{"t1", 2}}},
                                   {6, 100, {}},
                                   {106, 2, {{"t0", 1}}}};
  const std::vector<Segment> want = {
      {0, 6, {{"t0", 1}, {"t1", 2}}}, {6, 100, {}}, {106, 2, {{"t0", 1}}}};
  CHECK(fuse_segments(in, 10) == want);

  // Same-key pieces in one chunk add up (they are parts of one run).
  CHECK(fuse_segments({{0, 2, {{"t0", 1}}}, {2, 2, {{"t0", 3}}}}, 10) ==
        std::vector<Segment>{{0, 4, {{"t0", 4}}}});

  // A chunk flushes exactly when it reaches delta.
  CHECK(fuse_segments({{0, 5, {{"t0", 1}}}, {5, 5, {{"t0", 1}}}, {10, 3, {{"t0", 9}}}}, 10) ==
        std::vector<Segment>{{0, 10, {{"t0", 2}}}, {10, 3, {{"t0", 9}}}});
}

TEST_CASE("fusion preserves spans and per-key totals") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    INFO("seed " << seed);
    const TaskSystem sys = make_system(seed);
    const Built b = build_all(sys);
    for (Cycles delta : {Cycles{0}, Cycles{3}, Cycles{17}, Cycles{1000000}}) {
      INFO("delta " << delta);
      const auto fused = fuse_segments(b.seq.segments, delta);
      SegmentSequence out{b.seq.task, b.seq.d_max, fused};
      REQUIRE_NOTHROW(validate_sequence(out));
      for (size_t k = 0; k < b.ts.traces.size(); ++k) {
        const std::string key = "t" + std::to_string(k);
        CHECK(key_total(out, key) == key_total(b.seq, key));
      }
      CHECK(fuse_segments(fused, delta) == fused);  // idempotent
    }
  }
}

TEST_CASE("task profile for the hand-checked single-trace fixture is exact") {
  const TaskSystem sys = load_fixture("fig3b.json");
  const Built b = build_all(sys);
  CHECK(b.seq.task == "main");
  CHECK(b.seq.d_max == 707);
  CHECK(b.seq.segments == std::vector<Segment>{{0, 5, {}},
                                               {5, 10, {{"t0", 1}}},
                                               {15, 678, {}},
                                               {693, 10, {{"t0", 1}}},
                                               {703, 4, {}}});
  CHECK(segments_text(b.seq) ==
        "segment 0 5 0\n"
        "segment 5 10 1\n"
        "segment 15 678 0\n"
        "segment 693 10 1\n"
        "segment 703 4 0\n"
        "d_max 707\n");
}

TEST_CASE("multi-trace profiles refine cleanly and stay conservative") {
  const TaskSystem sys = load_fixture("fig1a.json");
  const Built b = build_all(sys);
  REQUIRE_NOTHROW(validate_sequence(b.seq));
  CHECK(b.seq.d_max == 42);
  CHECK(verify_segments(b.tg, b.ts, b.seq, sys.config).ok());

  // Every key is one of the canonical trace keys and claims at least the
  // trace's real access count (refinement may duplicate, never drop).
  for (size_t k = 0; k < b.ts.traces.size(); ++k) {
    Cycles actual = 0;
    for (const auto& occ : b.ts.traces[k]) actual += b.tg.find_tip(occ.tip)->max_accesses;
    CHECK(key_total(b.seq, "t" + std::to_string(k)) >= actual);
  }
  for (const auto& s : b.seq.segments)
    for (const auto& [key, n] : s.accesses) {
      CHECK(key.size() >= 2);
      CHECK(key[0] == 't');
      CHECK(n >= 1);
    }
}

TEST_CASE("a task that never touches the bus profiles as one silent segment") {
  const TaskSystem sys = load_fixture("multi_task.json");
  const Built gamma = build_all(sys, 2);
  CHECK(gamma.seq.segments == std::vector<Segment>{{0, 4, {}}});
  CHECK(window_access_bound(gamma.seq, 100) == 0);
}

TEST_CASE("zero-length tasks profile as an empty sequence") {
  TaskCFG cfg;
  cfg.name = "null";
  cfg.blocks = {{"A", {{"a0", 0, MemClass::NonMemory, 0}}}};
  cfg.entry = "A";
  cfg.exit = "A";
  validate_task(cfg);
  AnalysisConfig conf;
  const TipsGraph tg = build_tipsgraph(cfg, conf);
  const TraceSet ts = enumerate_traces(tg, conf);
  REQUIRE(ts.d_max == 0);
  const SegmentSequence seq = segments_for_task(tg, ts, conf);
  CHECK(seq.segments.empty());
  REQUIRE_NOTHROW(validate_sequence(seq));
  CHECK(verify_segments(tg, ts, seq, conf).ok());
}

TEST_CASE("validate_sequence rejects malformed partitions") {
  auto seq = [](Cycles d_max, std::vector<Segment> segs) {
    return SegmentSequence{"x", d_max, std::move(segs)};
  };
  const auto msg = [](const char* needle) {
    return Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring(needle));
  };
  CHECK_THROWS_MATCHES(validate_sequence(seq(5, {})), ValidationError,
                       msg("empty profile over nonzero horizon"));
  CHECK_THROWS_MATCHES(validate_sequence(seq(5, {{1, 4, {}}})), ValidationError,
                       msg("does not start at 0"));
  CHECK_THROWS_MATCHES(validate_sequence(seq(5, {{0, 0, {}}, {0, 5, {}}})), ValidationError,
                       msg("zero-length segment"));
  CHECK_THROWS_MATCHES(validate_sequence(seq(5, {{0, 2, {}}, {3, 2, {}}})), ValidationError,
                       msg("gap or overlap at 2"));
  CHECK_THROWS_MATCHES(validate_sequence(seq(9, {{0, 5, {}}})), ValidationError,
                       msg("profile ends at 5"));
  CHECK_THROWS_MATCHES(validate_sequence(seq(5, {{0, 5, {{"", 1}}}})), ValidationError,
                       msg("degenerate access entry"));
  CHECK_THROWS_MATCHES(validate_sequence(seq(5, {{0, 5, {{"t0", 0}}}})), ValidationError,
                       msg("degenerate access entry"));
  REQUIRE_NOTHROW(validate_sequence(seq(0, {})));
}

TEST_CASE("window bound on the hand-checked fixture") {
  const TaskSystem sys = load_fixture("fig3b.json");
  const Built b = build_all(sys);
  CHECK(window_access_bound(b.seq, 0) == 0);
  CHECK(window_access_bound(b.seq, 10) == 1);
  CHECK(window_access_bound(b.seq, 679) == 1);   // just too narrow for both bursts
  CHECK(window_access_bound(b.seq, 680) == 2);   // [14, 694) touches both
  CHECK(window_access_bound(b.seq, 707) == 2);
  CHECK(window_access_bound(b.seq, 100000) == 2);

  for (Cycles w : {Cycles{1}, Cycles{5}, Cycles{10}, Cycles{100}, Cycles{679}, Cycles{680},
                   Cycles{688}, Cycles{707}, Cycles{1000}})
    CHECK(window_access_bound(b.seq, w) == brute_window(b.seq, w));
}

TEST_CASE("window bound matches the integer sweep everywhere on fig1a") {
  const TaskSystem sys = load_fixture("fig1a.json");
  const Built b = build_all(sys);
  for (Cycles w = 1; w <= b.seq.d_max + 3; ++w) {
    INFO("window " << w);
    CHECK(window_access_bound(b.seq, w) == brute_window(b.seq, w));
  }
}

TEST_CASE("window bound matches the integer sweep on random profiles") {
  int exercised = 0;
  for (std::uint64_t seed = 1; seed <= 40 && exercised < 8; ++seed) {
    const TaskSystem sys = make_system(seed);
    const Built b = build_all(sys);
    if (b.ts.traces.size() > 12 || b.seq.d_max > 1200 || b.seq.d_max == 0) continue;
    ++exercised;
    INFO("seed " << seed);
    for (Cycles w : {Cycles{1}, Cycles{3}, Cycles{17}, b.seq.d_max / 2 + 1, b.seq.d_max})
      CHECK(window_access_bound(b.seq, w) == brute_window(b.seq, w));
  }
  CHECK(exercised >= 3);  // the seed range must actually provide small cases
}

TEST_CASE("verify_segments accepts the computed profiles of every fixture") {
  for (const char* name : {"fig3b.json", "fig1a.json", "minimal.json", "multi_task.json",
                           "sched_two_core.json", "sched_disjoint.json"}) {
    INFO(name);
    const TaskSystem sys = load_fixture(name);
    for (size_t t = 0; t < sys.tasks.size(); ++t) {
      const Built b = build_all(sys, t);
      const Report rep = verify_segments(b.tg, b.ts, b.seq, sys.config);
      INFO(sys.tasks[t].name << ": " << (rep.ok() ? "" : rep.violations[0]));
      CHECK(rep.ok());
    }
  }
}

TEST_CASE("verify_segments catches undercounting and misalignment") {
  const TaskSystem sys = load_fixture("fig3b.json");
  const Built b = build_all(sys);

  SECTION("erasing a claimed access") {
    SegmentSequence bad = b.seq;
    bad.segments[1].accesses.clear();
    const Report rep = verify_segments(b.tg, b.ts, bad, sys.config);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].find("claims 0 accesses for t0 but 1 can overlap") !=
          std::string::npos);
  }

  SECTION("shifting a burst away from its dates") {
    SegmentSequence bad = b.seq;
    bad.segments[0].duration = 4;                      // [0,4)
    bad.segments[1].start = 4;                         // [4,14) carrying the claim
    bad.segments[2] = Segment{14, 679, {}};            // [14,693)
    REQUIRE_NOTHROW(validate_sequence(bad));
    const Report rep = verify_segments(b.tg, b.ts, bad, sys.config);
    REQUIRE_FALSE(rep.ok());                           // slot [5,15) leaks into [14,693)
    CHECK(rep.violations[0].find("[14,693) claims 0") != std::string::npos);
  }

  SECTION("horizon mismatch") {
    SegmentSequence bad = b.seq;
    bad.segments.back().duration += 1;
    bad.d_max += 1;
    const Report rep = verify_segments(b.tg, b.ts, bad, sys.config);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].find("differs from trace horizon") != std::string::npos);
  }

  SECTION("trace with an unknown point is reported, not thrown") {
    TraceSet odd = b.ts;
    odd.traces[0].insert(odd.traces[0].begin() + 1, TipOccurrence{"phantom", 2});
    const Report rep = verify_segments(b.tg, odd, b.seq, sys.config);
    REQUIRE_FALSE(rep.ok());
    CHECK(rep.violations[0].find("unknown point 'phantom'") != std::string::npos);
  }
}

TEST_CASE("random tasks: profiles validate and stay conservative at any delta") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    INFO("seed " << seed);
    TaskSystem sys = make_system(seed);
    for (Cycles delta : {Cycles{0}, Cycles{9}, Cycles{64}}) {
      INFO("delta " << delta);
      sys.config.delta = delta;
      const Built b = build_all(sys);
      REQUIRE_NOTHROW(validate_sequence(b.seq));
      const Report rep = verify_segments(b.tg, b.ts, b.seq, sys.config);
      INFO((rep.ok() ? "" : rep.violations[0]));
      REQUIRE(rep.ok());
    }
  }
}
