// Schedule visualisation: a fixed-width textual gantt and a standalone SVG.
// All scaling is integer arithmetic so renders are bit-stable across
// platforms.
#ifndef TIPS_RENDER_HPP
#define TIPS_RENDER_HPP 1

#include <algorithm>
#include <string>

#include "tips/scheduler.hpp"

namespace tips {

// One row per task: '#' where a bus-active segment may run, '=' for silent
// parts of the task span, '.' for idle time. Each cell covers `unit` cycles.
inline std::string render_text(const Schedule& sch, unsigned width = 72) {
  if (width == 0) width = 1;
  const Cycles unit = std::max<Cycles>(1, (sch.makespan + width - 1) / width);
  std::string out = "gantt makespan=" + std::to_string(sch.makespan) +
                    " unit=" + std::to_string(unit) + "\n";
  size_t label = 0;
  for (const auto& t : sch.tasks)
    label = std::max(label, t.task.size() + 8 + std::to_string(t.core).size());
  for (const auto& t : sch.tasks) {
    std::string head = t.task + " (core " + std::to_string(t.core) + ")";
    head.resize(label, ' ');
    std::string row(width, '.');
    for (unsigned i = 0; i < width; ++i) {
      const Cycles lo = i * unit;
      const Cycles hi = lo + unit;
      if (!(t.start() < hi && lo < t.end())) continue;
      row[i] = '=';
      for (const auto& s : t.segments)
        if (s.access_bound > 0 && s.start < hi && lo < s.end()) {
          row[i] = '#';
          break;
        }
    }
    out += head + " |" + row + "|\n";
  }
  return out;
}

inline std::string render_svg(const Schedule& sch) {
  constexpr Cycles kW = 800;  // drawing area width in px
  constexpr Cycles kRow = 28, kBar = 18, kLeft = 140, kTop = 30;
  const Cycles span = std::max<Cycles>(1, sch.makespan);
  const Cycles height = kTop + kRow * sch.tasks.size() + 10;
  auto x_of = [&](Cycles c) { return kLeft + c * kW / span; };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                  std::to_string(kLeft + kW + 20) + "\" height=\"" + std::to_string(height) +
                  "\">\n";
  s += "<text x=\"4\" y=\"18\" font-family=\"monospace\" font-size=\"13\">makespan " +
       std::to_string(sch.makespan) + "</text>\n";
  Cycles y = kTop;
  for (const auto& t : sch.tasks) {
    s += "<text x=\"4\" y=\"" + std::to_string(y + kBar - 4) +
         "\" font-family=\"monospace\" font-size=\"12\">" + t.task + " (core " +
         std::to_string(t.core) + ")</text>\n";
    for (const auto& seg : t.segments) {
      const Cycles x0 = x_of(seg.start);
      const Cycles x1 = std::max(x_of(seg.end()), x0 + 1);
      s += "<rect x=\"" + std::to_string(x0) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
           std::to_string(x1 - x0) + "\" height=\"" + std::to_string(kBar) + "\" fill=\"" +
           (seg.access_bound > 0 ? "#3182bd" : "#9ecae1") + "\"/>\n";
    }
    y += kRow;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace tips

#endif
