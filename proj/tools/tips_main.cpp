// Command-line front end for the analysis pipeline. Every subcommand accepts
// either a raw system document or any stage artifact (stages re-derive from
// the embedded system), writes to stdout or --out, and maps failures to
// distinct exit codes so scripts can tell them apart.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tips/pipeline.hpp"
#include "tips/render.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw tips::ParseError("cannot open input file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file '" + out_path + "'");
  f << text;
}

bool log_enabled() {
  const char* v = std::getenv("TIPS_LOG");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

void logln(const std::string& msg) {
  if (log_enabled()) std::cerr << "[tips] " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"timed memory-access profiles and contention-aware scheduling"};
  app.require_subcommand(1);

  std::string input, out, mode = "inflate", render;
  unsigned jobs = 1;
  std::optional<std::uint64_t> delta, max_traces, budget, window;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("input", input, "system or artifact JSON file")->required();
    sub->add_option("--out", out, "write the result to this file instead of stdout");
    sub->add_option("--jobs", jobs, "worker threads for per-task stages")
        ->check(CLI::Range(1u, 256u));
    sub->add_option("--delta", delta, "override the fusion granularity");
    sub->add_option("--max-traces", max_traces, "override the enumeration guard");
    return sub;
  };

  auto* c_graph = add_common(app.add_subcommand("tipsgraph", "abstract each task CFG"));
  auto* c_traces = add_common(app.add_subcommand("traces", "enumerate worst-case timed traces"));
  auto* c_segments = add_common(app.add_subcommand("segments", "build fused access profiles"));
  auto* c_schedule = add_common(app.add_subcommand("schedule", "schedule tasks across cores"));
  c_schedule->add_option("--mode", mode, "inflate: fixed point; budget: single-pass check")
      ->check(CLI::IsMember({"inflate", "budget"}));
  c_schedule->add_option("--budget", budget, "per-task interference budget (budget mode)");
  c_schedule->add_option("--render", render, "emit a gantt rendering instead of the artifact")
      ->check(CLI::IsMember({"text", "svg"}));
  auto* c_report = add_common(app.add_subcommand("report", "one-shot pipeline summary"));
  c_report->add_option("--window", window, "also bound accesses within any window this wide");
  auto* c_verify = add_common(app.add_subcommand("verify", "audit an input or artifact"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const std::string text = slurp(input);
    tips::PipelineInput in = tips::load_input(text);
    if (delta) in.system.config.delta = *delta;
    if (max_traces) in.system.config.max_traces = *max_traces;
    tips::validate_config(in.system.config);
    logln("input: " + std::to_string(in.system.tasks.size()) + " task(s), " + in.digest +
          (in.artifact_kind.empty() ? "" : ", via " + in.artifact_kind + " artifact"));

    if (c_graph->parsed()) {
      emit(out, tips::artifact_tipsgraph(in, jobs));
    } else if (c_traces->parsed()) {
      emit(out, tips::artifact_traces(in, jobs));
    } else if (c_segments->parsed()) {
      emit(out, tips::artifact_segments(in, jobs));
    } else if (c_schedule->parsed()) {
      if (mode == "budget") {
        if (!budget) throw tips::ValidationError("--mode budget requires --budget");
        bool ok = false;
        const std::string summary = tips::budget_summary(in, jobs, *budget, ok);
        emit(out, summary);
        if (!ok) {
          logln("budget overrun");
          return tips::exit_code::budget_overrun;
        }
      } else if (!render.empty()) {
        if (out.empty()) throw tips::ValidationError("--render requires --out");
        const tips::Schedule sch = tips::compute_schedule(in, jobs);
        emit(out, render == "svg" ? tips::render_svg(sch) : tips::render_text(sch));
      } else {
        emit(out, tips::artifact_schedule(in, jobs));
      }
    } else if (c_report->parsed()) {
      emit(out, tips::report_summary(in, jobs, window));
    } else if (c_verify->parsed()) {
      const tips::Report rep = in.artifact_kind.empty()
                                   ? tips::verify_system(in.system, jobs)
                                   : tips::verify_artifact(in, jobs);
      std::string summary;
      for (const auto& v : rep.violations) summary += "violation: " + v + "\n";
      summary += rep.ok() ? "verify OK\n"
                          : "verify FAILED (" + std::to_string(rep.violations.size()) +
                                " violation(s))\n";
      emit(out, summary);
      if (!rep.ok()) return tips::exit_code::verification;
    }
    return tips::exit_code::ok;
  } catch (const tips::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tips::exit_code::parse;
  } catch (const tips::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tips::exit_code::validation;
  } catch (const tips::ExplosionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tips::exit_code::explosion;
  } catch (const tips::ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tips::exit_code::non_convergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return tips::exit_code::failure;
  }
}
