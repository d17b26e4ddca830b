// Runs the ten acceptance criteria and prints one line per criterion.
// Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pens/presets.hpp"

namespace {

using namespace pens;

const std::string kConfigs = std::string(PENS_SOURCE_DIR) + "/configs/";
const std::string kOut = "acceptance_out";

RunConfig load(const std::string& name) {
  RunConfig c = parse_config(kConfigs + name + ".ini");
  c.output_dir = kOut + "/" + name;
  return c;
}

struct Line {
  int number;
  std::string title;
  bool passed = false;
  std::string detail;
};

std::vector<Line> lines;

void record(int number, const std::string& title, bool passed, const std::string& detail) {
  lines.push_back({number, title, passed, detail});
  std::printf("criterion %2d: %-44s %s  %s\n", number, title.c_str(), passed ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

// All named criteria of a report pass; detail lists their measurements.
bool gate(const Report& rep, const std::vector<std::string>& ids, std::string& detail) {
  bool ok = rep.status != "abort";
  if (!rep.cause.empty()) detail += "cause: " + rep.cause + "; ";
  for (const auto& id : ids) {
    const CriterionResult* c = rep.find(id);
    if (!c) {
      detail += id + " missing; ";
      ok = false;
      continue;
    }
    ok = ok && c->passed;
    detail += id + (c->passed ? " ok " : " FAILED ") + c->measured.dump() + "; ";
  }
  return ok;
}

void write(const Report& rep, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_report(rep, dir);
}

void progress(const std::string& msg) { std::fprintf(stderr, "[acceptance] %s\n", msg.c_str()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  std::vector<Report> mass_runs;  // runs whose mass-positivity enters criterion 6
  const auto t0 = std::chrono::steady_clock::now();

  try {
    progress("energy-identity");
    const Report ei = run_preset(load("energy-identity"));
    mass_runs.push_back(ei);
    std::string d;
    record(1, "energy identity", gate(ei, {"energy-residual", "energy-residual-ratio"}, d), d);
  } catch (const std::exception& e) {
    record(1, "energy identity", false, e.what());
  }

  try {
    progress("heat-oracle");
    const Report heat = run_preset(load("heat-oracle"));
    mass_runs.push_back(heat);
    std::string d2, d3;
    record(2, "heat oracle exact match", gate(heat, {"heat-exact-match"}, d2), d2);
    record(3, "heat lower bound", gate(heat, {"heat-lower-bound"}, d3), d3);
  } catch (const std::exception& e) {
    record(2, "heat oracle exact match", false, e.what());
    record(3, "heat lower bound", false, e.what());
  }

  // One run serves the three presets that share grid, scheme and data.
  bool thm_ok = false;
  std::string thm_cause;
  Report r1, r2, r7;
  try {
    const RunConfig c1 = load("thm1-decay");
    const RunConfig c2 = load("thm2-sandwich");
    const RunConfig c7 = load("weighted");
    progress("thm1-decay run (shared with thm2-sandwich and weighted)");
    const auto ts = std::chrono::steady_clock::now();
    const Trajectory tr = simulate(c1);
    progress("thm1-decay run took " + std::to_string(seconds_since(ts)) + " s");
    std::filesystem::create_directories(c1.output_dir);
    write_csv(c1.output_dir + "/diagnostics.csv", tr.series);
    r1 = make_report(c1);
    r2 = make_report(c2);
    r7 = make_report(c7);
    evaluate_trajectory(c1, tr, r1);
    evaluate_trajectory(c2, tr, r2);
    evaluate_trajectory(c7, tr, r7);
    for (Report* r : {&r1, &r2, &r7}) r->finalize();
    write(r1, c1.output_dir);
    write(r2, c2.output_dir);
    write(r7, c7.output_dir);
    mass_runs.push_back(r1);
    thm_ok = true;
  } catch (const std::exception& e) {
    thm_cause = e.what();
  }
  if (thm_ok) {
    std::string d4, d5;
    record(4, "decay rates on the large box", gate(r1, {"decay-l2-v", "decay-l2-u", "decay-grad-v"}, d4), d4);
    record(5, "decay sandwich", gate(r2, {"sandwich-lower", "sandwich-upper", "heat-remainder-ratio"}, d5), d5);
  } else {
    record(4, "decay rates on the large box", false, thm_cause);
    record(5, "decay sandwich", false, thm_cause);
  }

  // Run before criterion 6 so that its mass record is included there.
  bool conv_ok = false;
  std::string conv_cause;
  Report cv;
  try {
    progress("convergence");
    cv = run_preset(load("convergence"));
    mass_runs.push_back(cv);
    conv_ok = true;
  } catch (const std::exception& e) {
    conv_cause = e.what();
  }

  try {
    progress("char-check");
    const Report cc = run_preset(load("char-check"));
    mass_runs.push_back(cc);
    std::string d = "runs: " + std::to_string(mass_runs.size()) + "; ";
    bool ok = gate(cc, {"characteristics-density"}, d);
    for (const auto& r : mass_runs) {
      const CriterionResult* m = r.find("mass-positivity");
      ok = ok && m && m->passed;
      d += r.preset + " mass-positivity " + (m && m->passed ? "ok; " : "FAILED; ");
    }
    record(6, "mass conservation and positivity", ok, d);
  } catch (const std::exception& e) {
    record(6, "mass conservation and positivity", false, e.what());
  }

  if (thm_ok) {
    std::string d7, d8;
    record(7, "weighted integral finiteness", gate(r7, {"weighted-integral"}, d7), d7);
    record(8, "functional boundedness", gate(r1, {"functional-plateau"}, d8), d8);
  } else {
    record(7, "weighted integral finiteness", false, thm_cause);
    record(8, "functional boundedness", false, thm_cause);
  }

  if (conv_ok) {
    std::string d;
    record(9, "temporal convergence order", gate(cv, {"convergence-order"}, d), d);
  } else {
    record(9, "temporal convergence order", false, conv_cause);
  }

  try {
    progress("box-growth sweep");
    const RunConfig base = load("sweep-box");
    const SweepReport sw = sweep(base, "grid.length", {"64", "128", "256"});
    std::filesystem::create_directories(base.output_dir);
    {
      std::ofstream os(base.output_dir + "/sweep.json");
      os << sw.to_json().dump(2) << '\n';
    }
    bool ok = sw.exit_code() == ExitCode::Pass;
    std::string d;
    for (const auto& c : sw.cells) {
      char buf[120];
      std::snprintf(buf, sizeof buf, "L=%s %s exponent %.4f; ", c.value.c_str(), c.status.c_str(), c.exponent_v);
      d += buf;
      if (!c.cause.empty()) d += "cause: " + c.cause + "; ";
    }
    for (const auto& c : sw.criteria) ok = ok && c.passed;
    if (sw.criteria.empty()) ok = false;
    record(10, "box-growth sweep", ok, d);
  } catch (const std::exception& e) {
    record(10, "box-growth sweep", false, e.what());
  }

  int failed = 0;
  for (const auto& l : lines) failed += !l.passed;
  std::printf("%d of %zu criteria passed (%.0f s)\n", static_cast<int>(lines.size()) - failed, lines.size(),
              seconds_since(t0));
  return failed == 0 ? 0 : 1;
}
