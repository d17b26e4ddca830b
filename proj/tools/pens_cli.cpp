#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pens/config.hpp"
#include "pens/diagnostics.hpp"
#include "pens/presets.hpp"

namespace {

using pens::ExitCode;
using pens::Json;

int code(ExitCode c) { return static_cast<int>(c); }

void print_criteria(const Json& criteria) {
  for (const auto& c : criteria) {
    std::printf("%s  %-24s %s\n", c["passed"].get<bool>() ? "PASS" : "FAIL", c["id"].get<std::string>().c_str(),
                c["measured"].dump().c_str());
    const auto detail = c.value("detail", std::string());
    if (!detail.empty()) std::printf("      %s\n", detail.c_str());
  }
}

std::pair<double, double> parse_window_arg(const std::string& s) {
  return pens::detail::parse_window("--window", s);
}

// --hook no-nonlinear / no-drag switch off parts of the right-hand side.
void apply_hooks(pens::RunConfig& cfg, const std::vector<std::string>& hooks) {
  for (const auto& h : hooks) {
    if (h == "no-nonlinear") cfg.hooks.nonlinear = false;
    else if (h == "no-drag") cfg.hooks.drag = false;
    else throw pens::ConfigError("--hook: expected no-nonlinear or no-drag, got '" + h + "'");
  }
  pens::validate(cfg);
}

int cmd_run(const std::string& config, const std::string& out_dir, const std::vector<std::string>& hooks,
            bool quiet) {
  pens::RunConfig cfg = pens::parse_config(config);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  apply_hooks(cfg, hooks);
  pens::PresetOptions opt;
  if (!quiet) opt.log = [](const std::string& m) { std::fprintf(stderr, "%s\n", m.c_str()); };
  const pens::Report rep = pens::run_preset(cfg, opt);
  const Json j = rep.to_json();
  std::printf("preset %s: %s (config %s)\n", rep.preset.c_str(), rep.status.c_str(), rep.config_hash.c_str());
  if (!rep.scope_note.empty()) std::printf("note: %s\n", rep.scope_note.c_str());
  if (!rep.cause.empty()) std::printf("cause: %s\n", rep.cause.c_str());
  print_criteria(j["criteria"]);
  return code(rep.exit_code());
}

int cmd_fit(const std::string& csv, const std::string& column, const std::string& window) {
  const auto cols = pens::read_csv(csv);
  const auto t = cols.find("t");
  const auto v = cols.find(column);
  if (t == cols.end()) throw pens::InvalidArgument(csv + ": no 't' column");
  if (v == cols.end()) throw pens::InvalidArgument(csv + ": no column '" + column + "'");
  const auto [a, b] = parse_window_arg(window);
  const auto f = pens::fit_decay(t->second, v->second, a, b);
  Json j{{"column", column}, {"exponent", f.exponent}, {"log_amplitude", f.log_amplitude},
         {"r_squared", f.r_squared}, {"samples", f.samples}, {"window", {a, b}}};
  std::printf("%s\n", j.dump(2).c_str());
  return 0;
}

int cmd_compare_heat(const std::string& csv) {
  const auto cols = pens::read_csv(csv);
  for (const char* need : {"t", "l2_v", "l2_w", "l2_q"})
    if (!cols.count(need)) throw pens::InvalidArgument(csv + ": no '" + need + "' column");
  const auto& t = cols.at("t");
  const auto& v = cols.at("l2_v");
  const auto& w = cols.at("l2_w");
  const auto& q = cols.at("l2_q");
  double max_rel = 0.0, max_q = 0.0, t_rel = 0.0, t_q = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(w[i] > 0.0)) continue;
    const double rel = std::abs(v[i] - w[i]) / w[i];
    if (rel > max_rel) max_rel = rel, t_rel = t[i];
    if (q[i] / w[i] > max_q) max_q = q[i] / w[i], t_q = t[i];
  }
  Json j{{"samples", t.size()},
         {"max_relative_norm_difference", max_rel},
         {"at_t", t_rel},
         {"max_q_over_w", max_q},
         {"q_at_t", t_q}};
  std::printf("%s\n", j.dump(2).c_str());
  return 0;
}

int cmd_convergence(const std::string& config, const std::vector<std::string>& hooks) {
  pens::RunConfig cfg = pens::parse_config(config);
  apply_hooks(cfg, hooks);
  const auto r = pens::convergence_study(cfg);
  Json j{{"dt", r.dts}, {"differences", r.differences}, {"order", r.order}};
  std::printf("%s\n", j.dump(2).c_str());
  const bool ok = r.order >= 1.8 && r.order <= 2.2;
  std::printf("%s  convergence-order %.4f (expected [1.8, 2.2])\n", ok ? "PASS" : "FAIL", r.order);
  return code(ok ? ExitCode::Pass : ExitCode::CriterionFailure);
}

int cmd_sweep(const std::string& config, const std::string& param, const std::string& out_dir, bool quiet) {
  pens::RunConfig cfg = pens::parse_config(config);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const auto eq = param.find('=');
  if (eq == std::string::npos) throw pens::ConfigError("--param: expected key=v1,v2,...");
  const std::string key = pens::detail::trim(param.substr(0, eq));
  std::vector<std::string> values;
  std::stringstream ss(param.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ','))
    if (!pens::detail::trim(item).empty()) values.push_back(pens::detail::trim(item));
  for (const auto& v : values) (void)pens::with_override(cfg, key, v);  // fail fast on bad cells

  pens::PresetOptions opt;
  if (!quiet) opt.log = [](const std::string& m) { std::fprintf(stderr, "%s\n", m.c_str()); };
  const auto rep = pens::sweep(cfg, key, values, opt);
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream(cfg.output_dir + "/sweep.json") << rep.to_json().dump(2) << '\n';
  std::printf("%-16s %-8s %s\n", key.c_str(), "status", "exponent(l2_v)");
  for (const auto& c : rep.cells)
    std::printf("%-16s %-8s %.6f%s%s\n", c.value.c_str(), c.status.c_str(), c.exponent_v,
                c.cause.empty() ? "" : "  ", c.cause.c_str());
  print_criteria(rep.to_json()["criteria"]);
  return code(rep.exit_code());
}

int cmd_report(const std::string& dir) {
  const std::string path = std::filesystem::exists(dir + "/report.json") ? dir + "/report.json" : dir + "/sweep.json";
  std::ifstream is(path);
  if (!is) throw pens::InvalidArgument("no report.json or sweep.json in " + dir);
  const Json j = Json::parse(is);
  if (j.contains("cells")) {
    std::printf("sweep over %s\n", j["key"].get<std::string>().c_str());
    for (const auto& c : j["cells"])
      std::printf("  %-12s %-8s exponent %s\n", c["value"].get<std::string>().c_str(),
                  c["status"].get<std::string>().c_str(), c["exponent_l2_v"].dump().c_str());
    print_criteria(j["criteria"]);
    return j["exit_code"].get<int>();
  }
  const auto& prov = j["provenance"];
  std::printf("preset %s: %s\n", j["preset"].get<std::string>().c_str(), j["status"].get<std::string>().c_str());
  std::printf("code version %s, config hash %s\n", prov["code_version"].get<std::string>().c_str(),
              prov["config_hash"].get<std::string>().c_str());
  try {
    const auto cfg = pens::parse_config_text(prov["config"].get<std::string>(), "embedded config");
    const bool same = pens::config_hash(cfg) == prov["config_hash"].get<std::string>();
    std::printf("embedded config: %s\n", same ? "hash verified" : "hash MISMATCH");
  } catch (const pens::ConfigError& e) {
    std::printf("embedded config: invalid (%s)\n", e.what());
  }
  if (j.contains("scope_note")) std::printf("note: %s\n", j["scope_note"].get<std::string>().c_str());
  if (!j["cause"].get<std::string>().empty()) std::printf("cause: %s\n", j["cause"].get<std::string>().c_str());
  print_criteria(j["criteria"]);
  for (const auto& [name, f] : j["fits"].items())
    if (f.contains("exponent"))
      std::printf("fit %-12s exponent %.6f  R^2 %.6f\n", name.c_str(), f["exponent"].get<double>(),
                  f["r_squared"].get<double>());
  return j["exit_code"].get<int>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pens: pseudo-spectral pressureless Euler / Navier-Stokes drag simulator and decay checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pens::kVersion);

  std::string config, out_dir, csv, column, window, param, dir;
  std::vector<std::string> hooks;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "run a preset and evaluate its criteria");
  run->add_option("--config", config, "config file")->required();
  run->add_option("--out-dir", out_dir, "output directory (overrides run.output_dir)");
  run->add_option("--hook", hooks, "test hook: no-nonlinear, no-drag (repeatable)");
  run->add_flag("--quiet", quiet, "no progress on stderr");

  auto* fit = app.add_subcommand("fit", "fit a power-law decay exponent to a CSV column");
  fit->add_option("--csv", csv, "diagnostics CSV")->required();
  fit->add_option("--column", column, "column name")->required();
  fit->add_option("--window", window, "fit window a:b")->required();

  auto* heat = app.add_subcommand("compare-heat", "compare ||v|| against the heat reference in a CSV");
  heat->add_option("--csv", csv, "diagnostics CSV")->required();

  auto* conv = app.add_subcommand("convergence", "self-convergence order at dt, dt/2, dt/4");
  conv->add_option("--config", config, "config file")->required();
  conv->add_option("--hook", hooks, "test hook: no-nonlinear, no-drag (repeatable)");

  auto* sw = app.add_subcommand("sweep", "run a config over a parameter grid");
  sw->add_option("--config", config, "template config file")->required();
  sw->add_option("--param", param, "section.key=v1,v2,...")->required();
  sw->add_option("--out-dir", out_dir, "output directory (overrides run.output_dir)");
  sw->add_flag("--quiet", quiet, "no progress on stderr");

  auto* rep = app.add_subcommand("report", "print a stored report");
  rep->add_option("--dir", dir, "run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ExitCode::ConfigError);
  }

  try {
    if (*run) return cmd_run(config, out_dir, hooks, quiet);
    if (*fit) return cmd_fit(csv, column, window);
    if (*heat) return cmd_compare_heat(csv);
    if (*conv) return cmd_convergence(config, hooks);
    if (*sw) return cmd_sweep(config, param, out_dir, quiet);
    if (*rep) return cmd_report(dir);
  } catch (const pens::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return code(ExitCode::ConfigError);
  } catch (const pens::SimulationError& e) {
    std::fprintf(stderr, "simulation aborted: %s\n", e.what());
    return code(ExitCode::SimulationAbort);
  } catch (const pens::InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return code(ExitCode::ConfigError);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return code(ExitCode::ConfigError);
  }
  return 0;
}
