#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pens/dynamics.hpp"
#include "pens/error.hpp"
#include "pens/grid.hpp"
#include "pens/initial_data.hpp"

namespace pens {

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"energy-identity", "heat-oracle", "thm1-decay", "thm2-sandwich",
                                              "char-check",      "weighted",    "convergence"};
  return names;
}

// Presets whose criteria fit decay laws; their t_end is capped by the
// observation window.
inline bool is_decay_preset(const std::string& p) {
  return p == "thm1-decay" || p == "thm2-sandwich" || p == "weighted" || p == "heat-oracle";
}

struct RunConfig {
  std::string preset = "energy-identity";
  std::string output_dir = "out";
  std::uint64_t seed = 20240501;
  int snapshot_every = 0;  // in samples; 0 disables snapshots

  int dim = 3;
  int modes = 32;
  double length = 2.0 * kPi;

  double dt = 1e-3;
  std::optional<double> t_end;            // empty: automatic
  std::optional<double> sample_interval;  // empty: automatic
  bool dealias = true;
  Hooks hooks;

  DataSpec data;

  std::optional<std::pair<double, double>> fit_window;  // empty: automatic

  Grid grid() const { return make_grid(dim, modes, length); }
  SchemeConfig scheme() const { return SchemeConfig{dt, dealias, hooks}; }
  DataSpec data_spec() const {
    DataSpec d = data;
    d.seed = seed;
    return d;
  }
};

/// T_win = 0.3 (L / 2 pi)^2: the range before exponential mode decay dominates.
inline double observation_window(double length) { return 0.3 * std::pow(length / (2.0 * kPi), 2); }

/// Resolved sample interval: about 100 samples over the run, a multiple of dt.
inline double resolved_sample_interval(const RunConfig& c) {
  if (c.sample_interval) return *c.sample_interval;
  const double span = c.t_end ? *c.t_end : observation_window(c.length);
  const double per = std::max(1.0, std::floor(span / (100.0 * c.dt)));
  return per * c.dt;
}

/// Resolved end time: the largest multiple of the sample interval within T_win.
inline double resolved_t_end(const RunConfig& c) {
  if (c.t_end) return *c.t_end;
  const double si = resolved_sample_interval(c);
  return std::floor(observation_window(c.length) / si + 1e-9) * si;
}

inline std::pair<double, double> resolved_fit_window(const RunConfig& c) {
  if (c.fit_window) return *c.fit_window;
  const double tw = observation_window(c.length);
  return {0.1 * tw, std::min(tw, resolved_t_end(c))};
}

/// Defaults of a preset; keys given in a file override them.
inline RunConfig preset_defaults(const std::string& preset) {
  RunConfig c;
  c.preset = preset;
  if (preset == "energy-identity") {
    c.modes = 32;
    c.length = 2.0 * kPi;
    c.dt = 1e-3;
    c.t_end = 0.1;
    c.sample_interval = 1e-3;
    c.data.cutoff_radius = 1.5;
    c.data.rho_base = 1.0;
    c.data.rho_amplitude = 0.5;
  } else if (preset == "heat-oracle") {
    c.modes = 64;
    c.length = 128.0;
    c.dt = 0.5;
    c.t_end = 120.0;
    c.sample_interval = 1.0;
    c.hooks = {false, false};
    c.fit_window = std::pair{12.0, 120.0};
  } else if (preset == "thm1-decay" || preset == "thm2-sandwich" || preset == "weighted") {
    c.modes = 64;
    c.length = 128.0;
    c.dt = 0.02;
    c.t_end = 120.0;
    c.sample_interval = 1.0;
    c.fit_window = std::pair{12.0, 120.0};
  } else if (preset == "char-check") {
    c.modes = 32;
    c.length = 32.0;
    c.dt = 0.02;
    c.t_end = 5.0;
    c.sample_interval = 0.1;
  } else if (preset == "convergence") {
    c.modes = 32;
    c.length = 2.0 * kPi;
    c.dt = 0.01;
    c.t_end = 0.5;
    c.sample_interval = 0.1;
    c.data.delta0 = 0.2;
    c.data.cutoff_radius = 1.5;
    c.data.rho_base = 1.0;
    c.data.rho_amplitude = 0.5;
  } else {
    throw ConfigError("run.preset: unknown preset '" + preset + "'");
  }
  return c;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Accepts plain numbers and multiples of pi ("pi", "2pi", "0.5pi").
inline double parse_real(const std::string& key, const std::string& raw) {
  std::string s = trim(raw);
  double factor = 1.0;
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
    factor = kPi;
    s = trim(s.substr(0, s.size() - 2));
    if (s.empty()) return kPi;
    if (s.back() == '*') s = trim(s.substr(0, s.size() - 1));
  }
  try {
    std::size_t pos = 0;
    const double x = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    if (!std::isfinite(x)) throw std::invalid_argument("not finite");
    return x * factor;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + raw + "'");
  }
}

inline long long parse_integer(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + raw + "'");
  }
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  try {
    std::size_t pos = 0;
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
    const unsigned long long x = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + raw + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "off" || s == "no" || s == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + raw + "'");
}

inline std::pair<double, double> parse_window(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigError(key + ": expected a:b or auto, got '" + raw + "'");
  return {parse_real(key, s.substr(0, colon)), parse_real(key, s.substr(colon + 1))};
}

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "run.preset",          "run.output_dir",     "run.seed",          "run.snapshot_every",
      "grid.dim",            "grid.modes",         "grid.length",       "scheme.dt",
      "scheme.t_end",        "scheme.sample_interval", "scheme.dealias", "scheme.nonlinear",
      "scheme.drag",         "data.delta0",        "data.rho_base",     "data.rho_amplitude",
      "data.cutoff_radius",  "data.sobolev_order", "data.u_fraction",   "fit.window"};
  return keys;
}

}  // namespace detail

/// Checks every invariant of a resolved config; errors name the key.
inline void validate(const RunConfig& c) {
  const auto& names = preset_names();
  if (std::find(names.begin(), names.end(), c.preset) == names.end())
    throw ConfigError("run.preset: unknown preset '" + c.preset + "'");
  if (c.output_dir.empty()) throw ConfigError("run.output_dir: must not be empty");
  if (c.snapshot_every < 0) throw ConfigError("run.snapshot_every: must be >= 0");
  Grid g;
  try {
    g = c.grid();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  if (!(c.dt > 0.0)) throw ConfigError("scheme.dt: must be positive");
  auto multiple_of_dt = [&](double x, const char* key) {
    const double r = x / c.dt;
    if (!(x > 0.0) || std::abs(r - std::round(r)) > 1e-8 * std::max(1.0, r))
      throw ConfigError(std::string(key) + ": must be a positive multiple of scheme.dt");
  };
  const double si = resolved_sample_interval(c);
  const double t_end = resolved_t_end(c);
  multiple_of_dt(si, "scheme.sample_interval");
  multiple_of_dt(t_end, "scheme.t_end");
  if (si > t_end) throw ConfigError("scheme.sample_interval: exceeds scheme.t_end");
  const double tw = observation_window(c.length);
  if (is_decay_preset(c.preset) && t_end > tw * (1.0 + 1e-12)) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "scheme.t_end: %g exceeds the observation window 0.3 (L / 2 pi)^2 = %g of preset %s", t_end, tw,
                  c.preset.c_str());
    throw ConfigError(buf);
  }
  try {
    validate(c.data_spec(), g);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (c.fit_window) {
    const auto [a, b] = *c.fit_window;
    if (!(a >= 0.0 && a < b)) throw ConfigError("fit.window: need 0 <= a < b");
    if (b > t_end * (1.0 + 1e-12)) throw ConfigError("fit.window: upper end exceeds scheme.t_end");
  }
}

/// Parses INI text: sections [run], [grid], [scheme], [data], [fit].
/// Missing keys take the preset's defaults; unknown keys are errors.
inline RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(origin + ": key '" + section + "' outside any section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (!detail::known_keys().count(full)) throw ConfigError(origin + ": unknown key '" + full + "'");
      entries.emplace_back(full, value.data());
    }
  }
  std::string preset;
  for (const auto& [k, v] : entries)
    if (k == "run.preset") preset = detail::trim(v);
  if (preset.empty()) throw ConfigError(origin + ": missing required key 'run.preset'");
  RunConfig c = preset_defaults(preset);

  for (const auto& [k, raw] : entries) {
    const std::string v = detail::trim(raw);
    const bool is_auto = v == "auto";
    if (k == "run.preset") continue;
    else if (k == "run.output_dir") c.output_dir = v;
    else if (k == "run.seed") c.seed = detail::parse_unsigned(k, v);
    else if (k == "run.snapshot_every") c.snapshot_every = static_cast<int>(detail::parse_integer(k, v));
    else if (k == "grid.dim") c.dim = static_cast<int>(detail::parse_integer(k, v));
    else if (k == "grid.modes") c.modes = static_cast<int>(detail::parse_integer(k, v));
    else if (k == "grid.length") c.length = detail::parse_real(k, v);
    else if (k == "scheme.dt") c.dt = detail::parse_real(k, v);
    else if (k == "scheme.t_end") c.t_end = is_auto ? std::nullopt : std::optional(detail::parse_real(k, v));
    else if (k == "scheme.sample_interval")
      c.sample_interval = is_auto ? std::nullopt : std::optional(detail::parse_real(k, v));
    else if (k == "scheme.dealias") c.dealias = detail::parse_bool(k, v);
    else if (k == "scheme.nonlinear") c.hooks.nonlinear = detail::parse_bool(k, v);
    else if (k == "scheme.drag") c.hooks.drag = detail::parse_bool(k, v);
    else if (k == "data.delta0") c.data.delta0 = detail::parse_real(k, v);
    else if (k == "data.rho_base") c.data.rho_base = detail::parse_real(k, v);
    else if (k == "data.rho_amplitude") c.data.rho_amplitude = detail::parse_real(k, v);
    else if (k == "data.cutoff_radius") c.data.cutoff_radius = detail::parse_real(k, v);
    else if (k == "data.sobolev_order") c.data.sobolev_order = static_cast<int>(detail::parse_integer(k, v));
    else if (k == "data.u_fraction") c.data.u_fraction = detail::parse_real(k, v);
    else if (k == "fit.window") c.fit_window = is_auto ? std::nullopt : std::optional(detail::parse_window(k, v));
  }
  validate(c);
  return c;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), path);
}

/// Fully resolved config as INI text with a fixed key order; parsing it back
/// gives the same config.
inline std::string canonical_text(const RunConfig& c) {
  auto num = [](double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
  };
  auto opt = [&](const std::optional<double>& x) { return x ? num(*x) : std::string("auto"); };
  auto boolean = [](bool b) { return std::string(b ? "true" : "false"); };
  std::ostringstream os;
  os << "[run]\n"
     << "preset = " << c.preset << "\n"
     << "output_dir = " << c.output_dir << "\n"
     << "seed = " << c.seed << "\n"
     << "snapshot_every = " << c.snapshot_every << "\n\n"
     << "[grid]\n"
     << "dim = " << c.dim << "\n"
     << "modes = " << c.modes << "\n"
     << "length = " << num(c.length) << "\n\n"
     << "[scheme]\n"
     << "dt = " << num(c.dt) << "\n"
     << "t_end = " << opt(c.t_end) << "\n"
     << "sample_interval = " << opt(c.sample_interval) << "\n"
     << "dealias = " << boolean(c.dealias) << "\n"
     << "nonlinear = " << boolean(c.hooks.nonlinear) << "\n"
     << "drag = " << boolean(c.hooks.drag) << "\n\n"
     << "[data]\n"
     << "delta0 = " << num(c.data.delta0) << "\n"
     << "rho_base = " << num(c.data.rho_base) << "\n"
     << "rho_amplitude = " << num(c.data.rho_amplitude) << "\n"
     << "cutoff_radius = " << num(c.data.cutoff_radius) << "\n"
     << "sobolev_order = " << c.data.sobolev_order << "\n"
     << "u_fraction = " << num(c.data.u_fraction) << "\n\n"
     << "[fit]\n"
     << "window = " << (c.fit_window ? num(c.fit_window->first) + ":" + num(c.fit_window->second) : "auto") << "\n";
  return os.str();
}

/// Copy of `base` with one key ("section.key") replaced, revalidated.
inline RunConfig with_override(const RunConfig& base, const std::string& key, const std::string& value) {
  if (!detail::known_keys().count(key)) throw ConfigError("unknown key '" + key + "'");
  std::string text = canonical_text(base);
  const auto dot = key.find('.');
  const std::string section = "[" + key.substr(0, dot) + "]\n";
  const std::string name = key.substr(dot + 1) + " = ";
  const auto sec = text.find(section);
  const auto line = text.find(name, sec);
  const auto eol = text.find('\n', line);
  text.replace(line, eol - line, name + value);
  return parse_config_text(text, key + "=" + value);
}

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
inline std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_text(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pens
