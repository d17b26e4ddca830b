#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pens/diagnostics.hpp"
#include "pens/dynamics.hpp"
#include "pens/snapshot.hpp"

namespace pens {

struct RunOptions {
  double t_end = 1.0;
  double sample_interval = 0.1;
  int sobolev_order = 3;
  // Called after every emitted record.
  std::function<void(const State&, const DiagnosticsRecord&)> on_sample;
  // When set, rho/u/v snapshots are written at every sample whose index is a
  // multiple of snapshot_every.
  std::string snapshot_dir;
  int snapshot_every = 0;
};

namespace detail {

inline long steps_for(double span, double dt, const char* what) {
  const double r = span / dt;
  const long k = std::lround(r);
  if (k <= 0 || std::abs(r - static_cast<double>(k)) > 1e-8 * std::max(1.0, r))
    throw InvalidArgument(std::string(what) + " must be a positive multiple of dt");
  return k;
}

inline void write_state_snapshots(const std::string& dir, std::size_t index, const State& s) {
  std::filesystem::create_directories(dir);
  char tag[32];
  std::snprintf(tag, sizeof tag, "%06zu", index);
  write_snapshot(dir + "/rho_" + tag + ".pens", inverse_transform(s.rho));
  write_snapshot(dir + "/u_" + tag + ".pens", inverse_transform(s.u));
  write_snapshot(dir + "/v_" + tag + ".pens", inverse_transform(s.v));
}

}  // namespace detail

/// Advances `initial` to t_end, emitting a record every sample_interval
/// (including the initial time). Errors from the integrator propagate as
/// SimulationError carrying the failure time.
inline TimeSeries run(const State& initial, const SchemeConfig& cfg, const RunOptions& opt) {
  if (!(opt.t_end > initial.t)) throw InvalidArgument("run: t_end must exceed the initial time");
  if (!(opt.sample_interval > 0.0)) throw InvalidArgument("run: sample_interval must be positive");
  const long total = detail::steps_for(opt.t_end - initial.t, cfg.dt, "run: t_end - t0");
  const long per_sample = detail::steps_for(opt.sample_interval, cfg.dt, "run: sample_interval");

  TimeSeries ts;
  ts.dim = initial.grid().dim();
  ts.sobolev_order = opt.sobolev_order;
  DiagnosticsContext ctx{opt.sobolev_order, HeatReference{initial.v}};

  auto emit = [&](const State& s) {
    const DiagnosticsRecord* prev = ts.records.empty() ? nullptr : &ts.records.back();
    ts.records.push_back(compute_record(s, ctx, prev));
    if (!opt.snapshot_dir.empty() && opt.snapshot_every > 0 &&
        (ts.records.size() - 1) % static_cast<std::size_t>(opt.snapshot_every) == 0)
      detail::write_state_snapshots(opt.snapshot_dir, ts.records.size() - 1, s);
    if (opt.on_sample) opt.on_sample(s, ts.records.back());
  };

  Integrator integrator(initial.grid(), cfg);
  State s = initial;
  emit(s);
  for (long k = 1; k <= total; ++k) {
    integrator.step_in_place(s);
    // Re-anchor the clock to avoid accumulating dt roundoff.
    s.t = initial.t + static_cast<double>(k) * cfg.dt;
    if (k % per_sample == 0 || k == total) emit(s);
  }
  return ts;
}

/// Plain trajectory without diagnostics; returns the final state.
inline State advance(const State& initial, const SchemeConfig& cfg, double t_end) {
  const long total = detail::steps_for(t_end - initial.t, cfg.dt, "advance: t_end - t0");
  Integrator integrator(initial.grid(), cfg);
  State s = initial;
  for (long k = 1; k <= total; ++k) {
    integrator.step_in_place(s);
    s.t = initial.t + static_cast<double>(k) * cfg.dt;
  }
  return s;
}

}  // namespace pens
