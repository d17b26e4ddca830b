#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pens/dynamics.hpp"
#include "pens/error.hpp"
#include "pens/reference.hpp"
#include "pens/spectral.hpp"

namespace pens {

// ---------------------------------------------------------------------------
// Energy functionals

namespace detail {

inline double density_weighted_sq(const RealField& rho, const RealVectorField& a, const RealVectorField* b) {
  double s = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    double m = 0.0;
    for (int c = 0; c < a.dim(); ++c) {
      const double d = b ? a[c][i] - (*b)[c][i] : a[c][i];
      m += d * d;
    }
    s += rho[i] * m;
  }
  return s * rho.grid.cell_volume();
}

}  // namespace detail

/// E = \int rho |u|^2 + ||v||^2.
inline double energy_E(const State& s) {
  const RealField rho = inverse_transform(s.rho);
  const RealVectorField u = inverse_transform(s.u);
  return detail::density_weighted_sq(rho, u, nullptr) + gradient_seminorm_sq(s.v, 0);
}

/// D = \int rho |u - v|^2 + ||grad v||^2.
inline double dissipation_D(const State& s) {
  const RealField rho = inverse_transform(s.rho);
  const RealVectorField u = inverse_transform(s.u);
  const RealVectorField v = inverse_transform(s.v);
  return detail::density_weighted_sq(rho, u, &v) + gradient_seminorm_sq(s.v, 1);
}

/// Sum of |v_hat|^2 over lattice modes with |k| <= radius.
inline double ball_energy(const VectorField& v, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("ball_energy: radius must be positive");
  const Grid& g = v.grid();
  const double r2 = radius * radius;
  double sum = 0.0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    if (g.k2(i) > r2) continue;
    double m = 0.0;
    for (const auto& c : v.comp) m += std::norm(c[i]);
    sum += g.multiplicity(i) * m;
  }
  return sum * g.frequency_cell();
}

// Low-frequency ball radii of the Fourier splitting argument.
inline double radius_X1(int n, double t) { return std::sqrt(n / (t + n)); }
inline double radius_X3(int n, double t) { return std::sqrt(2.0 * n / (t + 4.0 * n)); }

// ---------------------------------------------------------------------------
// Per-sample record

struct DiagnosticsRecord {
  double t = 0.0;
  double E = 0.0;
  double D = 0.0;
  double l2_u = 0.0;
  double l2_v = 0.0;
  double l2_umv = 0.0;
  double h_s_rho = 0.0;
  double h_sp2_u = 0.0;
  double h_sp1_v = 0.0;
  double grad_u_hs = 0.0;
  double grad_v_hs = 0.0;
  double l1_rho = 0.0;
  double min_rho = 0.0;
  double max_rho = 0.0;
  double ball_X1 = 0.0;
  double ball_X3 = 0.0;
  double l2_w = 0.0;
  double l2_q = 0.0;
  double linf_w = 0.0;
  double M_running = 0.0;
  double N_running = 0.0;
  double linf_div_u = 0.0;
  double div_v = 0.0;
  // ||grad^j u||, ||grad^j v|| for j = 0..s+1.
  std::vector<double> seminorm_u;
  std::vector<double> seminorm_v;
};

// Column order of the diagnostics CSV.
inline const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols{
      "t",         "E",         "D",      "l2_u",    "l2_v",    "l2_umv", "h_s_rho",
      "h_sp2_u",   "h_sp1_v",   "grad_u_hs", "grad_v_hs", "l1_rho", "min_rho", "ball_X1",
      "ball_X3",   "l2_w",      "l2_q",   "linf_w",  "M_running", "N_running"};
  return cols;
}

inline std::array<double, 20> csv_values(const DiagnosticsRecord& r) {
  return {r.t,      r.E,       r.D,       r.l2_u,    r.l2_v,    r.l2_umv,  r.h_s_rho,
          r.h_sp2_u, r.h_sp1_v, r.grad_u_hs, r.grad_v_hs, r.l1_rho, r.min_rho, r.ball_X1,
          r.ball_X3, r.l2_w,    r.l2_q,    r.linf_w,  r.M_running, r.N_running};
}

struct TimeSeries {
  int dim = 3;
  int sobolev_order = 3;
  std::vector<DiagnosticsRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }

  std::vector<double> column(const std::string& name) const {
    const auto& cols = csv_columns();
    const auto it = std::find(cols.begin(), cols.end(), name);
    if (it == cols.end()) throw InvalidArgument("unknown diagnostics column '" + name + "'");
    const auto idx = static_cast<std::size_t>(it - cols.begin());
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(csv_values(r)[idx]);
    return out;
  }
  std::vector<double> times() const { return column("t"); }
  std::vector<double> seminorm_v(int j) const {
    std::vector<double> out;
    for (const auto& r : records) out.push_back(r.seminorm_v.at(static_cast<std::size_t>(j)));
    return out;
  }
  std::vector<double> seminorm_u(int j) const {
    std::vector<double> out;
    for (const auto& r : records) out.push_back(r.seminorm_u.at(static_cast<std::size_t>(j)));
    return out;
  }
};

/// Everything a record needs besides the state itself.
struct DiagnosticsContext {
  int sobolev_order = 3;
  HeatReference heat;
};

/// Computes one record; running suprema continue from `previous` when given.
inline DiagnosticsRecord compute_record(const State& s, const DiagnosticsContext& ctx,
                                        const DiagnosticsRecord* previous = nullptr) {
  const Grid& g = s.grid();
  const int n = g.dim();
  const int so = ctx.sobolev_order;
  DiagnosticsRecord r;
  r.t = s.t;
  const RealField rho = inverse_transform(s.rho);
  const RealVectorField u = inverse_transform(s.u);
  const RealVectorField v = inverse_transform(s.v);

  r.E = detail::density_weighted_sq(rho, u, nullptr) + gradient_seminorm_sq(s.v, 0);
  r.D = detail::density_weighted_sq(rho, u, &v) + gradient_seminorm_sq(s.v, 1);
  r.l2_u = gradient_seminorm(s.u, 0);
  r.l2_v = gradient_seminorm(s.v, 0);
  r.l2_umv = gradient_seminorm(s.u - s.v, 0);
  r.h_s_rho = sobolev_norm(s.rho, so);
  r.h_sp2_u = sobolev_norm(s.u, so + 2);
  r.h_sp1_v = sobolev_norm(s.v, so + 1);
  r.grad_u_hs = gradient_sobolev_norm(s.u, so);
  r.grad_v_hs = gradient_sobolev_norm(s.v, so);
  r.l1_rho = lp_norm(rho, LpNorm::L1);
  const auto [mn, mx] = std::minmax_element(rho.data.begin(), rho.data.end());
  r.min_rho = *mn;
  r.max_rho = *mx;
  r.ball_X1 = ball_energy(s.v, radius_X1(n, s.t));
  r.ball_X3 = ball_energy(s.v, radius_X3(n, s.t));
  const VectorField w = heat_evolve(ctx.heat, s.t);
  r.l2_w = gradient_seminorm(w, 0);
  VectorField q = s.v;
  q -= w;
  r.l2_q = gradient_seminorm(q, 0);
  r.linf_w = lp_norm(inverse_transform(w), LpNorm::Linf);
  r.linf_div_u = lp_norm(inverse_transform(divergence(s.u)), LpNorm::Linf);
  r.div_v = max_mode_divergence(s.v);
  for (int j = 0; j <= so + 1; ++j) {
    r.seminorm_u.push_back(gradient_seminorm(s.u, j));
    r.seminorm_v.push_back(gradient_seminorm(s.v, j));
  }
  const double m_now = std::pow(1.0 + s.t, 0.5 * n) * r.E;
  const double n_now = std::pow(1.0 + s.t, 0.25 * n) * (r.grad_u_hs + r.grad_v_hs);
  r.M_running = previous ? std::max(previous->M_running, m_now) : m_now;
  r.N_running = previous ? std::max(previous->N_running, n_now) : n_now;
  return r;
}

// ---------------------------------------------------------------------------
// Series functionals

/// sup over samples of (1+tau)^{n/2} E(tau).
inline double functional_M(const TimeSeries& ts, int n) {
  if (ts.empty()) throw InvalidArgument("functional_M: empty series");
  double m = 0.0;
  for (const auto& r : ts.records) m = std::max(m, std::pow(1.0 + r.t, 0.5 * n) * r.E);
  return m;
}

/// sup over samples of (1+tau)^{n/4} (||grad u||_{H^s} + ||grad v||_{H^s}).
/// Uses the record's own H^s order; `s` must match it.
inline double functional_N(const TimeSeries& ts, int n, int s) {
  if (ts.empty()) throw InvalidArgument("functional_N: empty series");
  if (s != ts.sobolev_order) throw InvalidArgument("functional_N: Sobolev order differs from the recorded one");
  double m = 0.0;
  for (const auto& r : ts.records) m = std::max(m, std::pow(1.0 + r.t, 0.25 * n) * (r.grad_u_hs + r.grad_v_hs));
  return m;
}

/// Cumulative trapezoidal integral of (1+tau)^beta q(tau); entry i covers [t_0, t_i].
inline std::vector<double> weighted_integral(std::span<const double> t, std::span<const double> q, double beta) {
  if (t.size() != q.size()) throw InvalidArgument("weighted_integral: length mismatch");
  if (t.size() < 2) throw InvalidArgument("weighted_integral: need at least two samples");
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double a = std::pow(1.0 + t[i - 1], beta) * q[i - 1];
    const double b = std::pow(1.0 + t[i], beta) * q[i];
    out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (a + b);
  }
  return out;
}

inline std::vector<double> weighted_integral(const TimeSeries& ts, double beta,
                                             const std::function<double(const DiagnosticsRecord&)>& quantity) {
  std::vector<double> t, q;
  for (const auto& r : ts.records) {
    t.push_back(r.t);
    q.push_back(quantity(r));
  }
  return weighted_integral(t, q, beta);
}

struct DecayFit {
  double exponent = 0.0;       // alpha_hat, value ~ A (1+t)^{-alpha_hat}
  double log_amplitude = 0.0;  // ln A
  double t_begin = 0.0;
  double t_end = 0.0;
  std::size_t samples = 0;
  double r_squared = 0.0;
};

/// Least-squares line of ln(value) against ln(1+t) over samples in [a, b].
inline DecayFit fit_decay(std::span<const double> t, std::span<const double> value, double a, double b) {
  if (t.size() != value.size()) throw InvalidArgument("fit_decay: length mismatch");
  if (!(a < b)) throw InvalidArgument("fit_decay: empty window");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < a || t[i] > b) continue;
    if (!(value[i] > 0.0)) throw InvalidArgument("fit_decay: nonpositive value at t = " + std::to_string(t[i]));
    x.push_back(std::log1p(t[i]));
    y.push_back(std::log(value[i]));
  }
  if (x.size() < 10) throw InvalidArgument("fit_decay: fewer than 10 samples in window");
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  DecayFit f;
  f.exponent = -slope;
  f.log_amplitude = my - slope * mx;
  f.t_begin = a;
  f.t_end = b;
  f.samples = x.size();
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.log_amplitude + slope * x[i]);
    ss_res += e * e;
  }
  // A constant series is fitted exactly; treat it as R^2 = 1.
  f.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return f;
}

/// max over interior samples of |E'/2 + D| (centered differences), divided by max D.
inline double energy_identity_residual(const TimeSeries& ts) {
  if (ts.size() < 3) throw InvalidArgument("energy_identity_residual: need at least three samples");
  const auto& r = ts.records;
  double worst = 0.0, dmax = 0.0;
  for (const auto& x : r) dmax = std::max(dmax, x.D);
  for (std::size_t i = 1; i + 1 < r.size(); ++i) {
    const double dE = (r[i + 1].E - r[i - 1].E) / (r[i + 1].t - r[i - 1].t);
    worst = std::max(worst, std::abs(0.5 * dE + r[i].D));
  }
  if (dmax == 0.0) return worst == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return worst / dmax;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_csv(std::ostream& os, const TimeSeries& ts) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : ts.records) {
    const auto vals = csv_values(r);
    for (std::size_t i = 0; i < vals.size(); ++i) os << (i ? "," : "") << format_double(vals[i]);
    os << '\n';
  }
}

inline void write_csv(const std::string& path, const TimeSeries& ts) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write " + path);
  write_csv(os, ts);
}

/// Columns of a CSV with a header row, keyed by header name.
inline std::map<std::string, std::vector<double>> read_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot read " + path);
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument(path + ": missing header row");
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  std::map<std::string, std::vector<double>> cols;
  for (const auto& nm : names) cols[nm];
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= names.size()) throw InvalidArgument(path + ":" + std::to_string(lineno) + ": too many fields");
      try {
        cols[names[c]].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidArgument(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      ++c;
    }
    if (c != names.size()) throw InvalidArgument(path + ":" + std::to_string(lineno) + ": too few fields");
  }
  return cols;
}

}  // namespace pens
