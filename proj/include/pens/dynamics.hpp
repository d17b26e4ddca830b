#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pens/error.hpp"
#include "pens/field.hpp"
#include "pens/grid.hpp"
#include "pens/spectral.hpp"

// Coupled pressureless Euler / incompressible Navier-Stokes system with drag,
// the Euler momentum written in damped transport form (valid while rho > 0):
//
//   rho_t = -div(rho u)
//   u_t   = -(u . grad) u - (u - v)
//   v_t   = Leray[ -(v . grad) v + rho (u - v) ] + Lap v,   div v = 0

namespace pens {

struct State {
  double t = 0.0;
  ScalarField rho;
  VectorField u;
  VectorField v;

  const Grid& grid() const { return rho.grid; }
};

struct Tendency {
  ScalarField rho;
  VectorField u;
  VectorField v;
};

// Test switches; both on for the physical system.
struct Hooks {
  bool nonlinear = true;  // transport of rho, u . grad u, v . grad v
  bool drag = true;       // -(u - v) in the u equation, rho (u - v) in the v equation
};

struct SchemeConfig {
  double dt = 1e-2;
  bool dealias = true;
  Hooks hooks;
};

namespace detail {

inline void check_state(const State& s, const char* where) {
  const Grid& g = s.grid();
  if (!g.valid() || s.u.dim() != g.dim() || s.v.dim() != g.dim() || s.u.grid() != g || s.v.grid() != g)
    throw InvalidArgument(std::string(where) + ": inconsistent state grids");
  if (!all_finite(s.rho) || !all_finite(s.u) || !all_finite(s.v))
    throw SimulationError(std::string(where) + ": non-finite coefficient", s.t);
  if (max_mode_divergence(s.v) > 1e-12) throw InvalidArgument(std::string(where) + ": v is not divergence-free");
}

inline bool identically_zero(const ScalarField& f) {
  return std::all_of(f.coef.begin(), f.coef.end(), [](const Complex& c) { return c == Complex{}; });
}

}  // namespace detail

/// Evaluates the explicit (non-stiff) part of the system into preallocated
/// buffers. Nonlinear terms use the rotational form
///   -(w . grad) w = w x curl w - grad |w|^2 / 2,
/// the gradient part being dropped for v (it is removed by the projection).
class RhsEvaluator {
 public:
  explicit RhsEvaluator(const Grid& g)
      : grid_(g), rho_(g), u_(g), v_(g), wu_(g), wv_(g), work_(g), spec_(g) {}

  // Fills `out` with everything except the -u damping and Lap v; returns
  // max(|u|_inf, |v|_inf) over components.
  double explicit_terms(const State& s, const SchemeConfig& cfg, Tendency& out) {
    const Grid& g = grid_;
    const int n = g.dim();
    const std::size_t np = g.physical_size();
    const std::size_t ns = g.spectral_size();
    reset(out);
    const Hooks& h = cfg.hooks;

    double speed = 0.0;
    for (int a = 0; a < n; ++a) {
      inverse_transform_into(s.u[a], u_[a]);
      inverse_transform_into(s.v[a], v_[a]);
      speed = std::max({speed, lp_norm(u_[a], LpNorm::Linf), lp_norm(v_[a], LpNorm::Linf)});
    }
    if (!h.nonlinear && !h.drag) return speed;
    inverse_transform_into(s.rho, rho_);

    auto to_spectral = [&](RealField& prod) {
      forward_transform_into(prod, spec_);
      if (cfg.dealias) dealias_in_place(spec_);
    };

    if (h.nonlinear) {
      // rho_t = -div(rho u)
      for (int a = 0; a < n; ++a) {
        for (std::size_t i = 0; i < np; ++i) work_[i] = rho_[i] * u_[a][i];
        to_spectral(work_);
        add_derivative(spec_, a, out.rho, -1.0);
      }
      curl(s.u, wu_);
      curl(s.v, wv_);
      // u: u x curl u - grad |u|^2 / 2
      for (std::size_t i = 0; i < np; ++i) {
        double q = 0.0;
        for (int a = 0; a < n; ++a) q += u_[a][i] * u_[a][i];
        work_[i] = 0.5 * q;
      }
      to_spectral(work_);
      for (int a = 0; a < n; ++a) add_derivative(spec_, a, out.u[a], -1.0);
      for (int c = 0; c < n; ++c) {
        cross_component(u_, wu_, c, work_);
        to_spectral(work_);
        out.u[c] += spec_;
      }
    }
    for (int c = 0; c < n; ++c) {
      // v forcing v x curl v + rho (u - v), combined before transforming
      if (h.nonlinear) cross_component(v_, wv_, c, work_);
      else std::fill(work_.data.begin(), work_.data.end(), 0.0);
      if (h.drag)
        for (std::size_t i = 0; i < np; ++i) work_[i] += rho_[i] * (u_[c][i] - v_[c][i]);
      to_spectral(work_);
      out.v[c] += spec_;
      if (h.drag)
        for (std::size_t i = 0; i < ns; ++i) out.u[c][i] += s.v[c][i];
    }
    leray_project_in_place(out.v);
    return speed;
  }

 private:
  void reset(Tendency& t) const {
    const Grid& g = grid_;
    if (!t.rho.grid.valid() || t.rho.grid != g) t = Tendency{ScalarField(g), VectorField(g), VectorField(g)};
    t.rho.set_zero();
    t.u.set_zero();
    t.v.set_zero();
  }

  void add_derivative(const ScalarField& f, int axis, ScalarField& dest, double sign) const {
    const auto& kd = grid_.derivative_symbol(axis);
    for (std::size_t i = 0; i < f.size(); ++i)
      dest[i] += Complex(-sign * kd[i] * f[i].imag(), sign * kd[i] * f[i].real());
  }

  // Physical-space curl; in 2-D the scalar vorticity lands in out[0].
  void curl(const VectorField& f, RealVectorField& out) const {
    const Grid& g = grid_;
    auto component = [&](int p, int q, RealField& dest) {
      // d_p f_q - d_q f_p
      const auto& kp = g.derivative_symbol(p);
      const auto& kq = g.derivative_symbol(q);
      inverse_transform_of(
          g,
          [&](std::size_t i) {
            const Complex d = kp[i] * f[q][i] - kq[i] * f[p][i];
            return Complex(-d.imag(), d.real());
          },
          dest);
    };
    if (g.dim() == 2) {
      component(0, 1, out[0]);
    } else {
      component(1, 2, out[0]);
      component(2, 0, out[1]);
      component(0, 1, out[2]);
    }
  }

  // Component c of w x curl w (2-D: curl w = omega e_3).
  void cross_component(const RealVectorField& w, const RealVectorField& om, int c, RealField& dest) const {
    const std::size_t np = grid_.physical_size();
    if (grid_.dim() == 2) {
      const double sgn = c == 0 ? 1.0 : -1.0;
      const auto& other = w[1 - c];
      for (std::size_t i = 0; i < np; ++i) dest[i] = sgn * other[i] * om[0][i];
      return;
    }
    const int p = (c + 1) % 3, q = (c + 2) % 3;
    for (std::size_t i = 0; i < np; ++i) dest[i] = w[p][i] * om[q][i] - w[q][i] * om[p][i];
  }

  Grid grid_;
  RealField rho_;
  RealVectorField u_, v_, wu_, wv_;
  RealField work_;
  ScalarField spec_;
};

/// Full right-hand side, including the -u damping and the viscous term.
inline Tendency rhs(const State& s, const SchemeConfig& cfg = {}) {
  detail::check_state(s, "rhs");
  RhsEvaluator ev(s.grid());
  Tendency t;
  ev.explicit_terms(s, cfg, t);
  const Grid& g = s.grid();
  for (int a = 0; a < g.dim(); ++a) {
    if (cfg.hooks.drag) t.u[a] -= s.u[a];
    for (std::size_t i = 0; i < g.spectral_size(); ++i) t.v[a][i] -= g.k2(i) * s.v[a][i];
  }
  if (!all_finite(t.rho) || !all_finite(t.u) || !all_finite(t.v)) throw SimulationError("rhs: non-finite tendency", s.t);
  return t;
}

/// Zero-mean pressure with grad P equal to the gradient part removed by the
/// Leray projection: -Lap P = div div(v (x) v) - div(rho (u - v)).
inline ScalarField recover_pressure(const State& s, bool dealias_products = true) {
  detail::check_state(s, "recover_pressure");
  const Grid& g = s.grid();
  const int n = g.dim();
  const RealField rho = inverse_transform(s.rho);
  const RealVectorField u = inverse_transform(s.u);
  const RealVectorField v = inverse_transform(s.v);
  // Forcing before projection: -div(v (x) v) + rho (u - v).
  VectorField force(g);
  RealField work(g);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (std::size_t i = 0; i < g.physical_size(); ++i) work[i] = v[a][i] * v[b][i];
      ScalarField p = forward_transform(work);
      if (dealias_products) dealias_in_place(p);
      force[a].axpy(-1.0, derivative(p, b));
    }
    for (std::size_t i = 0; i < g.physical_size(); ++i) work[i] = rho[i] * (u[a][i] - v[a][i]);
    ScalarField d = forward_transform(work);
    if (dealias_products) dealias_in_place(d);
    force[a] += d;
  }
  ScalarField P(g);
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    if (g.k2(i) == 0.0 || g.is_nyquist(i)) continue;
    Complex kf{};
    for (int a = 0; a < n; ++a) kf += g.k(i)[a] * force[a][i];
    P[i] = Complex(0.0, -1.0) * kf / g.k2(i);
  }
  return P;
}

/// Advective CFL bound; diffusion and damping are integrated exactly.
inline double stability_bound(const Grid& g, double max_speed) {
  return 0.5 * g.spacing() / std::max(max_speed, 1.0);
}

inline double max_speed(const State& s) {
  double m = 0.0;
  for (int a = 0; a < s.grid().dim(); ++a) {
    m = std::max(m, lp_norm(inverse_transform(s.u[a]), LpNorm::Linf));
    m = std::max(m, lp_norm(inverse_transform(s.v[a]), LpNorm::Linf));
  }
  return m;
}

/// Second-order integrating-factor Runge-Kutta (Heun) step. The diagonal
/// linear parts, e^{-dt} on u and e^{-|k|^2 dt} on v, are applied exactly;
/// everything else is explicit. v is re-projected and its mean held at zero
/// after every stage.
class Integrator {
 public:
  Integrator(const Grid& g, SchemeConfig cfg) : grid_(g), cfg_(cfg), eval_(g) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw InvalidArgument("scheme: dt must be positive");
    heat_.resize(g.spectral_size());
    for (std::size_t i = 0; i < g.spectral_size(); ++i) heat_[i] = std::exp(-g.k2(i) * cfg.dt);
    damp_ = cfg.hooks.drag ? std::exp(-cfg.dt) : 1.0;
  }

  const SchemeConfig& config() const { return cfg_; }

  State step(const State& y0) {
    State y = y0;
    step_in_place(y);
    return y;
  }

  /// Advances y by one step (y.t += dt).
  void step_in_place(State& y) {
    detail::check_state(y, "step");
    const double dt = cfg_.dt;
    const bool vacuum_allowed = detail::identically_zero(y.rho);

    const double speed = eval_.explicit_terms(y, cfg_, n0_);
    const double bound = stability_bound(grid_, speed);
    if (dt > bound * (1.0 + 1e-12))
      throw SimulationError("step: dt = " + std::to_string(dt) + " exceeds stability bound " + std::to_string(bound),
                            y.t);
    zero_mean(n0_.v);

    a_.t = y.t + dt;
    a_.rho = y.rho;
    a_.rho.axpy(dt, n0_.rho);
    a_.u = y.u;
    a_.u.axpy(dt, n0_.u);
    a_.u *= damp_;
    a_.v = y.v;
    a_.v.axpy(dt, n0_.v);
    apply_heat(a_.v);
    finish_stage(a_);

    eval_.explicit_terms(a_, cfg_, n1_);
    zero_mean(n1_.v);

    y.t += dt;
    y.rho.axpy(0.5 * dt, n0_.rho);
    y.rho.axpy(0.5 * dt, n1_.rho);
    y.u.axpy(0.5 * dt, n0_.u);
    y.u *= damp_;
    y.u.axpy(0.5 * dt, n1_.u);
    y.v.axpy(0.5 * dt, n0_.v);
    apply_heat(y.v);
    y.v.axpy(0.5 * dt, n1_.v);
    finish_stage(y);

    if (!all_finite(y.rho) || !all_finite(y.u) || !all_finite(y.v))
      throw SimulationError("step: non-finite state", y.t);
    if (!vacuum_allowed) {
      inverse_transform_into(y.rho, rho_phys_);
      const double mn = *std::min_element(rho_phys_.data.begin(), rho_phys_.data.end());
      if (!(mn > 0.0)) throw SimulationError("step: vacuum, min rho = " + std::to_string(mn), y.t);
    }
  }

 private:
  void apply_heat(VectorField& v) const {
    for (auto& c : v.comp)
      for (std::size_t i = 0; i < c.size(); ++i) c[i] *= heat_[i];
  }
  static void zero_mean(VectorField& v) {
    for (auto& c : v.comp) c[0] = Complex{};
  }
  void finish_stage(State& s) const {
    leray_project_in_place(s.v);
    zero_mean(s.v);
  }

  Grid grid_;
  SchemeConfig cfg_;
  RhsEvaluator eval_;
  std::vector<double> heat_;
  double damp_ = 1.0;
  Tendency n0_, n1_;
  State a_;
  RealField rho_phys_;
};

inline State step(const State& s, const SchemeConfig& cfg) {
  Integrator it(s.grid(), cfg);
  return it.step(s);
}

}  // namespace pens
