#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "pens/error.hpp"
#include "pens/field.hpp"
#include "pens/spectral.hpp"

// Density along backward characteristics:
//
//   dX/dl = u(l, X),  X(t) = x,
//   rho(t, x) = rho0(X(0)) exp(-\int_0^t div u(l, X(l)) dl).

namespace pens {

/// Physical-space samples of u and div u at a sequence of times, with
/// periodic Lagrange interpolation in space and Lagrange interpolation in time.
class VelocityHistory {
 public:
  static constexpr int kSpaceStencil = 6;
  static constexpr int kTimeStencil = 4;

  explicit VelocityHistory(const Grid& g) : grid_(g) {}

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return times_.size(); }
  double t_front() const { return times_.front(); }
  double t_back() const { return times_.back(); }

  void add(double t, const VectorField& u) {
    if (u.grid() != grid_) throw InvalidArgument("VelocityHistory: grid mismatch");
    if (!times_.empty() && !(t > times_.back())) throw InvalidArgument("VelocityHistory: times must increase");
    Frame f;
    f.u = inverse_transform(u);
    f.div = inverse_transform(divergence(u));
    times_.push_back(t);
    frames_.push_back(std::move(f));
  }

  // Returns (u_0, ..., u_{n-1}, div u) at (t, x).
  std::array<double, 4> sample(double t, const std::array<double, 3>& x) const {
    if (times_.empty()) throw InvalidArgument("VelocityHistory: empty");
    const double eps = 1e-12 * std::max(1.0, std::abs(times_.back()));
    if (t < times_.front() - eps || t > times_.back() + eps)
      throw SimulationError("characteristics: time outside the recorded history", t);

    std::array<double, 4> out{};
    if (times_.size() == 1) return spatial(frames_[0], x);

    const int m = static_cast<int>(std::min<std::size_t>(kTimeStencil, times_.size()));
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    int hi = static_cast<int>(it - times_.begin());
    int lo = std::clamp(hi - m / 2, 0, static_cast<int>(times_.size()) - m);
    for (int j = lo; j < lo + m; ++j) {
      double w = 1.0;
      for (int l = lo; l < lo + m; ++l)
        if (l != j) w *= (t - times_[l]) / (times_[j] - times_[l]);
      const auto s = spatial(frames_[static_cast<std::size_t>(j)], x);
      for (int c = 0; c < 4; ++c) out[c] += w * s[c];
    }
    return out;
  }

 private:
  struct Frame {
    RealVectorField u;
    RealField div;
  };

  std::array<double, 4> spatial(const Frame& f, const std::array<double, 3>& x) const {
    const Grid& g = grid_;
    const int n = g.dim();
    const int N = g.modes();
    const double h = g.spacing();
    constexpr int P = kSpaceStencil;
    std::array<std::array<int, P>, 3> idx{};
    std::array<std::array<double, P>, 3> wt{};
    for (int a = 0; a < 3; ++a) {
      if (a >= n) {
        idx[a].fill(0);
        wt[a].fill(0.0);
        wt[a][0] = 1.0;
        continue;
      }
      const double s = x[a] / h;
      const double base = std::floor(s);
      const double frac = s - base;
      const int first = static_cast<int>(base) - P / 2 + 1;
      for (int j = 0; j < P; ++j) {
        idx[a][j] = ((first + j) % N + N) % N;
        const double node = static_cast<double>(j - P / 2 + 1);
        double w = 1.0;
        for (int l = 0; l < P; ++l) {
          if (l == j) continue;
          const double other = static_cast<double>(l - P / 2 + 1);
          w *= (frac - other) / (node - other);
        }
        wt[a][j] = w;
      }
    }
    const int p0 = n == 3 ? P : 1;
    std::array<double, 4> out{};
    for (int i = 0; i < p0; ++i) {
      for (int j = 0; j < P; ++j) {
        for (int k = 0; k < P; ++k) {
          double w;
          std::size_t flat;
          if (n == 3) {
            w = wt[0][i] * wt[1][j] * wt[2][k];
            flat = (static_cast<std::size_t>(idx[0][i]) * N + idx[1][j]) * N + idx[2][k];
          } else {
            w = wt[0][j] * wt[1][k];
            flat = static_cast<std::size_t>(idx[0][j]) * N + idx[1][k];
          }
          if (w == 0.0) continue;
          for (int c = 0; c < n; ++c) out[c] += w * f.u[c][flat];
          out[3] += w * f.div[flat];
        }
      }
    }
    return out;
  }

  Grid grid_;
  std::vector<double> times_;
  std::vector<Frame> frames_;
};

struct CharacteristicsOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double initial_step = 1e-2;
};

/// Density at time t at the given probe points, reconstructed from rho0 and
/// the velocity history by integrating characteristics back to time 0.
inline std::vector<double> characteristics_density(const VelocityHistory& hist, const ScalarField& rho0, double t,
                                                   const std::vector<std::array<double, 3>>& probes,
                                                   const CharacteristicsOptions& opt = {}) {
  namespace odeint = boost::numeric::odeint;
  using Vec = std::array<double, 4>;  // X (padded to 3) and the accumulated div u integral
  if (rho0.grid != hist.grid()) throw InvalidArgument("characteristics_density: grid mismatch");
  if (!(t >= 0.0)) throw InvalidArgument("characteristics_density: negative time");
  const Grid& g = hist.grid();
  const int n = g.dim();
  const double L = g.length();
  for (const auto& p : probes)
    for (int a = 0; a < n; ++a)
      if (p[a] < 0.0 || p[a] >= L) throw InvalidArgument("characteristics_density: probe outside the box");

  std::vector<double> out;
  out.reserve(probes.size());
  for (const auto& p : probes) {
    Vec state{p[0], p[1], p[2], 0.0};
    if (t > 0.0) {
      // s = t - l runs forward from 0 to t.
      auto sys = [&](const Vec& y, Vec& dy, double s) {
        std::array<double, 3> x{};
        for (int a = 0; a < n; ++a) x[a] = std::fmod(std::fmod(y[a], L) + L, L);
        const auto f = hist.sample(t - s, x);
        dy = {0.0, 0.0, 0.0, 0.0};
        for (int a = 0; a < n; ++a) dy[a] = -f[a];
        dy[3] = f[3];
      };
      try {
        auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<Vec>>(opt.abs_tol, opt.rel_tol);
        odeint::integrate_adaptive(stepper, sys, state, 0.0, t, std::min(opt.initial_step, t));
      } catch (const odeint::step_adjustment_error& e) {
        throw SimulationError(std::string("characteristics: ODE step failure: ") + e.what(), t);
      }
    }
    std::array<double, 3> origin{};
    for (int a = 0; a < n; ++a) origin[a] = std::fmod(std::fmod(state[a], L) + L, L);
    out.push_back(evaluate_at(rho0, origin) * std::exp(-state[3]));
  }
  return out;
}

/// Uniform sub-grid of m points per axis, aligned with grid samples when m divides N.
inline std::vector<std::array<double, 3>> probe_subgrid(const Grid& g, int m) {
  if (m <= 0) throw InvalidArgument("probe_subgrid: m must be positive");
  const int n = g.dim();
  const double step = g.length() / m;
  std::vector<std::array<double, 3>> pts;
  const int m0 = n == 3 ? m : 1;
  for (int i = 0; i < m0; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        std::array<double, 3> x{};
        if (n == 3) x = {i * step, j * step, k * step};
        else x = {j * step, k * step, 0.0};
        pts.push_back(x);
      }
  return pts;
}

}  // namespace pens
