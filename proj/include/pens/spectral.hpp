#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include "pens/error.hpp"
#include "pens/fft.hpp"
#include "pens/field.hpp"
#include "pens/grid.hpp"

namespace pens {

namespace detail {

// f_hat = (2 pi)^{-n/2} (L/N)^n DFT(f): the Riemann sum of the unitary
// continuous transform.
inline double forward_scale(const Grid& g) {
  return std::pow(2.0 * kPi, -0.5 * g.dim()) * g.cell_volume();
}

inline ComplexBuffer& scratch_spectrum(std::size_t n) {
  thread_local ComplexBuffer buf;
  if (buf.size() < n) buf.resize(n);
  return buf;
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (a != b) throw InvalidArgument(std::string(what) + ": grid mismatch");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Transforms

inline void forward_transform_into(const RealField& f, ScalarField& out) {
  const Grid& g = f.grid;
  if (f.data.size() != g.physical_size()) throw InvalidArgument("forward_transform: sample count does not match grid");
  if (!out.grid.valid() || out.grid != g || out.coef.size() != g.spectral_size()) out = ScalarField(g);
  detail::plans_for(g)->forward(f.data.data(), out.coef.data());
  const double s = detail::forward_scale(g);
  for (auto& c : out.coef) c *= s;
}

/// Real samples to spectral coefficients. Rejects non-finite samples.
inline ScalarField forward_transform(const RealField& f) {
  if (!f.grid.valid() || f.data.size() != f.grid.physical_size())
    throw InvalidArgument("forward_transform: sample count does not match grid");
  for (double x : f.data)
    if (!std::isfinite(x)) throw InvalidArgument("forward_transform: non-finite sample");
  ScalarField out(f.grid);
  forward_transform_into(f, out);
  return out;
}

inline void inverse_transform_into(const ScalarField& f, RealField& out) {
  const Grid& g = f.grid;
  if (!out.grid.valid() || out.grid != g || out.data.size() != g.physical_size()) out = RealField(g);
  auto& tmp = detail::scratch_spectrum(g.spectral_size());
  const double s = 1.0 / (detail::forward_scale(g) * static_cast<double>(g.physical_size()));
  for (std::size_t i = 0; i < g.spectral_size(); ++i) tmp[i] = s * f.coef[i];
  detail::plans_for(g)->inverse(tmp.data(), out.data.data());
}

inline RealField inverse_transform(const ScalarField& f) {
  RealField out(f.grid);
  inverse_transform_into(f, out);
  return out;
}

inline VectorField forward_transform(const RealVectorField& f) {
  VectorField out(f.grid());
  for (int a = 0; a < f.dim(); ++a) out[a] = forward_transform(f[a]);
  return out;
}

inline RealVectorField inverse_transform(const VectorField& f) {
  RealVectorField out(f.grid());
  for (int a = 0; a < f.dim(); ++a) inverse_transform_into(f[a], out[a]);
  return out;
}

// ---------------------------------------------------------------------------
// Calculus

/// d/dx_axis: multiplies mode m by i k_axis(m). Nyquist entries along the
/// axis have no conjugate partner and are dropped.
inline ScalarField derivative(const ScalarField& f, int axis) {
  const Grid& g = f.grid;
  if (axis < 0 || axis >= g.dim()) throw InvalidArgument("derivative: axis out of range");
  ScalarField out(g);
  const auto& kd = g.derivative_symbol(axis);
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = Complex(-kd[i] * f[i].imag(), kd[i] * f[i].real());
  return out;
}

/// Inverse transform of the spectrum fill(i), without materializing it as a field.
template <class Fill>
void inverse_transform_of(const Grid& g, Fill&& fill, RealField& out) {
  if (!out.grid.valid() || out.grid != g || out.data.size() != g.physical_size()) out = RealField(g);
  auto& tmp = detail::scratch_spectrum(g.spectral_size());
  const double s = 1.0 / (detail::forward_scale(g) * static_cast<double>(g.physical_size()));
  for (std::size_t i = 0; i < g.spectral_size(); ++i) tmp[i] = s * fill(i);
  detail::plans_for(g)->inverse(tmp.data(), out.data.data());
}

inline VectorField gradient(const ScalarField& f) {
  VectorField out(f.grid);
  for (int a = 0; a < f.grid.dim(); ++a) out[a] = derivative(f, a);
  return out;
}

inline ScalarField divergence(const VectorField& f) {
  ScalarField out(f.grid());
  for (int a = 0; a < f.dim(); ++a) out += derivative(f[a], a);
  return out;
}

/// Leray projector I - k k^T / |k|^2 applied mode-wise. The zero mode
/// passes through; Nyquist modes are dropped.
inline void leray_project_in_place(VectorField& f) {
  const Grid& g = f.grid();
  const int n = f.dim();
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    if (g.is_nyquist(i)) {
      for (int a = 0; a < n; ++a) f[a][i] = Complex{};
      continue;
    }
    const double k2 = g.k2(i);
    if (k2 == 0.0) continue;
    const auto& k = g.k(i);
    Complex kf{};
    for (int a = 0; a < n; ++a) kf += k[a] * f[a][i];
    kf /= k2;
    for (int a = 0; a < n; ++a) f[a][i] -= k[a] * kf;
  }
}

inline VectorField leray_project(VectorField f) {
  leray_project_in_place(f);
  return f;
}

/// 2/3 rule: zeroes every mode with some |m_axis| > N/3, and all Nyquist modes.
inline void dealias_in_place(ScalarField& f) {
  const Grid& g = f.grid;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!g.dealias_keeps(i)) f[i] = Complex{};
}
inline void dealias_in_place(VectorField& f) {
  for (auto& c : f.comp) dealias_in_place(c);
}
inline ScalarField dealias(ScalarField f) {
  dealias_in_place(f);
  return f;
}
inline VectorField dealias(VectorField f) {
  dealias_in_place(f);
  return f;
}

// ---------------------------------------------------------------------------
// Norms. Spectral sums carry the lattice cell (2 pi / L)^n so that they agree
// with grid quadrature of the physical samples (discrete Plancherel).

namespace detail {

template <class Weight>
double weighted_energy(const ScalarField& f, Weight&& w) {
  const Grid& g = f.grid;
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += g.multiplicity(i) * w(i) * std::norm(f[i]);
  return sum * g.frequency_cell();
}

inline double k_power(double k2, int j) {
  double r = 1.0;
  for (int p = 0; p < j; ++p) r *= k2;
  return r;
}

}  // namespace detail

/// Squared homogeneous seminorm sum |k|^{2j} |f_hat|^2.
inline double gradient_seminorm_sq(const ScalarField& f, int j) {
  if (j < 0) throw InvalidArgument("gradient_seminorm: negative order");
  const Grid& g = f.grid;
  return detail::weighted_energy(f, [&](std::size_t i) { return detail::k_power(g.k2(i), j); });
}
inline double gradient_seminorm_sq(const VectorField& f, int j) {
  double s = 0.0;
  for (const auto& c : f.comp) s += gradient_seminorm_sq(c, j);
  return s;
}
template <class F>
double gradient_seminorm(const F& f, int j) {
  return std::sqrt(gradient_seminorm_sq(f, j));
}

/// H^s norm with the convention ||f||_{H^s}^2 = sum_{j<=s} ||grad^j f||^2.
inline double sobolev_norm_sq(const ScalarField& f, int s) {
  if (s < 0) throw InvalidArgument("sobolev_norm: negative order");
  const Grid& g = f.grid;
  return detail::weighted_energy(f, [&](std::size_t i) {
    double w = 0.0, p = 1.0;
    for (int j = 0; j <= s; ++j, p *= g.k2(i)) w += p;
    return w;
  });
}
inline double sobolev_norm_sq(const VectorField& f, int s) {
  double r = 0.0;
  for (const auto& c : f.comp) r += sobolev_norm_sq(c, s);
  return r;
}
template <class F>
double sobolev_norm(const F& f, int s) {
  return std::sqrt(sobolev_norm_sq(f, s));
}

/// ||grad f||_{H^s}: seminorm orders 1..s+1.
template <class F>
double gradient_sobolev_norm(const F& f, int s) {
  if (s < 0) throw InvalidArgument("gradient_sobolev_norm: negative order");
  double r = 0.0;
  for (int j = 1; j <= s + 1; ++j) r += gradient_seminorm_sq(f, j);
  return std::sqrt(r);
}

enum class LpNorm { L1, L2, Linf };

inline double lp_norm(const RealField& f, LpNorm p) {
  const double dv = f.grid.cell_volume();
  switch (p) {
    case LpNorm::L1: {
      double s = 0.0;
      for (double x : f.data) s += std::abs(x);
      return s * dv;
    }
    case LpNorm::L2: {
      double s = 0.0;
      for (double x : f.data) s += x * x;
      return std::sqrt(s * dv);
    }
    case LpNorm::Linf: {
      double m = 0.0;
      for (double x : f.data) m = std::max(m, std::abs(x));
      return m;
    }
  }
  return 0.0;
}

// Pointwise Euclidean magnitude, integrated.
inline double lp_norm(const RealVectorField& f, LpNorm p) {
  const Grid& g = f.grid();
  RealField mag(g);
  for (std::size_t i = 0; i < g.physical_size(); ++i) {
    double s = 0.0;
    for (int a = 0; a < f.dim(); ++a) s += f[a][i] * f[a][i];
    mag[i] = std::sqrt(s);
  }
  return lp_norm(mag, p);
}

inline LpNorm parse_lp(int p) {
  switch (p) {
    case 1: return LpNorm::L1;
    case 2: return LpNorm::L2;
    default: throw InvalidArgument("lp_norm: only p in {1, 2, inf} is supported");
  }
}

// ---------------------------------------------------------------------------
// Inspection

/// Largest violation |c(m) - conj(c(-m))| over stored conjugate pairs,
/// relative to the largest coefficient magnitude (0 for the zero field).
inline double hermitian_defect(const ScalarField& f) {
  const Grid& g = f.grid;
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    scale = std::max(scale, std::abs(f[i]));
    const auto j = g.conjugate_partner(i);
    if (j == i && g.multiplicity(i) == 2.0) continue;
    worst = std::max(worst, std::abs(f[i] - std::conj(f[j])));
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

/// Max over nonzero modes of |k . F(k)| / |k|, relative to the largest
/// coefficient magnitude (0 for the zero field).
inline double max_mode_divergence(const VectorField& f) {
  const Grid& g = f.grid();
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    double mag = 0.0;
    for (int a = 0; a < f.dim(); ++a) mag += std::norm(f[a][i]);
    scale = std::max(scale, std::sqrt(mag));
    if (g.k2(i) == 0.0) continue;
    Complex kf{};
    for (int a = 0; a < f.dim(); ++a) kf += g.k(i)[a] * f[a][i];
    worst = std::max(worst, std::abs(kf) / std::sqrt(g.k2(i)));
  }
  return scale == 0.0 ? 0.0 : worst / scale;
}

/// Trigonometric interpolant of f at an arbitrary point.
inline double evaluate_at(const ScalarField& f, const std::array<double, 3>& x) {
  const Grid& g = f.grid;
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == Complex{}) continue;
    double phase = 0.0;
    for (int a = 0; a < g.dim(); ++a) phase += g.k(i)[a] * x[a];
    sum += g.multiplicity(i) * (f[i].real() * std::cos(phase) - f[i].imag() * std::sin(phase));
  }
  return sum / (detail::forward_scale(g) * static_cast<double>(g.physical_size()));
}

inline bool all_finite(const ScalarField& f) {
  return std::all_of(f.coef.begin(), f.coef.end(),
                     [](const Complex& c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); });
}
inline bool all_finite(const VectorField& f) {
  return std::all_of(f.comp.begin(), f.comp.end(), [](const ScalarField& c) { return all_finite(c); });
}

}  // namespace pens
