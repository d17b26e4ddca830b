#pragma once

#include <cmath>
#include <string>

#include "pens/error.hpp"
#include "pens/field.hpp"
#include "pens/spectral.hpp"

namespace pens {

/// Exact heat flow w_t = Lap w started from v0, evaluated mode by mode as
/// w_hat(t, k) = exp(-|k|^2 t) v0_hat(k).
struct HeatReference {
  VectorField initial;

  const Grid& grid() const { return initial.grid(); }
};

inline VectorField heat_evolve(const HeatReference& ref, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("heat_evolve: negative time");
  const Grid& g = ref.grid();
  VectorField w = ref.initial;
  if (t == 0.0) return w;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    const double f = std::exp(-g.k2(i) * t);
    for (auto& c : w.comp) c[i] *= f;
  }
  return w;
}

/// ||w(t)||_{L^2} straight from the Plancherel sum, without materializing w.
inline double heat_l2(const HeatReference& ref, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("heat_l2: negative time");
  const Grid& g = ref.grid();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    double m2 = 0.0;
    for (const auto& c : ref.initial.comp) m2 += std::norm(c[i]);
    sum += g.multiplicity(i) * m2 * std::exp(-2.0 * g.k2(i) * t);
  }
  return std::sqrt(sum * g.frequency_cell());
}

/// Lower envelope c_n delta0^{3/2} (1+t)^{-n/4} for the heat flow of data
/// whose spectrum is at least delta0^{3/2} on the low-frequency ball.
inline double heat_l2_lower(double delta0, int n, double t, double c_n) {
  if (!(delta0 > 0.0 && delta0 < 1.0)) throw InvalidArgument("heat_l2_lower: delta0 must lie in (0, 1)");
  if (!(c_n > 0.0)) throw InvalidArgument("heat_l2_lower: c_n must be positive");
  if (!(t >= 0.0)) throw InvalidArgument("heat_l2_lower: negative time");
  if (n < 1) throw InvalidArgument("heat_l2_lower: bad dimension");
  return c_n * std::pow(delta0, 1.5) * std::pow(1.0 + t, -0.25 * n);
}

/// Discrete counterpart of the ball integral that carries the lower bound:
///
///   c_n^2 = (2 pi / L)^n * sum_{0 < |k| <= radius} exp(-2 |k|^2).
///
/// With |v0_hat| >= delta0^{3/2} on the ball,
/// ||w(t)||^2 >= delta0^3 sum_ball exp(-2|k|^2 (1+t)) (2 pi/L)^n, and the
/// rescaling y = sqrt(1+t) k turns the t = 0 value of that sum into the
/// constant above.
inline double calibrate_heat_constant(const Grid& g, double radius = 1.0) {
  if (!(radius > 0.0)) throw InvalidArgument("calibrate_heat_constant: radius must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    const double k2 = g.k2(i);
    if (k2 == 0.0 || k2 > radius * radius) continue;
    sum += g.multiplicity(i) * std::exp(-2.0 * k2);
  }
  if (sum == 0.0) throw InvalidArgument("calibrate_heat_constant: no lattice mode inside the ball");
  return std::sqrt(sum * g.frequency_cell());
}

/// q = v - w(t).
inline VectorField difference_field(const VectorField& v, const HeatReference& ref, double t) {
  if (v.grid() != ref.grid()) throw InvalidArgument("difference_field: grid mismatch");
  VectorField q = v;
  q -= heat_evolve(ref, t);
  return q;
}

/// A (1+t)^{-alpha}.
struct Envelope {
  double amplitude = 1.0;
  double exponent = 0.0;
};

inline double envelope_eval(const Envelope& e, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("envelope_eval: negative time");
  return e.amplitude * std::pow(1.0 + t, -e.exponent);
}

}  // namespace pens
