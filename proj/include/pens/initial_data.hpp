#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "pens/error.hpp"
#include "pens/field.hpp"
#include "pens/spectral.hpp"

namespace pens {

struct DataSpec {
  double delta0 = 0.05;
  double rho_base = 0.01;
  double rho_amplitude = 0.005;
  double cutoff_radius = 1.0;
  std::uint64_t seed = 20240501;
  int sobolev_order = 3;
  // Target ||u0||_{H^{s+2}} as a fraction of the per-field budget delta0 / 3.
  double u_fraction = 0.5;
};

inline void validate(const DataSpec& d, const Grid& g) {
  if (!(d.delta0 > 0.0 && d.delta0 < 1.0)) throw InvalidArgument("data.delta0 must lie in (0, 1)");
  if (!(d.rho_amplitude >= 0.0 && d.rho_base > d.rho_amplitude))
    throw InvalidArgument("data: need rho_base > rho_amplitude >= 0");
  if (!(d.cutoff_radius > g.k_min()))
    throw InvalidArgument("data.cutoff_radius must exceed the smallest lattice wavenumber 2 pi / L = " +
                          std::to_string(g.k_min()));
  if (d.sobolev_order < 0) throw InvalidArgument("data.sobolev_order must be >= 0");
  if (!(d.u_fraction >= 0.0 && d.u_fraction <= 1.0)) throw InvalidArgument("data.u_fraction must lie in [0, 1]");
}

namespace detail {

enum class Stream : std::uint64_t { Velocity = 1, Density = 2, Euler = 3 };

inline std::mt19937_64 make_rng(std::uint64_t seed, Stream s) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(s)};
  return std::mt19937_64(seq);
}

// Modes of the stored half spectrum with 0 < |k| <= radius. Throws when the
// ball is empty or leaves the dealiased band.
template <class Fn>
std::size_t for_each_ball_mode(const Grid& g, double radius, Fn&& fn) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    const double k2 = g.k2(i);
    if (k2 == 0.0 || k2 > radius * radius) continue;
    if (!g.dealias_keeps(i))
      throw InvalidArgument("initial data: cutoff radius reaches beyond the dealiased band; increase N or reduce L");
    fn(i);
    ++count;
  }
  if (count == 0) throw InvalidArgument("initial data: no lattice mode inside the cutoff ball");
  return count;
}

// Seeded Gaussian coefficients on the ball, made Hermitian on the self-paired
// planes of the half spectrum.
inline ScalarField random_ball_field(const Grid& g, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  ScalarField f(g);
  for_each_ball_mode(g, radius, [&](std::size_t i) {
    const double re = normal(rng);
    const double im = normal(rng);
    f[i] = Complex(re, im);
  });
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    const auto j = g.conjugate_partner(i);
    if (g.multiplicity(i) == 2.0) continue;
    if (j == i) f[i] = Complex(f[i].real(), 0.0);
    else if (j < i) f[i] = std::conj(f[j]);
  }
  return f;
}

}  // namespace detail

/// Number of lattice modes (full spectrum, both members of each conjugate
/// pair) with 0 < |k| <= radius.
inline std::size_t ball_mode_count(const Grid& g, double radius) {
  double count = 0.0;
  detail::for_each_ball_mode(g, radius, [&](std::size_t i) { count += g.multiplicity(i); });
  return static_cast<std::size_t>(count);
}

/// Divergence-free v0 with |v0_hat(k)| = delta0^{3/2} on every lattice mode
/// 0 < |k| <= r0 and zero elsewhere. The direction e(k) is a single seeded
/// reference direction projected onto the plane orthogonal to k; when that
/// projection degenerates the coordinate axes are tried in order.
inline VectorField make_divfree_lowfreq(const Grid& g, const DataSpec& spec) {
  validate(spec, g);
  const int n = g.dim();
  auto rng = detail::make_rng(spec.seed, detail::Stream::Velocity);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::array<double, 3> ref{};
  double rn = 0.0;
  while (rn < 1e-3) {
    rn = 0.0;
    for (int a = 0; a < n; ++a) {
      ref[a] = normal(rng);
      rn += ref[a] * ref[a];
    }
    rn = std::sqrt(rn);
  }
  for (int a = 0; a < n; ++a) ref[a] /= rn;

  const double amp = std::pow(spec.delta0, 1.5);
  VectorField v(g);
  detail::for_each_ball_mode(g, spec.cutoff_radius, [&](std::size_t i) {
    const auto& k = g.k(i);
    const double kn = std::sqrt(g.k2(i));
    std::array<double, 3> e{};
    double en = 0.0;
    for (int attempt = -1; attempt < n && en < 1e-6; ++attempt) {
      std::array<double, 3> d{};
      if (attempt < 0) d = ref;
      else d[attempt] = 1.0;
      double dk = 0.0;
      for (int a = 0; a < n; ++a) dk += d[a] * k[a] / kn;
      en = 0.0;
      for (int a = 0; a < n; ++a) {
        e[a] = d[a] - dk * k[a] / kn;
        en += e[a] * e[a];
      }
      en = std::sqrt(en);
    }
    for (int a = 0; a < n; ++a) v[a][i] = Complex(amp * e[a] / en, 0.0);
  });
  return v;
}

/// rho0 = rho_base + rho_amplitude * b, where b is a seeded zero-mean
/// band-limited bump normalized to max |b| = 1 on the grid.
inline ScalarField make_density(const Grid& g, const DataSpec& spec) {
  validate(spec, g);
  ScalarField rho(g);
  if (spec.rho_amplitude > 0.0) {
    auto rng = detail::make_rng(spec.seed, detail::Stream::Density);
    rho = detail::random_ball_field(g, spec.cutoff_radius, rng);
    const double peak = lp_norm(inverse_transform(rho), LpNorm::Linf);
    rho *= spec.rho_amplitude / peak;
  }
  // Zero mode of a constant c: (2 pi)^{-n/2} c L^n.
  rho[0] = Complex(spec.rho_base * std::pow(2.0 * kPi, -0.5 * g.dim()) * g.volume(), 0.0);
  const RealField phys = inverse_transform(rho);
  const double mn = *std::min_element(phys.data.begin(), phys.data.end());
  if (!(mn > 0.0)) throw InvalidArgument("make_density: nonpositive minimum " + std::to_string(mn));
  return rho;
}

/// Seeded low-frequency u0 (not solenoidal), rescaled so that
/// ||u0||_{H^{s+2}} = u_fraction * delta0 / 3.
inline VectorField make_u0(const Grid& g, const DataSpec& spec) {
  validate(spec, g);
  VectorField u(g);
  if (spec.u_fraction == 0.0) return u;
  auto rng = detail::make_rng(spec.seed, detail::Stream::Euler);
  for (int a = 0; a < g.dim(); ++a) u[a] = detail::random_ball_field(g, spec.cutoff_radius, rng);
  const double target = spec.u_fraction * spec.delta0 / 3.0;
  u *= target / sobolev_norm(u, spec.sobolev_order + 2);
  return u;
}

struct SmallnessReport {
  int sobolev_order = 0;
  double delta0 = 0.0;
  double rho_hs = 0.0;      // ||rho0||_{H^s}
  double u_hs2 = 0.0;       // ||u0||_{H^{s+2}}
  double v_hs1 = 0.0;       // ||v0||_{H^{s+1}}
  double v_l1 = 0.0;        // ||v0||_{L^1}
  double rho_l1 = 0.0;      // ||rho0||_{L^1}; on the torus this is mean * volume
  double sum_thm1 = 0.0;    // rho_hs + u_hs2 + v_hs1
  double sum_thm2 = 0.0;    // sum_thm1 + v_l1
  double i0 = 0.0;          // delta0 + rho_l1 + v_l1
  bool pass_thm1 = false;
  bool pass_thm2 = false;
};

inline SmallnessReport smallness_report(const ScalarField& rho0, const VectorField& u0, const VectorField& v0, int s,
                                        double delta0) {
  if (rho0.grid != u0.grid() || rho0.grid != v0.grid()) throw InvalidArgument("smallness_report: grid mismatch");
  SmallnessReport r;
  r.sobolev_order = s;
  r.delta0 = delta0;
  r.rho_hs = sobolev_norm(rho0, s);
  r.u_hs2 = sobolev_norm(u0, s + 2);
  r.v_hs1 = sobolev_norm(v0, s + 1);
  r.v_l1 = lp_norm(inverse_transform(v0), LpNorm::L1);
  r.rho_l1 = lp_norm(inverse_transform(rho0), LpNorm::L1);
  r.sum_thm1 = r.rho_hs + r.u_hs2 + r.v_hs1;
  r.sum_thm2 = r.sum_thm1 + r.v_l1;
  r.i0 = delta0 + r.rho_l1 + r.v_l1;
  r.pass_thm1 = r.sum_thm1 <= delta0;
  r.pass_thm2 = r.sum_thm2 <= delta0;
  return r;
}

}  // namespace pens
