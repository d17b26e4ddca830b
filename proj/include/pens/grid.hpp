#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "pens/error.hpp"

namespace pens {

inline constexpr double kPi = std::numbers::pi;

// Integer multi-index of a lattice mode; unused trailing components are 0.
using ModeIndex = std::array<int, 3>;
using Wavevector = std::array<double, 3>;

namespace detail {

struct GridTables {
  int dim = 3;
  int modes = 0;
  double length = 0.0;

  // Storage is always three-dimensional; a 2-D grid has a leading extent of 1.
  std::array<std::size_t, 3> phys_extent{};
  std::array<std::size_t, 3> spec_extent{};
  std::size_t phys_size = 0;
  std::size_t spec_size = 0;

  std::vector<ModeIndex> mode;
  std::vector<Wavevector> k;
  // k component per axis with Nyquist entries along that axis set to zero
  // (the spectral derivative symbol).
  std::array<std::vector<double>, 3> kd;
  std::vector<double> k2;
  // Multiplicity of a half-spectrum entry in the full lattice (1 or 2).
  std::vector<double> multiplicity;
  std::vector<unsigned char> nyquist;
  std::vector<unsigned char> dealias_keep;
  // Index of the conjugate partner within the stored half spectrum, or the
  // mode itself when the partner is not stored.
  std::vector<std::size_t> partner;
};

inline int signed_mode(std::size_t i, std::size_t extent) {
  const auto half = extent / 2;
  return i <= half ? static_cast<int>(i) : static_cast<int>(i) - static_cast<int>(extent);
}

}  // namespace detail

/// Periodic box [0, L)^n sampled on N points per axis, together with the
/// discrete wavenumber lattice k(m) = 2 pi m / L of its real-to-complex
/// half spectrum.
///
/// Mode ordering: the half spectrum is stored row-major over
/// (axis 0, ..., axis n-1); the last axis carries m = 0..N/2, the others
/// m = 0..N/2, -N/2+1..-1 (FFT order). Physical samples are row-major with
/// the last axis fastest, at x_a = j L / N.
///
/// Copies share immutable lookup tables.
class Grid {
 public:
  Grid() = default;

  int dim() const { return t_->dim; }
  int modes() const { return t_->modes; }
  double length() const { return t_->length; }
  double spacing() const { return t_->length / t_->modes; }
  double volume() const { return std::pow(t_->length, t_->dim); }
  double cell_volume() const { return std::pow(spacing(), t_->dim); }
  // Lattice cell volume in frequency space, (2 pi / L)^n.
  double frequency_cell() const { return std::pow(2.0 * kPi / t_->length, t_->dim); }
  double k_min() const { return 2.0 * kPi / t_->length; }
  double k_nyquist() const { return kPi * t_->modes / t_->length; }

  std::size_t physical_size() const { return t_->phys_size; }
  std::size_t spectral_size() const { return t_->spec_size; }
  const std::array<std::size_t, 3>& physical_extent() const { return t_->phys_extent; }
  const std::array<std::size_t, 3>& spectral_extent() const { return t_->spec_extent; }

  const ModeIndex& mode(std::size_t i) const { return t_->mode[i]; }
  const Wavevector& k(std::size_t i) const { return t_->k[i]; }
  const std::vector<double>& derivative_symbol(int axis) const { return t_->kd[static_cast<std::size_t>(axis)]; }
  double k2(std::size_t i) const { return t_->k2[i]; }
  double multiplicity(std::size_t i) const { return t_->multiplicity[i]; }
  bool is_nyquist(std::size_t i) const { return t_->nyquist[i] != 0; }
  bool dealias_keeps(std::size_t i) const { return t_->dealias_keep[i] != 0; }
  std::size_t conjugate_partner(std::size_t i) const { return t_->partner[i]; }

  // Array dimension (0..2) that stores spatial axis `axis`.
  std::size_t storage_dim(int axis) const { return static_cast<std::size_t>(3 - t_->dim + axis); }

  // Physical coordinate of sample `flat` along every axis.
  std::array<double, 3> position(std::size_t flat) const {
    const auto& e = t_->phys_extent;
    std::array<std::size_t, 3> j{flat / (e[1] * e[2]), (flat / e[2]) % e[1], flat % e[2]};
    std::array<double, 3> x{};
    for (int a = 0; a < t_->dim; ++a) x[a] = spacing() * static_cast<double>(j[storage_dim(a)]);
    return x;
  }

  bool operator==(const Grid& o) const {
    return t_ == o.t_ || (dim() == o.dim() && modes() == o.modes() && length() == o.length());
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

  bool valid() const { return t_ != nullptr; }

  friend Grid make_grid(int n, int modes, double length);

 private:
  std::shared_ptr<const detail::GridTables> t_;
};

/// Builds the grid for dimension n in {2, 3}, N even and >= 8, L > 0.
inline Grid make_grid(int n, int modes, double length) {
  if (n != 2 && n != 3) throw InvalidArgument("grid dimension must be 2 or 3, got " + std::to_string(n));
  if (modes < 8 || modes % 2 != 0)
    throw InvalidArgument("modes per axis must be even and >= 8, got " + std::to_string(modes));
  if (!(length > 0.0) || !std::isfinite(length)) throw InvalidArgument("box length must be positive");

  auto t = std::make_shared<detail::GridTables>();
  t->dim = n;
  t->modes = modes;
  t->length = length;
  const auto N = static_cast<std::size_t>(modes);
  t->phys_extent = {n == 3 ? N : 1, N, N};
  t->spec_extent = {n == 3 ? N : 1, N, N / 2 + 1};
  t->phys_size = t->phys_extent[0] * t->phys_extent[1] * t->phys_extent[2];
  t->spec_size = t->spec_extent[0] * t->spec_extent[1] * t->spec_extent[2];

  const auto& se = t->spec_extent;
  const double dk = 2.0 * kPi / length;
  const double cutoff = modes / 3.0;
  t->mode.resize(t->spec_size);
  t->k.resize(t->spec_size);
  t->k2.resize(t->spec_size);
  for (auto& kd : t->kd) kd.assign(t->spec_size, 0.0);
  t->multiplicity.resize(t->spec_size);
  t->nyquist.resize(t->spec_size);
  t->dealias_keep.resize(t->spec_size);
  t->partner.resize(t->spec_size);

  std::size_t idx = 0;
  for (std::size_t i0 = 0; i0 < se[0]; ++i0) {
    for (std::size_t i1 = 0; i1 < se[1]; ++i1) {
      for (std::size_t i2 = 0; i2 < se[2]; ++i2, ++idx) {
        const std::array<int, 3> stored{detail::signed_mode(i0, t->phys_extent[0]),
                                        detail::signed_mode(i1, t->phys_extent[1]), static_cast<int>(i2)};
        ModeIndex m{};
        Wavevector k{};
        bool nyq = false;
        bool keep = true;
        double k2 = 0.0;
        for (int a = 0; a < n; ++a) {
          m[a] = stored[3 - n + a];
          k[a] = dk * m[a];
          k2 += k[a] * k[a];
          if (std::abs(m[a]) == modes / 2) nyq = true;
          else t->kd[a][idx] = k[a];
          if (std::abs(m[a]) > cutoff) keep = false;
        }
        t->mode[idx] = m;
        t->k[idx] = k;
        t->k2[idx] = k2;
        t->nyquist[idx] = nyq;
        t->dealias_keep[idx] = keep && !nyq;
        const bool self_paired_plane = (i2 == 0 || i2 == N / 2);
        t->multiplicity[idx] = self_paired_plane ? 1.0 : 2.0;
        if (self_paired_plane) {
          const std::size_t j0 = (se[0] - i0) % se[0];
          const std::size_t j1 = (se[1] - i1) % se[1];
          t->partner[idx] = (j0 * se[1] + j1) * se[2] + i2;
        } else {
          t->partner[idx] = idx;
        }
      }
    }
  }
  Grid g;
  g.t_ = std::move(t);
  return g;
}

}  // namespace pens
