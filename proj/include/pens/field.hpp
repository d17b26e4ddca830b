#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "pens/fft.hpp"
#include "pens/grid.hpp"

namespace pens {

using Complex = std::complex<double>;

/// Real samples on the physical grid.
struct RealField {
  Grid grid;
  RealBuffer data;

  RealField() = default;
  explicit RealField(const Grid& g, double value = 0.0) : grid(g), data(g.physical_size(), value) {}

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  std::size_t size() const { return data.size(); }
  std::span<const double> samples() const { return {data.data(), data.size()}; }
};

/// Fourier coefficients of a real field over the stored half spectrum.
/// Coefficients approximate the unitary transform (2 pi)^{-n/2} \int f e^{-ik.x} dx.
struct ScalarField {
  Grid grid;
  ComplexBuffer coef;

  ScalarField() = default;
  explicit ScalarField(const Grid& g) : grid(g), coef(g.spectral_size(), Complex{}) {}

  Complex& operator[](std::size_t i) { return coef[i]; }
  const Complex& operator[](std::size_t i) const { return coef[i]; }
  std::size_t size() const { return coef.size(); }

  ScalarField& operator+=(const ScalarField& o) {
    for (std::size_t i = 0; i < coef.size(); ++i) coef[i] += o.coef[i];
    return *this;
  }
  ScalarField& operator-=(const ScalarField& o) {
    for (std::size_t i = 0; i < coef.size(); ++i) coef[i] -= o.coef[i];
    return *this;
  }
  ScalarField& operator*=(double a) {
    for (auto& c : coef) c *= a;
    return *this;
  }
  // this += a * x
  void axpy(double a, const ScalarField& x) {
    for (std::size_t i = 0; i < coef.size(); ++i) coef[i] += a * x.coef[i];
  }
  void set_zero() { std::fill(coef.begin(), coef.end(), Complex{}); }
};

/// n spectral components sharing one grid.
struct VectorField {
  std::vector<ScalarField> comp;

  VectorField() = default;
  explicit VectorField(const Grid& g) : comp(static_cast<std::size_t>(g.dim()), ScalarField(g)) {}

  const Grid& grid() const { return comp.front().grid; }
  int dim() const { return static_cast<int>(comp.size()); }
  ScalarField& operator[](int a) { return comp[static_cast<std::size_t>(a)]; }
  const ScalarField& operator[](int a) const { return comp[static_cast<std::size_t>(a)]; }

  VectorField& operator+=(const VectorField& o) {
    for (int a = 0; a < dim(); ++a) (*this)[a] += o[a];
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    for (int a = 0; a < dim(); ++a) (*this)[a] -= o[a];
    return *this;
  }
  VectorField& operator*=(double s) {
    for (auto& c : comp) c *= s;
    return *this;
  }
  void axpy(double s, const VectorField& x) {
    for (int a = 0; a < dim(); ++a) (*this)[a].axpy(s, x[a]);
  }
  void set_zero() {
    for (auto& c : comp) c.set_zero();
  }
};

/// Real vector samples, one RealField per component.
struct RealVectorField {
  std::vector<RealField> comp;

  RealVectorField() = default;
  explicit RealVectorField(const Grid& g, double value = 0.0)
      : comp(static_cast<std::size_t>(g.dim()), RealField(g, value)) {}

  const Grid& grid() const { return comp.front().grid; }
  int dim() const { return static_cast<int>(comp.size()); }
  RealField& operator[](int a) { return comp[static_cast<std::size_t>(a)]; }
  const RealField& operator[](int a) const { return comp[static_cast<std::size_t>(a)]; }
};

inline ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
inline ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
inline VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
inline VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }

}  // namespace pens
