#include <catch_amalgamated.hpp>

#include <cmath>

#include "pens/spectral.hpp"
#include "test_util.hpp"

using Catch::Approx;
using namespace pens;
using testing::max_abs;
using testing::max_abs_diff;
using testing::max_coef;
using testing::max_coef_diff;
using testing::mode_index;
using testing::sample;

TEST_CASE("single cosine has two conjugate modes", "[transform]") {
  for (int n : {2, 3}) {
    const double L = 3.0;
    const Grid g = make_grid(n, 8, L);
    const auto f = forward_transform(sample(g, [&](const auto& x) { return std::cos(2.0 * kPi * x[0] / L); }));
    // Stored half spectrum: +e1 and -e1 both live on the m_last = 0 plane in 3-D only for
    // axis 0; count stored modes and weight by multiplicity.
    double count = 0.0;
    const double expect = std::pow(2.0 * kPi, -0.5 * n) * std::pow(L, n) / 2.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (std::abs(f[i]) < 1e-12 * expect) continue;
      const auto m = g.mode(i);
      CHECK(std::abs(m[0]) == 1);
      for (int a = 1; a < n; ++a) CHECK(m[a] == 0);
      CHECK(f[i].real() == Approx(expect).epsilon(1e-13));
      CHECK(std::abs(f[i].imag()) < 1e-13 * expect);
      count += g.multiplicity(i);
    }
    CHECK(count == 2.0);
  }
}

TEST_CASE("zero field transforms to zero", "[transform]") {
  const Grid g = make_grid(3, 8, 1.0);
  const auto f = forward_transform(RealField(g));
  CHECK(max_coef(f) == 0.0);
}

TEST_CASE("round trip is the identity", "[transform]") {
  for (int n : {2, 3}) {
    const Grid g = make_grid(n, 16, 7.5);
    const auto r = testing::random_real(g, 11);
    const auto back = inverse_transform(forward_transform(r));
    CHECK(max_abs_diff(r, back) <= 1e-12 * max_abs(r));
  }
}

TEST_CASE("transform rejects bad input", "[transform]") {
  const Grid g = make_grid(2, 8, 1.0);
  RealField r(g);
  r[3] = std::nan("");
  CHECK_THROWS_AS(forward_transform(r), InvalidArgument);
  r[3] = INFINITY;
  CHECK_THROWS_AS(forward_transform(r), InvalidArgument);
  RealField bad(g);
  bad.data.resize(5);
  CHECK_THROWS_AS(forward_transform(bad), InvalidArgument);
}

TEST_CASE("discrete Plancherel", "[norms]") {
  for (int n : {2, 3}) {
    const Grid g = make_grid(n, 16, 5.0);
    const auto r = testing::random_real(g, 3);
    const auto f = forward_transform(r);
    const double quad = lp_norm(r, LpNorm::L2);
    CHECK(gradient_seminorm(f, 0) == Approx(quad).epsilon(1e-12));
    CHECK(sobolev_norm(f, 0) == Approx(quad).epsilon(1e-12));
  }
}

TEST_CASE("harmonic derivative", "[calculus]") {
  const double L = 4.0, k = 2.0 * kPi / L;
  const Grid g = make_grid(3, 8, L);
  const auto f = forward_transform(sample(g, [&](const auto& x) { return std::sin(k * x[0]); }));
  const auto d = inverse_transform(derivative(f, 0));
  const auto expect = sample(g, [&](const auto& x) { return k * std::cos(k * x[0]); });
  CHECK(max_abs_diff(d, expect) < 1e-13);
  CHECK(max_abs(inverse_transform(derivative(f, 1))) < 1e-14);

  const auto c = forward_transform(RealField(g, 2.5));
  for (int a = 0; a < 3; ++a) CHECK(max_coef(derivative(c, a)) == 0.0);
  CHECK_THROWS_AS(derivative(f, 3), InvalidArgument);
  CHECK_THROWS_AS(derivative(f, -1), InvalidArgument);
}

TEST_CASE("derivative of a product matches the product rule", "[calculus]") {
  // Both factors and their product stay below N/3, so the spectral result is exact.
  const double L = 2.0 * kPi;
  const Grid g = make_grid(2, 16, L);
  auto f = [](const auto& x) { return std::sin(2.0 * x[0]) + std::cos(x[1]); };
  auto fx = [](const auto& x) { return 2.0 * std::cos(2.0 * x[0]); };
  auto fy = [](const auto& x) { return -std::sin(x[1]); };
  auto h = [](const auto& x) { return std::cos(x[0] + 2.0 * x[1]); };
  auto hx = [](const auto& x) { return -std::sin(x[0] + 2.0 * x[1]); };
  auto hy = [](const auto& x) { return -2.0 * std::sin(x[0] + 2.0 * x[1]); };
  const auto prod = forward_transform(sample(g, [&](const auto& x) { return f(x) * h(x); }));
  const auto dx = inverse_transform(derivative(prod, 0));
  const auto dy = inverse_transform(derivative(prod, 1));
  CHECK(max_abs_diff(dx, sample(g, [&](const auto& x) { return fx(x) * h(x) + f(x) * hx(x); })) < 1e-10);
  CHECK(max_abs_diff(dy, sample(g, [&](const auto& x) { return fy(x) * h(x) + f(x) * hy(x); })) < 1e-10);
}

TEST_CASE("gradient and divergence", "[calculus]") {
  const double L = 2.0 * kPi;
  const Grid g = make_grid(3, 8, L);
  const auto phi = forward_transform(sample(g, [](const auto& x) { return std::sin(x[0]) * std::cos(2.0 * x[2]); }));
  const auto lap = inverse_transform(divergence(gradient(phi)));
  CHECK(max_abs_diff(lap, sample(g, [](const auto& x) { return -5.0 * std::sin(x[0]) * std::cos(2.0 * x[2]); })) <
        1e-12);
}

TEST_CASE("Leray projection examples", "[leray]") {
  const double L = 2.0 * kPi;
  const Grid g = make_grid(3, 8, L);
  const auto phi = forward_transform(sample(g, [](const auto& x) { return std::cos(x[0] + 2.0 * x[1] - x[2]); }));
  const auto p = leray_project(gradient(phi));
  for (int a = 0; a < 3; ++a) CHECK(max_coef(p[a]) < 1e-15);

  VectorField v(g);
  const auto i = mode_index(g, {1, 0, 0});
  v[0][i] = 1.0;
  v[1][i] = 1.0;
  const auto w = leray_project(v);
  CHECK(std::abs(w[0][i]) == 0.0);
  CHECK(w[1][i] == Complex(1.0, 0.0));
  CHECK(std::abs(w[2][i]) == 0.0);

  VectorField z(g);
  z[0][0] = 3.0;
  z[2][0] = -1.0;
  const auto zp = leray_project(z);
  CHECK(zp[0][0] == Complex(3.0, 0.0));
  CHECK(zp[2][0] == Complex(-1.0, 0.0));
}

TEST_CASE("Leray projection properties", "[leray]") {
  for (int n : {2, 3}) {
    const Grid g = make_grid(n, 12, 3.0);
    VectorField f(g);
    for (int a = 0; a < n; ++a) f[a] = forward_transform(testing::random_real(g, 40u + static_cast<unsigned>(a)));
    const auto p = leray_project(f);
    CHECK(max_mode_divergence(p) <= 1e-14);
    const auto pp = leray_project(p);
    for (int a = 0; a < n; ++a) CHECK(max_coef_diff(p[a], pp[a]) <= 1e-15 * max_coef(p[a]));
    for (int a = 0; a < n; ++a) CHECK(hermitian_defect(p[a]) <= 1e-15);
  }
}

TEST_CASE("Leray commutes with differentiation", "[leray]") {
  const Grid g = make_grid(3, 12, 2.0);
  const auto f = testing::random_smooth_vector(g, 7);
  const auto a = leray_project(f);
  for (int axis = 0; axis < 3; ++axis) {
    VectorField df(g), da(g);
    for (int c = 0; c < 3; ++c) {
      df[c] = derivative(f[c], axis);
      da[c] = derivative(a[c], axis);
    }
    const auto pdf = leray_project(df);
    for (int c = 0; c < 3; ++c) CHECK(max_coef_diff(pdf[c], da[c]) <= 1e-12 * max_coef(da[c]));
  }
}

TEST_CASE("dealiasing", "[dealias]") {
  const Grid g = make_grid(3, 12, 1.0);
  const auto smooth = testing::random_smooth(g, 5);
  CHECK(max_coef_diff(dealias(smooth), smooth) == 0.0);

  ScalarField nyq(g);
  nyq[mode_index(g, {6, 0, 0})] = 1.0;
  nyq[mode_index(g, {0, 0, 6})] = 1.0;
  CHECK(max_coef(dealias(nyq)) == 0.0);

  const auto r = dealias(forward_transform(testing::random_real(g, 9)));
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] == Complex{}) continue;
    const auto m = g.mode(i);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(m[a]) <= 4);
  }
  CHECK(hermitian_defect(r) <= 1e-15);
}

TEST_CASE("norm conventions", "[norms]") {
  const double L = 2.0 * kPi;
  for (int n : {2, 3}) {
    const Grid g = make_grid(n, 8, L);
    const auto r = sample(g, [](const auto& x) { return 0.7 * std::cos(x[1]); });
    const auto f = forward_transform(r);
    const double a = lp_norm(r, LpNorm::L2);
    CHECK(a == Approx(0.7 * std::sqrt(std::pow(L, n) / 2.0)).epsilon(1e-13));
    CHECK(gradient_seminorm(f, 1) == Approx(a).epsilon(1e-13));
    CHECK(gradient_seminorm(f, 3) == Approx(a).epsilon(1e-13));
    CHECK(sobolev_norm(f, 2) == Approx(std::sqrt(3.0) * a).epsilon(1e-13));

    const double c = -1.5;
    const auto cf = forward_transform(RealField(g, c));
    for (int s = 0; s <= 4; ++s) CHECK(sobolev_norm(cf, s) == Approx(std::abs(c) * std::pow(L, 0.5 * n)).epsilon(1e-13));
    CHECK(gradient_seminorm(cf, 1) == Approx(0.0).margin(1e-14));
    CHECK_THROWS_AS(gradient_seminorm(f, -1), InvalidArgument);
    CHECK_THROWS_AS(sobolev_norm(f, -1), InvalidArgument);
  }
}

TEST_CASE("physical norms by quadrature", "[norms]") {
  const Grid g = make_grid(2, 8, 2.0);
  RealField r(g, 0.5);
  r[0] = -3.0;
  const double dv = g.cell_volume();
  CHECK(lp_norm(r, LpNorm::L1) == Approx((63 * 0.5 + 3.0) * dv));
  CHECK(lp_norm(r, LpNorm::L2) == Approx(std::sqrt((63 * 0.25 + 9.0) * dv)));
  CHECK(lp_norm(r, LpNorm::Linf) == 3.0);

  RealVectorField v(g);
  v[0][1] = 3.0;
  v[1][1] = 4.0;
  CHECK(lp_norm(v, LpNorm::Linf) == 5.0);
  CHECK(lp_norm(v, LpNorm::L1) == Approx(5.0 * dv));
  CHECK(parse_lp(1) == LpNorm::L1);
  CHECK_THROWS_AS(parse_lp(3), InvalidArgument);
}

TEST_CASE("point evaluation of the interpolant", "[inspect]") {
  const double L = 2.0 * kPi;
  const Grid g = make_grid(3, 8, L);
  auto fn = [](const auto& x) { return 1.0 + std::sin(x[0] - 2.0 * x[1]) + 0.5 * std::cos(3.0 * x[2]); };
  const auto f = forward_transform(sample(g, fn));
  for (const std::array<double, 3> x : {std::array<double, 3>{0.1, 0.2, 0.3}, {5.0, 1.234, 2.2}})
    CHECK(evaluate_at(f, x) == Approx(fn(x)).epsilon(1e-12));
  CHECK(all_finite(f));
  auto bad = f;
  bad[1] = Complex(std::nan(""), 0.0);
  CHECK_FALSE(all_finite(bad));
}

TEST_CASE("hermitian symmetry survives every operation", "[inspect]") {
  const Grid g = make_grid(3, 8, 1.0);
  const auto f = forward_transform(testing::random_real(g, 2));
  CHECK(hermitian_defect(f) <= 1e-15);
  for (int a = 0; a < 3; ++a) CHECK(hermitian_defect(derivative(f, a)) <= 1e-15);
  CHECK(hermitian_defect(dealias(f)) <= 1e-15);
  ScalarField broken = f;
  broken[mode_index(g, {1, 0, 0})] += Complex(0.0, 1.0);
  CHECK(hermitian_defect(broken) > 1e-3);
}
