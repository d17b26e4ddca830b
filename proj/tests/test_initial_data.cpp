#include <catch_amalgamated.hpp>

#include <cmath>

#include "pens/initial_data.hpp"
#include "test_util.hpp"

using Catch::Approx;
using namespace pens;
using testing::max_coef;

namespace {

// Integer points with 0 < |m| <= R, by direct enumeration.
std::size_t lattice_count(int n, double R) {
  const int r = static_cast<int>(std::floor(R));
  std::size_t count = 0;
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b)
      for (int c = (n == 3 ? -r : 0); c <= (n == 3 ? r : 0); ++c) {
        const long m2 = 1L * a * a + 1L * b * b + 1L * c * c;
        if (m2 > 0 && static_cast<double>(m2) <= R * R) ++count;
      }
  return count;
}

}  // namespace

TEST_CASE("ball mode count matches lattice enumeration", "[data]") {
  const Grid g = make_grid(3, 64, 128.0);
  const double R = 128.0 / (2.0 * kPi);
  CHECK(R == Approx(20.371832715762604));
  CHECK(ball_mode_count(g, 1.0) == lattice_count(3, R));
  const Grid h = make_grid(2, 32, 40.0);
  CHECK(ball_mode_count(h, 1.0) == lattice_count(2, 40.0 / (2.0 * kPi)));
}

TEST_CASE("v0 is solenoidal with the prescribed floor", "[data]") {
  for (int n : {2, 3}) {
    const Grid g = make_grid(n, 32, 40.0);
    DataSpec d;
    d.delta0 = 0.2;
    const auto v = make_divfree_lowfreq(g, d);
    const double floor = std::pow(d.delta0, 1.5);
    double mn = INFINITY;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < g.spectral_size(); ++i) {
      double m2 = 0.0;
      Complex kv{};
      for (int a = 0; a < n; ++a) {
        m2 += std::norm(v[a][i]);
        kv += g.k(i)[a] * v[a][i];
      }
      CHECK(std::abs(kv) <= 4e-14 * floor);
      const double k2 = g.k2(i);
      if (k2 > 0.0 && k2 <= 1.0) {
        mn = std::min(mn, std::sqrt(m2));
        CHECK(std::sqrt(m2) == Approx(floor).epsilon(1e-14));
        ++inside;
      } else {
        CHECK(m2 == 0.0);
      }
    }
    CHECK(inside > 0);
    CHECK(mn == Approx(floor).epsilon(1e-14));
    for (int a = 0; a < n; ++a) CHECK(testing::max_abs(inverse_transform(divergence(v))) < 1e-15);
    for (int a = 0; a < n; ++a) CHECK(hermitian_defect(v[a]) == 0.0);
  }
}

TEST_CASE("construction is deterministic in the seed", "[data]") {
  const Grid g = make_grid(3, 16, 20.0);
  DataSpec d;
  const auto a = testing::data_state(g, d);
  const auto b = testing::data_state(g, d);
  CHECK(a.rho.coef == b.rho.coef);
  for (int c = 0; c < 3; ++c) {
    CHECK(a.u[c].coef == b.u[c].coef);
    CHECK(a.v[c].coef == b.v[c].coef);
  }
  d.seed += 1;
  const auto other = testing::data_state(g, d);
  CHECK(other.rho.coef != a.rho.coef);
}

TEST_CASE("density construction", "[data]") {
  const Grid g = make_grid(3, 32, 40.0);
  DataSpec d;
  const RealField rho = inverse_transform(make_density(g, d));
  double mn = INFINITY, sum = 0.0;
  for (double x : rho.data) {
    mn = std::min(mn, x);
    sum += x;
  }
  CHECK(mn >= d.rho_base - d.rho_amplitude - 1e-15);
  CHECK(sum / static_cast<double>(rho.size()) == Approx(d.rho_base).epsilon(1e-13));
  CHECK(testing::max_abs(rho) <= d.rho_base + d.rho_amplitude + 1e-15);

  d.rho_amplitude = 0.0;
  const RealField flat = inverse_transform(make_density(g, d));
  for (double x : flat.data) CHECK(x == Approx(d.rho_base).epsilon(1e-14));
}

TEST_CASE("u0 hits half the budget", "[data]") {
  const Grid g = make_grid(3, 16, 20.0);
  DataSpec d;
  const auto u = make_u0(g, d);
  CHECK(std::abs(sobolev_norm(u, d.sobolev_order + 2) - d.delta0 / 6.0) <= 1e-12);
  d.u_fraction = 0.0;
  const auto z = make_u0(g, d);
  for (int a = 0; a < 3; ++a) CHECK(max_coef(z[a]) == 0.0);
}

TEST_CASE("data spec validation", "[data]") {
  const Grid g = make_grid(3, 16, 20.0);
  DataSpec d;
  d.delta0 = 1.0;
  CHECK_THROWS_AS(make_divfree_lowfreq(g, d), InvalidArgument);
  d = DataSpec{};
  d.rho_amplitude = d.rho_base;
  CHECK_THROWS_AS(make_density(g, d), InvalidArgument);
  d = DataSpec{};
  d.cutoff_radius = 0.5 * g.k_min();
  CHECK_THROWS_AS(make_divfree_lowfreq(g, d), InvalidArgument);
  d = DataSpec{};
  d.cutoff_radius = 10.0;
  CHECK_THROWS_AS(make_divfree_lowfreq(g, d), InvalidArgument);
}

TEST_CASE("smallness report", "[data]") {
  const Grid g = make_grid(3, 16, 20.0);
  SECTION("zero data") {
    const auto r = smallness_report(ScalarField(g), VectorField(g), VectorField(g), 3, 0.05);
    CHECK(r.sum_thm1 == 0.0);
    CHECK(r.sum_thm2 == 0.0);
    CHECK(r.pass_thm1);
    CHECK(r.pass_thm2);
    CHECK(r.i0 == 0.05);
  }
  SECTION("norms agree with direct recomputation") {
    DataSpec d;
    const auto s = testing::data_state(g, d);
    const auto r = smallness_report(s.rho, s.u, s.v, 3, d.delta0);
    CHECK(r.u_hs2 == Approx(d.delta0 / 6.0).epsilon(1e-12));
    CHECK(r.v_hs1 == Approx(sobolev_norm(s.v, 4)).epsilon(1e-12));
    const double rho_l1 = d.rho_base * std::pow(20.0, 3);
    CHECK(r.rho_l1 == Approx(rho_l1).epsilon(1e-12));
    CHECK(r.i0 == Approx(d.delta0 + rho_l1 + r.v_l1).epsilon(1e-14));
    CHECK(r.sum_thm2 == Approx(r.sum_thm1 + r.v_l1).epsilon(1e-14));
  }
  SECTION("large L1 velocity with small Sobolev norm") {
    // A single lowest harmonic on a large box: ||v||_{L1} ~ L^3 a while
    // ||v||_{H^4} ~ L^{3/2} a, so a suitable amplitude separates the two.
    const double L = 60.0;
    const Grid h = make_grid(3, 16, L);
    VectorField v(h);
    const double a = 1e-5;
    v = testing::sample_vector(h, [&](const auto& x) {
      return std::array<double, 3>{a * std::sin(2.0 * kPi * x[1] / L), 0.0, 0.0};
    });
    const auto r = smallness_report(ScalarField(h), VectorField(h), v, 3, 0.05);
    CHECK(r.v_hs1 < 0.05);
    CHECK(r.v_l1 > 0.05);
    CHECK(r.pass_thm1);
    CHECK_FALSE(r.pass_thm2);
  }
}
