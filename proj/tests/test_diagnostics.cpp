#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "pens/diagnostics.hpp"
#include "pens/simulation.hpp"
#include "test_util.hpp"

using Catch::Approx;
using namespace pens;
using V3 = std::array<double, 3>;

namespace {

V3 zero3(const V3&) { return {0.0, 0.0, 0.0}; }

State random_state(const Grid& g, unsigned seed) {
  State s;
  s.rho = testing::random_smooth(g, seed);
  s.rho[0] += 10.0;
  s.u = testing::random_smooth_vector(g, seed + 1);
  s.v = leray_project(testing::random_smooth_vector(g, seed + 2));
  for (auto& c : s.v.comp) c[0] = 0.0;
  return s;
}

// Direct quadrature of rho |a - b|^2 and |c|^2 over the physical samples.
double quadrature(const Grid& g, const std::vector<double>& w, const std::vector<std::vector<double>>& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.physical_size(); ++i) {
    double m = 0.0;
    for (const auto& c : a) m += c[i] * c[i];
    s += w[i] * m;
  }
  return s * std::pow(g.spacing(), g.dim());
}

TimeSeries series_of(const std::vector<double>& t, const std::vector<double>& E, const std::vector<double>& D) {
  TimeSeries ts;
  for (std::size_t i = 0; i < t.size(); ++i) {
    DiagnosticsRecord r;
    r.t = t[i];
    r.E = E[i];
    r.D = D[i];
    ts.records.push_back(r);
  }
  return ts;
}

}  // namespace

TEST_CASE("energy and dissipation on constant fields", "[energy]") {
  const double L = 3.0;
  const Grid g = make_grid(3, 8, L);
  const V3 a{0.5, -1.0, 2.0};
  const State s = testing::make_state(g, [](const V3&) { return 0.2; }, [&](const V3&) { return a; }, zero3);
  CHECK(energy_E(s) == Approx(0.2 * 5.25 * L * L * L).epsilon(1e-13));
  CHECK(dissipation_D(s) == Approx(0.2 * 5.25 * L * L * L).epsilon(1e-13));

  const State r = random_state(g, 30);
  State vac = r;
  vac.rho = ScalarField(g);
  CHECK(energy_E(vac) == Approx(std::pow(gradient_seminorm(r.v, 0), 2)).epsilon(1e-13));
  State same = r;
  same.u = r.v;
  CHECK(dissipation_D(same) == Approx(gradient_seminorm_sq(r.v, 1)).epsilon(1e-12));
}

TEST_CASE("energy and dissipation agree with brute-force quadrature", "[energy]") {
  const Grid g = make_grid(3, 12, 2.5);
  const State s = random_state(g, 31);
  auto physical = [](const ScalarField& f) {
    const auto p = inverse_transform(f);
    return std::vector<double>(p.data.begin(), p.data.end());
  };
  const auto rho = physical(s.rho);
  std::vector<std::vector<double>> u, v, umv, dv;
  for (int a = 0; a < 3; ++a) {
    u.push_back(physical(s.u[a]));
    v.push_back(physical(s.v[a]));
    std::vector<double> d(g.physical_size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = u.back()[i] - v.back()[i];
    umv.push_back(d);
    for (int b = 0; b < 3; ++b) dv.push_back(physical(derivative(s.v[a], b)));
  }
  const std::vector<double> ones(g.physical_size(), 1.0);
  CHECK(energy_E(s) == Approx(quadrature(g, rho, u) + quadrature(g, ones, v)).epsilon(1e-12));
  CHECK(dissipation_D(s) == Approx(quadrature(g, rho, umv) + quadrature(g, ones, dv)).epsilon(1e-12));
}

TEST_CASE("ball energy", "[ball]") {
  const Grid g = make_grid(3, 12, 10.0);
  const State s = random_state(g, 32);
  CHECK(ball_energy(s.v, 0.5 * g.k_min()) == 0.0);
  double prev = 0.0;
  for (double r = 0.1; r < 5.0; r += 0.1) {
    const double e = ball_energy(s.v, r);
    CHECK(e >= prev);
    prev = e;
  }
  const double rmax = std::sqrt(3.0) * g.k_nyquist() * 1.001;
  CHECK(ball_energy(s.v, rmax) == Approx(std::pow(lp_norm(inverse_transform(s.v), LpNorm::L2), 2)).epsilon(1e-12));

  // Independent mode scan over the full lattice through the interpolant.
  double brute = 0.0;
  const double dk = g.k_min();
  for (std::size_t i = 0; i < g.spectral_size(); ++i) {
    const auto m = g.mode(i);
    const double k2 = dk * dk * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
    if (k2 > 1.0) continue;
    const double w = (m[2] == 0 || m[2] == 6) ? 1.0 : 2.0;
    for (int a = 0; a < 3; ++a) brute += w * std::norm(s.v[a][i]);
  }
  CHECK(ball_energy(s.v, 1.0) == Approx(brute * std::pow(dk, 3)).epsilon(1e-14));
  CHECK_THROWS_AS(ball_energy(s.v, 0.0), InvalidArgument);
}

TEST_CASE("Fourier splitting radii", "[ball]") {
  CHECK(radius_X1(3, 0.0) == 1.0);
  CHECK(radius_X1(3, 9.0) == Approx(std::sqrt(0.25)));
  CHECK(radius_X3(3, 0.0) == Approx(std::sqrt(0.5)));
}

TEST_CASE("functionals M and N", "[functional]") {
  std::vector<double> t, E, D;
  for (int i = 0; i <= 20; ++i) {
    t.push_back(0.5 * i);
    E.push_back(std::pow(1.0 + 0.5 * i, -1.5));
    D.push_back(0.0);
  }
  auto ts = series_of(t, E, D);
  CHECK(functional_M(ts, 3) == Approx(1.0).epsilon(1e-14));
  TimeSeries one = series_of({0.0}, {4.2}, {0.0});
  CHECK(functional_M(one, 3) == 4.2);
  CHECK_THROWS_AS(functional_M(TimeSeries{}, 3), InvalidArgument);
  ts.sobolev_order = 3;
  for (auto& r : ts.records) r.grad_u_hs = r.grad_v_hs = 0.5 * std::pow(1.0 + r.t, -0.75);
  CHECK(functional_N(ts, 3, 3) == Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(functional_N(ts, 3, 2), InvalidArgument);
}

TEST_CASE("running suprema are non-decreasing along a run", "[functional]") {
  const Grid g = make_grid(3, 16, 2.0 * kPi);
  const State s = testing::data_state(g, testing::strong_spec());
  SchemeConfig cfg;
  cfg.dt = 0.02;
  RunOptions opt;
  opt.t_end = 0.6;
  opt.sample_interval = 0.04;
  const auto ts = run(s, cfg, opt);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    CHECK(ts.records[i].M_running >= ts.records[i - 1].M_running);
    CHECK(ts.records[i].N_running >= ts.records[i - 1].N_running);
    CHECK(ts.records[i].E <= ts.records[i - 1].E);
    CHECK(ts.records[i].l1_rho == Approx(ts.records[0].l1_rho).epsilon(1e-10));
  }
  CHECK(ts.records.back().M_running == Approx(functional_M(ts, 3)).epsilon(1e-15));
  for (const auto& r : ts.records) {
    CHECK(r.E >= 0.0);
    CHECK(r.D >= 0.0);
    CHECK(r.min_rho > 0.0);
  }
  // Characteristics bound on the density range with Gamma = \int ||div u||_inf.
  double gamma = 0.0;
  for (std::size_t i = 1; i < ts.size(); ++i)
    gamma += 0.5 * (ts.records[i].t - ts.records[i - 1].t) * (ts.records[i].linf_div_u + ts.records[i - 1].linf_div_u);
  const auto& first = ts.records.front();
  for (const auto& r : ts.records) {
    CHECK(r.min_rho >= first.min_rho * std::exp(-gamma) * (1.0 - 1e-3));
    CHECK(r.max_rho <= first.max_rho * std::exp(gamma) * (1.0 + 1e-3));
  }
  CHECK(energy_identity_residual(ts) < 1e-2);
}

TEST_CASE("weighted integral", "[weighted]") {
  std::vector<double> t, zero, q;
  const double T = 10.0;
  const int m = 2000;
  for (int i = 0; i <= m; ++i) {
    t.push_back(T * i / m);
    zero.push_back(0.0);
    q.push_back(std::pow(1.0 + t.back(), -9.0 / 8.0 - 1.0));
  }
  CHECK(weighted_integral(t, zero, 9.0 / 8.0).back() == 0.0);
  const auto w = weighted_integral(t, q, 9.0 / 8.0);
  const double h = T / m;
  CHECK(w.back() == Approx(std::log1p(T)).margin(h * h));
  CHECK(w.front() == 0.0);
  for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] >= w[i - 1]);
  CHECK_THROWS_AS(weighted_integral(std::vector<double>{0.0}, std::vector<double>{1.0}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(weighted_integral(t, std::vector<double>{1.0}, 1.0), InvalidArgument);
}

TEST_CASE("power-law fit", "[fit]") {
  std::vector<double> t, v, c, scaled;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(0.3 * i);
    v.push_back(7.0 * std::pow(1.0 + t.back(), -0.75));
    c.push_back(2.0);
    scaled.push_back(1e-6 * v.back());
  }
  const auto f = fit_decay(t, v, 1.0, 25.0);
  CHECK(std::abs(f.exponent - 0.75) <= 1e-10);
  CHECK(f.log_amplitude == Approx(std::log(7.0)).epsilon(1e-12));
  CHECK(f.r_squared == Approx(1.0).margin(1e-14));
  CHECK(std::abs(fit_decay(t, c, 1.0, 25.0).exponent) <= 1e-14);
  const auto g = fit_decay(t, scaled, 1.0, 25.0);
  CHECK(std::abs(g.exponent - f.exponent) <= 1e-12);
  CHECK(g.log_amplitude == Approx(f.log_amplitude + std::log(1e-6)).epsilon(1e-12));
  CHECK_THROWS_AS(fit_decay(t, v, 1.0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(fit_decay(t, v, 5.0, 5.0), InvalidArgument);
  auto bad = v;
  bad[10] = 0.0;
  CHECK_THROWS_AS(fit_decay(t, bad, 0.0, 25.0), InvalidArgument);
}

TEST_CASE("heat-only run decays at close to the continuum rate", "[fit]") {
  const double L = 128.0;
  const Grid g = make_grid(3, 64, L);
  DataSpec d;
  d.delta0 = 0.1;
  const HeatReference ref{make_divfree_lowfreq(g, d)};
  const double tw = 0.3 * std::pow(L / (2.0 * kPi), 2);
  std::vector<double> t, v;
  for (int i = 0; i <= 100; ++i) {
    t.push_back(tw * i / 100.0);
    v.push_back(heat_l2(ref, t.back()));
  }
  const auto f = fit_decay(t, v, 0.1 * tw, tw);
  CHECK(f.exponent >= 0.6);
  CHECK(f.exponent <= 0.9);
}

TEST_CASE("energy identity residual", "[residual]") {
  CHECK(energy_identity_residual(series_of({0, 1, 2}, {0, 0, 0}, {0, 0, 0})) == 0.0);
  auto residual = [](double h) {
    std::vector<double> t, E, D;
    for (int i = 0; i <= static_cast<int>(std::lround(2.0 / h)); ++i) {
      t.push_back(i * h);
      E.push_back(std::exp(-2.0 * t.back()));
      D.push_back(std::exp(-2.0 * t.back()));
    }
    return energy_identity_residual(series_of(t, E, D));
  };
  // Central differences of exp(-2t) overshoot by sinh(2h) / 2h - 1, worst at t = h.
  auto exact = [](double h) { return std::exp(-2.0 * h) * (std::sinh(2.0 * h) / (2.0 * h) - 1.0); };
  for (double h : {0.1, 0.05, 0.025}) CHECK(residual(h) == Approx(exact(h)).epsilon(1e-9));
  CHECK(residual(0.05) / residual(0.025) == Approx(4.0).epsilon(0.05));
  CHECK_THROWS_AS(energy_identity_residual(series_of({0, 1}, {1, 1}, {1, 1})), InvalidArgument);
}

TEST_CASE("diagnostics CSV", "[csv]") {
  const auto& cols = csv_columns();
  const std::vector<std::string> expect{"t",       "E",         "D",         "l2_u",    "l2_v",    "l2_umv",   "h_s_rho",
                                        "h_sp2_u", "h_sp1_v",   "grad_u_hs", "grad_v_hs", "l1_rho", "min_rho", "ball_X1",
                                        "ball_X3", "l2_w",      "l2_q",      "linf_w",  "M_running", "N_running"};
  CHECK(cols == expect);

  TimeSeries ts = series_of({0.0, 0.1}, {1.0 / 3.0, 0.25}, {0.5, 0.125});
  std::ostringstream os;
  write_csv(os, ts);
  const std::string text = os.str();
  CHECK(text.rfind("t,E,D,l2_u,", 0) == 0);
  CHECK(text.find("0.33333333333333331") != std::string::npos);

  const auto path = (std::filesystem::temp_directory_path() / "pens_test_diag.csv").string();
  write_csv(path, ts);
  const auto back = read_csv(path);
  CHECK(back.size() == 20);
  CHECK(back.at("E")[0] == 1.0 / 3.0);
  CHECK(back.at("t")[1] == 0.1);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_csv(path), InvalidArgument);
}
