#include <gtest/gtest.h>

#include <cmath>

#include "hkb/error.hpp"
#include "hkb/norms.hpp"

using namespace hkb;

namespace {

WalkSpec walk_of(std::initializer_list<std::pair<LatticePoint, Rational>> items) {
  WalkSpec w;
  for (const auto& [l, c] : items) w.coeffs[l] = c;
  return w;
}

LatticePoint pt(int a) { return lattice_point({a}); }
LatticePoint pt(int a, int b) { return lattice_point({a, b}); }

struct Walker {
  RootSystemData rs;
  QParams q;
  WalkSpec walk;
  KappaModel km;
};

Walker make(Family f, int q, WalkSpec w) {
  auto rs = build_root_system(f);
  auto qp = uniform_qparams(rs, q);
  auto km = build_kappa(rs, qp, w);
  return {rs, qp, w, km};
}

Walker lazy_tree() { return make(Family::A1, 2, walk_of({{pt(0), Rational(1, 10)}, {pt(1), Rational(9, 10)}})); }
Walker a2_walk() { return make(Family::A2, 2, walk_of({{pt(1, 0), 1}})); }
Walker a2_lazy() {
  return make(Family::A2, 2, walk_of({{pt(0, 0), Rational(1, 10)}, {pt(1, 0), Rational(9, 20)}, {pt(0, 1), Rational(9, 20)}}));
}

std::map<int, RadialFunction> series(const Walker& w, int lo, int hi, int step) {
  auto table = prepare_table(w.rs, w.q, w.walk);
  std::vector<int> times;
  for (int n = lo; n <= hi; n += step) times.push_back(n);
  return heat_recursive_at(table, w.walk, times);
}

// |λ| straight from the Gram matrix.
double length(const RootSystemData& rs, const LatticePoint& l) {
  double s = 0;
  for (int i = 0; i < rs.rank; ++i)
    for (int j = 0; j < rs.rank; ++j) s += l[i] * l[j] * rs.gram[i][j].get_d();
  return std::sqrt(s);
}

}  // namespace

TEST(Fits, LineAndCorrectedPowerLaw) {
  auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  EXPECT_NEAR(f.slope, 2, 1e-12);
  EXPECT_NEAR(f.intercept, 1, 1e-12);
  EXPECT_THROW(fit_line({1, 1}, {0, 1}), Error);

  std::vector<double> ns, ys;
  for (int n = 50; n <= 400; n += 10) {
    ns.push_back(n);
    ys.push_back(0.3 - 1.5 * std::log(n) + 40.0 / n - 300.0 / (n * n));
  }
  EXPECT_NEAR(fit_power_law(ns, ys, 2).slope, -1.5, 1e-9);
  EXPECT_GT(std::abs(fit_power_law(ns, ys, 0).slope + 1.5), 0.05);
  EXPECT_THROW(fit_power_law({1, 2, 3}, {0, 0, 0}, 2), Error);

  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (int i = 1; i <= 6; ++i) {
    rows.push_back({1.0, double(i), std::log(i)});
    y.push_back(2 - 0.5 * i + 3 * std::log(i));
  }
  auto c = least_squares(rows, y);
  EXPECT_NEAR(c[0], 2, 1e-12);
  EXPECT_NEAR(c[1], -0.5, 1e-12);
  EXPECT_NEAR(c[2], 3, 1e-12);
  EXPECT_THROW(least_squares({{1, 2}, {2, 4}, {3, 6}}, {1, 2, 3}), Error);
}

TEST(Norms, StochasticityAndDelta) {
  for (auto w : {lazy_tree(), a2_lazy()}) {
    VolumeTable vt(w.rs, w.q);
    auto table = prepare_table(w.rs, w.q, w.walk);
    auto exact = heat_recursive_exact(table, w.walk, 12);
    EXPECT_NEAR(lp_norm(exact[0].to_double(), vt, kInfinity), 1.0, 1e-15);
    for (int n = 0; n <= 12; ++n) EXPECT_NEAR(lp_norm(exact[n].to_double(), vt, 1), 1.0, 1e-9);
  }
}

TEST(Norms, TwoNormAgreesAcrossRoutes) {
  for (auto w : {lazy_tree(), a2_walk()}) {
    VolumeTable vt(w.rs, w.q);
    auto grid = build_grid(w.rs, w.q, 64);
    auto table = prepare_table(w.rs, w.q, w.walk);
    for (int n : {5, 17, 30}) {
      const double a = lp_norm(heat_recursive(table, w.walk, n), vt, 2);
      const double b = lp_norm(heat_spectral(w.km, grid, n), vt, 2);
      EXPECT_NEAR(a * a / (b * b), 1.0, 1e-9) << n;
    }
  }
}

TEST(Norms, NonincreasingInP) {
  auto w = a2_lazy();
  VolumeTable vt(w.rs, w.q);
  auto table = prepare_table(w.rs, w.q, w.walk);
  auto k = heat_recursive(table, w.walk, 40);
  const std::vector<double> ps = {1, 1.25, 1.5, 2, 3, 5, 10, kInfinity};
  for (std::size_t i = 1; i < ps.size(); ++i)
    EXPECT_LE(log_lp_norm(k, vt, ps[i]), log_lp_norm(k, vt, ps[i - 1]) + 1e-12) << ps[i];
}

TEST(Norms, RateFormulas) {
  auto t = lazy_tree();
  auto a = a2_lazy();
  for (int n : {2, 10, 100, 1000}) {
    EXPECT_NEAR(log_theoretical_rate(t.km, 1, n), 0, 1e-9);
    EXPECT_NEAR(log_theoretical_rate(a.km, 1, n), 0, 1e-9);
    EXPECT_NEAR(log_theoretical_rate(t.km, 2, n), -0.75 * std::log(n) + n * std::log(t.km.rho), 1e-9);
    EXPECT_NEAR(log_theoretical_rate(a.km, kInfinity, n), -4 * std::log(n) + n * std::log(a.km.rho), 1e-9);
    EXPECT_NEAR(log_theoretical_rate(a.km, 3, n), log_theoretical_rate(a.km, kInfinity, n), 1e-12);
  }
  // A1 p = 3/2: exponent −r/(2p') = −1/6
  EXPECT_NEAR(log_theoretical_rate(t.km, 1.5, 64) - 64 * log_step_scale(t.km, 1.5), -std::log(64.0) / 6, 1e-9);
  EXPECT_THROW(log_theoretical_rate(t.km, 2, 1), Error);
  EXPECT_THROW(log_theoretical_rate(t.km, 0.5, 10), Error);
}

TEST(Regions, DefaultsAndValidation) {
  auto a1 = build_root_system(Family::A1);
  auto a2 = build_root_system(Family::A2);
  EXPECT_DOUBLE_EQ(default_region(a1, 1).gamma, 0.1);
  EXPECT_DOUBLE_EQ(default_region(a1, 2).gamma, 0.225);
  EXPECT_DOUBLE_EQ(default_region(a2, 2).gamma, 0.075);
  EXPECT_DOUBLE_EQ(gamma_prime(a2, default_region(a2, 2)), 0.45);
  EXPECT_THROW(validate_region(a1, {1.5, 0.2, 2}), Error);
  EXPECT_THROW(validate_region(a1, {2, 0.25, 2}), Error);
  EXPECT_THROW(validate_region(a2, {2, 0.1, 2}), Error);
  EXPECT_THROW(validate_region(a2, {3, 0, 1}), Error);
  EXPECT_NO_THROW(validate_region(a2, {2, 0.08, 2}));

  // r_n = (log n)^2 grows faster than log n and slower than √n
  RegionSpec s = default_region(a2, kInfinity);
  EXPECT_NEAR(region_radius(s, 100), 21.2076, 1e-4);
  EXPECT_GT(region_radius(s, 1000000) / std::log(1e6), region_radius(s, 1000) / std::log(1e3));
  EXPECT_LT(region_radius(s, 1000000) / 1000, region_radius(s, 10000) / 100);
}

TEST(Regions, Enumeration) {
  auto w = a2_lazy();
  const auto& rs = w.rs;
  // p > 2: the ball |λ| ≤ (log 100)^2
  auto ball = critical_region(default_region(rs, 3), w.km, 100);
  std::size_t count = 0;
  for (const auto& l : dominant_box(2, 40))
    if (length(rs, l) <= std::pow(std::log(100.0), 2)) ++count;
  EXPECT_EQ(ball.size(), count);

  // p < 2: the rounded centre nδ_p belongs to the region
  for (double p : {1.0, 1.5}) {
    auto d = sp_delta_p(w.km, p).delta;
    for (int n : {50, 200}) {
      auto reg = critical_region(default_region(rs, p), w.km, n);
      LatticePoint c = lattice_point({static_cast<int>(std::lround(n * d[0])), static_cast<int>(std::lround(n * d[1]))});
      EXPECT_TRUE(std::binary_search(reg.begin(), reg.end(), c)) << p << " " << n;
    }
  }

  // p = 2, A1, n = 10^4, γ = 1/8: shell 10^{1.5} ≤ |λ| ≤ 10^{2.5}, wall margin ⟨λ,α⟩ ≥ n^{1/4} = 10
  auto t = lazy_tree();
  auto shell = critical_region({2, 0.125, 2}, t.km, 10000);
  const double unit = length(t.rs, pt(1));
  for (const auto& l : shell) {
    EXPECT_GE(length(t.rs, l), std::pow(10.0, 1.5) - 1e-9);
    EXPECT_LE(length(t.rs, l), std::pow(10.0, 2.5) + 1e-9);
  }
  const int lo = std::max(10, static_cast<int>(std::ceil(std::pow(10.0, 1.5) / unit - 1e-12)));
  const int hi = static_cast<int>(std::floor(std::pow(10.0, 2.5) / unit + 1e-12));
  EXPECT_EQ(static_cast<int>(shell.size()), hi - lo + 1);

  EXPECT_THROW(critical_region(default_region(rs, 2), w.km, 2), Error);
}

TEST(Norms, RateFitExamples) {
  auto t = lazy_tree();
  auto ts = series(t, 100, 400, 10);
  VolumeTable vt(t.rs, t.q);
  auto one = rate_fit(t.km, ts, 1, 100, 400);
  EXPECT_NEAR(one.slope, 0, 0.01);
  for (const auto& [n, k] : ts) EXPECT_NEAR(lp_norm(k, vt, 1), 1, 1e-6);
  EXPECT_NEAR(rate_fit(t.km, ts, 2, 100, 400).slope, -0.75, 0.05);
  EXPECT_NEAR(rate_fit(t.km, ts, 1.5, 100, 400).slope, -1.0 / 6, 0.05);

  auto a = a2_lazy();
  auto as = series(a, 60, 240, 6);
  auto inf = rate_fit(a.km, as, kInfinity, 60, 240);
  EXPECT_NEAR(inf.slope, -4, 0.3);
  EXPECT_GT(inf.slope, inf.plain_slope - 1);  // correction terms move the estimate toward −4
  EXPECT_LT(inf.slope, inf.plain_slope);
}

TEST(Norms, RegimeGapAtTwo) {
  auto t = lazy_tree();
  auto ts = series(t, 100, 400, 10);
  const double s2 = rate_fit(t.km, ts, 2, 100, 400).slope;
  const double s3 = rate_fit(t.km, ts, 3, 100, 400).slope;
  const double s5 = rate_fit(t.km, ts, 5, 100, 400).slope;
  const double si = rate_fit(t.km, ts, kInfinity, 100, 400).slope;
  EXPECT_LT(std::max({s3, s5, si}) - std::min({s3, s5, si}), 0.1);
  // p = 2 is neither the p→2⁻ limit −r/4 nor the p > 2 value −r/2−|Φ⁺⁺|
  EXPECT_GT(std::abs(s2 - (-0.25)), 3 * 0.05);
  EXPECT_GT(std::abs(s2 - (-1.5)), 3 * 0.05);
}

TEST(Concentration, OutsideRatiosDecay) {
  auto t = lazy_tree();
  VolumeTable vt(t.rs, t.q);
  auto table = prepare_table(t.rs, t.q, t.walk);
  const std::vector<int> times = {50, 100, 200, 400};
  auto ks = heat_recursive_at(table, t.walk, times);
  for (double p : {1.0, 1.5, 2.0, 3.0, kInfinity}) {
    auto spec = default_region(t.rs, p);
    double prev = 2;
    std::vector<double> x, y;
    for (int n : times) {
      auto rep = concentration_report(ks.at(n), vt, critical_region(spec, t.km, n), p);
      EXPECT_LT(rep.ratio, prev) << p << " " << n;
      EXPECT_LE(rep.inside, lp_norm(ks.at(n), vt, p) * (1 + 1e-12));
      prev = rep.ratio;
      x.push_back(std::log(n));
      y.push_back(std::log(rep.ratio));
    }
    if (p == 2) EXPECT_LE(fit_line(x, y).slope, -spec.gamma * 1 + 0.05);
  }
}

TEST(Concentration, SupEnvelope) {
  // outside ℓ^∞ mass against C·e^{−c r_n} with (C, c) fitted on the schedule
  auto a = a2_lazy();
  VolumeTable vt(a.rs, a.q);
  auto table = prepare_table(a.rs, a.q, a.walk);
  const std::vector<int> times = {50, 100, 200, 400};
  auto ks = heat_recursive_at(table, a.walk, times);
  auto spec = default_region(a.rs, kInfinity);
  std::vector<double> r, y;
  for (int n : times) {
    auto rep = concentration_report(ks.at(n), vt, critical_region(spec, a.km, n), kInfinity);
    r.push_back(region_radius(spec, n));
    y.push_back(std::log(rep.ratio));
  }
  auto f = fit_line(r, y);
  EXPECT_LT(f.slope, 0);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_LE(y[i], f.intercept + f.max_residual + f.slope * r[i] + 1e-12);
}
