#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hkb/caloric.hpp"
#include "hkb/error.hpp"

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

Walker tree(int q = 2) { return make(Family::A1, q, walk_of({{pt(1), 1}})); }
Walker lazy_tree() { return make(Family::A1, 2, walk_of({{pt(0), Rational(1, 10)}, {pt(1), Rational(9, 10)}})); }
Walker a2_walk(int q = 2) { return make(Family::A2, q, walk_of({{pt(1, 0), 1}})); }
Walker a2_lazy() {
  return make(Family::A2, 2, walk_of({{pt(0, 0), Rational(1, 10)}, {pt(1, 0), Rational(9, 20)}, {pt(0, 1), Rational(9, 20)}}));
}

// z = tη + iθ with t ∈ [−1,1] and θ uniform on the torus
CVec strip_point(const Walker& w, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> t(-1, 1), th(-M_PI, M_PI);
  auto e = eta(w.rs, w.q);
  const double tt = t(gen);
  CVec z(w.rs.rank);
  for (int i = 0; i < w.rs.rank; ++i) z[i] = {tt * e[i], th(gen)};
  return z;
}

double l1(const RadialFunction& f) {
  double s = 0;
  for (const auto& [l, a] : f.mass) s += std::abs(a);
  return s;
}

double max_abs_diff(const RadialFunction& a, const RadialFunction& b) {
  double worst = 0;
  for (const auto& [l, m] : a.mass) worst = std::max(worst, std::abs(m - b.mass_at(l)));
  for (const auto& [l, m] : b.mass) worst = std::max(worst, std::abs(m - a.mass_at(l)));
  return worst;
}

double slope(const std::map<int, double>& series) {
  std::vector<double> x, y;
  for (const auto& [n, v] : series) {
    x.push_back(std::log(n));
    y.push_back(std::log(v));
  }
  return fit_line(x, y).slope;
}

}  // namespace

TEST(Helgason, DeltaAndKernels) {
  std::mt19937_64 gen(7);
  for (auto w : {lazy_tree(), a2_lazy()}) {
    SphericalCache sph(w.rs, w.q);
    auto d0 = delta_profile(w.rs, w.q, LatticePoint{});
    for (int i = 0; i < 5; ++i) EXPECT_NEAR(std::abs(helgason_radial(sph, d0, strip_point(w, gen)) - 1.0), 0, 1e-14);
    // symmetric walks: ℋk_n(iθ) = (ρκ(iθ))^n
    auto table = prepare_table(w.rs, w.q, w.walk);
    auto kn = heat_recursive(table, w.walk, 12);
    for (int i = 0; i < 10; ++i) {
      CVec z = strip_point(w, gen);
      for (auto& c : z) c = {0, c.imag()};
      EXPECT_LT(std::abs(helgason_radial(sph, kn, z) - std::pow(w.km.rho_kappa(z), 12)), 1e-8);
    }
  }
}

TEST(Helgason, StripBoundAndDomain) {
  std::mt19937_64 gen(11);
  auto w = a2_walk();
  SphericalCache sph(w.rs, w.q);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = random_profile(w.rs, w.q, 2.5, false, 100 + trial);
    const CVec z = strip_point(w, gen);
    EXPECT_LE(std::abs(helgason_radial(sph, f, z)), l1(f) * (1 + 1e-12));
  }
  auto e = eta(w.rs, w.q);
  auto d0 = delta_profile(w.rs, w.q, LatticePoint{});
  EXPECT_THROW(helgason_radial(sph, d0, {{1.5 * e[0], 0}, {1.5 * e[1], 0}}), Error);
  EXPECT_NO_THROW(helgason_radial(sph, d0, {{e[0], 0.3}, {e[1], 0}}));
}

TEST(Helgason, MultiplierIdentity) {
  // ℋ(A^n f)(z) = ℋf(z)·(ρκ(−z))^n; on a non-symmetric walk this differs from (ρκ(z))^n
  auto w = a2_walk();
  SphericalCache sph(w.rs, w.q);
  auto grid = build_grid(w.rs, w.q, 32);
  auto table = prepare_table(w.rs, w.q, w.walk);
  auto f = combine(1, delta_profile(w.rs, w.q, pt(0, 0)), -0.5, delta_profile(w.rs, w.q, pt(1, 1)));
  auto u = evolve(table, w.walk, f, {6}).at(6).profile;
  auto hu = helgason_on_grid(sph, grid, u);
  auto hf = helgason_on_grid(sph, grid, f);
  double worst = 0, asym = 0;
  CVec z(2), mz(2);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (int i = 0; i < 2; ++i) {
      z[i] = {0, grid.nodes[k][i]};
      mz[i] = -z[i];
    }
    worst = std::max(worst, std::abs(hu[k] - hf[k] * std::pow(w.km.rho_kappa(mz), 6)));
    asym = std::max(asym, std::abs(hu[k] - hf[k] * std::pow(w.km.rho_kappa(z), 6)));
  }
  EXPECT_LT(worst, 1e-8);
  EXPECT_GT(asym, 1e-3);
}

TEST(Mass, Examples) {
  auto t = tree();
  SphericalCache sph(t.rs, t.q);
  EXPECT_NEAR(mass(sph, delta_profile(t.rs, t.q, pt(1)), 2), 2 * std::sqrt(2.0), 1e-12);
  auto a = a2_lazy();
  SphericalCache sa(a.rs, a.q);
  for (double p : {1.0, 1.25, 1.5, 2.0, 3.0, kInfinity}) {
    EXPECT_NEAR(mass(sph, delta_profile(t.rs, t.q, pt(0)), p), 1, 1e-14);
    EXPECT_NEAR(mass(sa, delta_profile(a.rs, a.q, pt(0, 0)), p), 1, 1e-14);
  }
  for (int seed = 0; seed < 5; ++seed) {
    auto f = random_profile(a.rs, a.q, 3, true, seed);
    EXPECT_NEAR(mass(sa, f, 1) / l1(f), 1, 1e-12);
  }
  // mass is nonincreasing from p = 1 down to p = 2 for nonnegative data (P_λ(s) grows with |s| on the segment)
  auto f = random_profile(a.rs, a.q, 3, true, 42);
  EXPECT_GT(mass(sa, f, 1), mass(sa, f, 1.5));
  EXPECT_GT(mass(sa, f, 1.5), mass(sa, f, 2));
  EXPECT_NEAR(mass(sa, f, 2), mass(sa, f, kInfinity), 0);
}

TEST(Evolve, HandConvolutionAndLinearity) {
  auto w = lazy_tree();
  auto table = prepare_table(w.rs, w.q, w.walk);
  // A_1 A_1 = A_0/3 + 2A_2/3 on the q = 2 tree; sphere 1 carries mass 3
  auto u1 = evolve_exact(table, w.walk, exact_delta_profile(w.rs, w.q, pt(1)), 1)[1];
  EXPECT_EQ(u1.mass.at(pt(0)), Rational(9, 10));
  EXPECT_EQ(u1.mass.at(pt(1)), Rational(3, 10));
  EXPECT_EQ(u1.mass.at(pt(2)), Rational(9, 5));

  auto d0 = delta_profile(w.rs, w.q, pt(0));
  auto u = evolve(table, w.walk, d0, {0, 7, 25});
  auto k = heat_recursive_at(table, w.walk, {0, 7, 25});
  for (int n : {0, 7, 25}) EXPECT_EQ(max_abs_diff(u.at(n).profile, k.at(n)), 0);

  auto a = a2_lazy();
  auto ta = prepare_table(a.rs, a.q, a.walk);
  auto f = delta_profile(a.rs, a.q, pt(0, 0));
  auto g = delta_profile(a.rs, a.q, pt(1, 0));
  auto sum = evolve(ta, a.walk, combine(1, f, 1, g), {15}).at(15).profile;
  auto uf = evolve(ta, a.walk, f, {15}).at(15).profile;
  auto ug = evolve(ta, a.walk, g, {15}).at(15).profile;
  EXPECT_LT(max_abs_diff(sum, combine(1, uf, 1, ug)), 1e-12);
  EXPECT_NEAR(sum.total_mass(), 1 + n_lambda(a.rs, a.q, pt(1, 0)).get_d(), 1e-9);
}

TEST(Evolve, SpectralRouteAgrees) {
  for (auto w : {lazy_tree(), a2_walk()}) {
    SphericalCache sph(w.rs, w.q);
    auto grid = build_grid(w.rs, w.q, 64);
    auto table = prepare_table(w.rs, w.q, w.walk);
    RadialFunction f = w.rs.rank == 1 ? combine(1, delta_profile(w.rs, w.q, pt(2)), 0.25, delta_profile(w.rs, w.q, pt(0)))
                                      : combine(1, delta_profile(w.rs, w.q, pt(1, 1)), -2, delta_profile(w.rs, w.q, pt(0, 1)));
    for (int n : {1, 6}) {
      auto rec = evolve(table, w.walk, f, {n}).at(n).profile;
      auto spec = evolve_spectral(sph, w.km, grid, f, n).profile;
      for (const auto& [l, m] : spec.mass) EXPECT_NEAR(m, rec.mass_at(l), 1e-9 * (1 + std::abs(rec.mass_at(l)))) << n;
    }
  }
}

TEST(Convolution, CommutativeExactly) {
  auto a = a2_walk();
  StructureTable table(a.rs, a.q);
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> coeff(-8, 8);
  auto pts = dominant_ball(a.rs, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    ExactRadial f, g;
    f.rank = g.rank = 2;
    for (const auto& l : pts) {
      f.mass[l] = Rational(coeff(gen), 8) * n_lambda(a.rs, a.q, l);
      g.mass[l] = Rational(coeff(gen), 8) * n_lambda(a.rs, a.q, l);
    }
    auto fg = convolve_exact(table, f, g);
    auto gf = convolve_exact(table, g, f);
    EXPECT_EQ(fg.mass, gf.mass);
    EXPECT_EQ(fg.total_mass(), f.total_mass() * g.total_mass());
  }
}

TEST(Convergence, DeltaOriginAndScaling) {
  auto w = lazy_tree();
  auto table = prepare_table(w.rs, w.q, w.walk);
  VolumeTable vt(w.rs, w.q);
  SphericalCache sph(w.rs, w.q);
  const std::vector<int> times = {20, 40, 80};
  auto k = heat_recursive_at(table, w.walk, times);
  auto d0 = delta_profile(w.rs, w.q, pt(0));
  for (double p : {1.0, 2.0, kInfinity})
    for (const auto& [n, e] : convergence_error(evolve(table, w.walk, d0, times), k, mass(sph, d0, p), p, vt))
      EXPECT_EQ(e, 0) << n;

  auto f = combine(1, delta_profile(w.rs, w.q, pt(2)), 0.5, delta_profile(w.rs, w.q, pt(1)));
  const double c = -3.5;
  auto cf = combine(c, f, 0, f);
  for (double p : {1.0, 1.5, 2.0, kInfinity}) {
    const double m = mass(sph, f, p), cm = mass(sph, cf, p);
    auto e = convergence_error(evolve(table, w.walk, f, times), k, m, p, vt);
    auto ce = convergence_error(evolve(table, w.walk, cf, times), k, cm, p, vt);
    for (int n : times) {
      EXPECT_NEAR(ce.at(n), std::abs(c) * e.at(n), 1e-12 * e.at(n));
      EXPECT_NEAR(ce.at(n) / (l1(cf) + std::abs(cm)), e.at(n) / (l1(f) + std::abs(m)), 1e-12);
    }
  }
}

TEST(Convergence, RatesOnLazyTree) {
  auto w = lazy_tree();
  auto table = prepare_table(w.rs, w.q, w.walk);
  VolumeTable vt(w.rs, w.q);
  SphericalCache sph(w.rs, w.q);
  const std::vector<int> times = {50, 100, 200, 400};
  auto k = heat_recursive_at(table, w.walk, times);
  auto f = delta_profile(w.rs, w.q, pt(2));
  auto u = evolve(table, w.walk, f, times);
  EXPECT_LE(slope(convergence_error(u, k, mass(sph, f, 1), 1, vt)), -0.4);
  EXPECT_LE(slope(convergence_error(u, k, mass(sph, f, 2), 2, vt)), -0.2);
  EXPECT_LE(slope(convergence_error(u, k, mass(sph, f, kInfinity), kInfinity, vt)), -0.8);

  // region split: δ0 reproduces the concentration report, p = 2 inside error follows n^{−1/2+γ}
  for (int n : times) {
    auto reg = critical_region(default_region(w.rs, 1), w.km, n);
    auto split = region_split_error(k.at(n), k.at(n), 1, 1, reg, vt);
    EXPECT_EQ(split.inside_err, 0);
    EXPECT_NEAR(split.outside_u, concentration_report(k.at(n), vt, reg, 1).ratio, 1e-15);
  }
  std::map<int, double> inside2, outside1;
  for (int n : times) {
    auto s2 = default_region(w.rs, 2);
    inside2[n] = region_split_error(u.at(n).profile, k.at(n), mass(sph, f, 2), 2, critical_region(s2, w.km, n), vt).inside_err;
    outside1[n] = region_split_error(u.at(n).profile, k.at(n), mass(sph, f, 1), 1,
                                     critical_region(default_region(w.rs, 1), w.km, n), vt).outside_u;
  }
  EXPECT_LE(slope(inside2), -0.5 + default_region(w.rs, 2).gamma + 0.05);
  double prev = 1e300;
  for (const auto& [n, v] : outside1) {
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Weighted, Membership) {
  auto t = tree();
  VolumeTable vt(t.rs, t.q);
  auto f = random_profile(t.rs, t.q, 5, false, 3);
  auto m = weighted_membership(vt, f, 1.5);
  EXPECT_TRUE(m.member);
  double direct = 0;
  for (const auto& [l, a] : f.mass) direct += std::abs(a) * std::exp((2 / 1.5) * vt.log_chi0_half(l));
  EXPECT_NEAR(m.norm / direct, 1, 1e-12);

  auto decay = [&](double c) { return [&vt, c](const LatticePoint& l) { return -c * vt.log_chi0_half(l); }; };
  // e^{−3⟨η,λ⟩}: summable with weight 1 but in no ℓ¹(w_p)
  for (double p : {1.0, 1.5, 2.0, kInfinity}) EXPECT_FALSE(weighted_membership(t.rs, vt, decay(3), p, 80).member) << p;
  // e^{−4⟨η,λ⟩}: member for every p > 1, borderline divergent at p = 1
  EXPECT_FALSE(weighted_membership(t.rs, vt, decay(4), 1, 80).member);
  for (double p : {1.25, 1.5, 2.0, 3.0, kInfinity}) EXPECT_TRUE(weighted_membership(t.rs, vt, decay(4), p, 80).member) << p;
}

TEST(Weighted, TruncationLift) {
  // |M_p(f_R) − M_p(f_R')| ≤ Σ_{R<|λ|≤R'} N_λ|f(λ)| since P_λ(s_p) ≤ 1
  auto a = a2_lazy();
  VolumeTable vt(a.rs, a.q);
  SphericalCache sph(a.rs, a.q);
  auto profile = [&](int radius) {
    RadialFunction f;
    f.rank = 2;
    for (const auto& l : dominant_box(2, radius, true)) f.mass[l] = std::exp(vt.log_n(l) - 2.5 * vt.log_chi0_half(l));
    return f;
  };
  for (double p : {1.5, 2.0}) {
    const auto big = profile(16);
    for (int r : {4, 8, 12}) {
      const auto small = profile(r);
      double tail = 0;
      for (const auto& [l, m] : big.mass)
        if (!small.mass.count(l)) tail += m;
      EXPECT_LE(std::abs(mass(sph, big, p) - mass(sph, small, p)), tail * (1 + 1e-12));
    }
  }
}

TEST(Appendix, HerzInequality) {
  auto t = tree();
  auto ta = StructureTable(t.rs, t.q);
  SphericalCache st(t.rs, t.q);
  auto f = random_profile(t.rs, t.q, 4, false, 9);
  EXPECT_GE(herz_check(ta, st, f, delta_profile(t.rs, t.q, pt(0)), 1.5), -1e-12);
  EXPECT_LT(herz_check(ta, st, f, delta_profile(t.rs, t.q, pt(0)), 1.5), 1e-12);
  for (int s = 0; s < 20; ++s) {
    auto g = random_profile(t.rs, t.q, 6, true, 1000 + s);
    auto K = random_profile(t.rs, t.q, 6, true, 2000 + s);
    EXPECT_GE(herz_check(ta, st, g, K, 1.5), -1e-12) << s;
  }
  auto a = a2_walk();
  StructureTable tb(a.rs, a.q);
  SphericalCache sa(a.rs, a.q);
  for (int s = 0; s < 10; ++s) {
    auto g = random_profile(a.rs, a.q, 2.5, false, 3000 + s);
    auto K = random_profile(a.rs, a.q, 2.5, false, 4000 + s);
    EXPECT_GE(herz_check(tb, sa, g, K, 2), -1e-12) << s;
  }
  EXPECT_THROW(herz_check(ta, st, f, f, 1), Error);
}

TEST(Appendix, KunzeStein) {
  auto t = tree();
  StructureTable table(t.rs, t.q);
  std::map<LatticePoint, double> cache;
  auto c43 = ground_state_norm(t.rs, t.q, 4.0 / 3, 1e-6, 160, &cache);
  auto c32 = ground_state_norm(t.rs, t.q, 1.5, 1e-6, 160, &cache);
  EXPECT_GE(c43.head, 1);
  EXPECT_GT(c32.head, c43.head);  // p' closer to 2 means a slower-decaying series
  EXPECT_LE(c43.tail_bound, 1e-6 * std::pow(c43.head, 4));
  EXPECT_THROW(ground_state_norm(t.rs, t.q, 1.5, 1e-6, 10, &cache), Error);
  EXPECT_THROW(ground_state_norm(t.rs, t.q, 2, 1e-6, 160, &cache), Error);

  auto f = random_profile(t.rs, t.q, 5, false, 17);
  EXPECT_GE(kunze_stein_check(table, c43, f, delta_profile(t.rs, t.q, pt(0)), 4.0 / 3), -1e-12);
  for (int s = 0; s < 20; ++s) {
    auto g = random_profile(t.rs, t.q, 6, false, 5000 + s);
    auto K = random_profile(t.rs, t.q, 6, false, 6000 + s);
    EXPECT_GE(kunze_stein_check(table, c43, g, K, 4.0 / 3), -1e-12) << s;
  }
}
