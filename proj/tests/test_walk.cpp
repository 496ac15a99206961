#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "hkb/error.hpp"
#include "hkb/walk.hpp"

using namespace hkb;

namespace {

WalkSpec walk_of(std::initializer_list<std::pair<LatticePoint, Rational>> items) {
  WalkSpec w;
  for (const auto& [l, c] : items) w.coeffs[l] = c;
  return w;
}

KappaModel tree_walk(int q) {
  auto rs = build_root_system(Family::A1);
  return build_kappa(rs, uniform_qparams(rs, q), walk_of({{unit_point(0), 1}}));
}

KappaModel lazy_tree_walk() {
  auto rs = build_root_system(Family::A1);
  return build_kappa(rs, uniform_qparams(rs, 2), walk_of({{LatticePoint{}, Rational(1, 10)}, {unit_point(0), Rational(9, 10)}}));
}

KappaModel a2_walk() {
  auto rs = build_root_system(Family::A2);
  return build_kappa(rs, uniform_qparams(rs, 2), walk_of({{unit_point(0), 1}}));
}

KappaModel a2_lazy_symmetric() {
  auto rs = build_root_system(Family::A2);
  return build_kappa(rs, uniform_qparams(rs, 2),
                     walk_of({{LatticePoint{}, Rational(1, 10)}, {unit_point(0), Rational(9, 20)}, {unit_point(1), Rational(9, 20)}}));
}

KappaModel b2_walk() {
  auto rs = build_root_system(Family::B2);
  QParams q = uniform_qparams(rs, 3);
  return build_kappa(rs, q, walk_of({{unit_point(0), Rational(1, 2)}, {unit_point(1), Rational(1, 2)}}));
}

std::vector<KappaModel> all_walks() { return {tree_walk(2), lazy_tree_walk(), a2_walk(), a2_lazy_symmetric(), b2_walk()}; }

// Return probabilities of the nearest-neighbour walk on the (q+1)-regular tree via the distance chain.
std::vector<double> tree_returns(int q, int steps) {
  std::vector<double> dist(steps + 2, 0.0), out;
  dist[0] = 1;
  for (int n = 0; n < steps; ++n) {
    std::vector<double> next(steps + 2, 0.0);
    next[1] += dist[0];
    for (int d = 1; d <= steps; ++d) {
      next[d - 1] += dist[d] / (q + 1.0);
      next[d + 1] += dist[d] * q / (q + 1.0);
    }
    dist = next;
    out.push_back(dist[0]);
  }
  return out;
}

}  // namespace

TEST(Kappa, TreeSpectralRadius) {
  auto km = tree_walk(2);
  EXPECT_NEAR(km.rho, 2 * std::sqrt(2.0) / 3, 1e-14);
  auto ret = tree_returns(2, 4002);
  // p_{2n+2}/p_{2n} → ρ² with relative correction 3/(2n)
  double ratio = ret[4001] / ret[3999];
  double n = 2000;
  EXPECT_NEAR(ratio / (km.rho * km.rho), 1.0 - 1.5 / n, 1e-5);
  EXPECT_NEAR(km.kappa_poly.eval(DVec{0.0}), 1.0, 1e-12);
}

TEST(Kappa, LazyIdentity) {
  auto rs = build_root_system(Family::A2);
  auto km = build_kappa(rs, uniform_qparams(rs, 2), walk_of({{LatticePoint{}, 1}}));
  EXPECT_NEAR(km.rho, 1.0, 1e-15);
  EXPECT_NEAR(km.kappa_poly.eval(DVec{0.3, -0.7}), 1.0, 1e-15);
  EXPECT_TRUE(km.B0.empty());
  try {
    hessian(km, {0.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateDirection);
  }
}

TEST(Kappa, TreeClosedFormAlongEta) {
  auto km = tree_walk(2);
  for (int k = 0; k <= 20; ++k) {
    double t = k / 20.0;
    // κ(z) = cosh⟨z,λ1⟩ and ⟨η,λ1⟩ = (log 2)/2
    double expect = std::cosh(t * std::log(2.0) / 2);
    EXPECT_NEAR(km.kappa_poly.eval(DVec{t * hkb::eta(km.rs, km.q)[0]}), expect, 1e-13);
  }
}

TEST(Kappa, InvariantsAllWalks) {
  for (const auto& km : all_walks()) {
    auto e = hkb::eta(km.rs, km.q);
    EXPECT_NEAR(km.kappa_poly.eval(DVec(km.rs.rank, 0.0)), 1.0, 1e-12);
    EXPECT_NEAR(km.kappa_poly.eval(e), 1.0 / km.rho, 1e-10);
    for (const auto& [v, c] : km.kappa_poly.terms) EXPECT_GT(c, 0);
    double ground = 0;
    for (const auto& [l, c] : km.walk.coeffs) ground += c.get_d() * ground_state(km.rs, km.q, l);
    EXPECT_NEAR(km.rho, ground, 1e-12);
  }
}

TEST(Kappa, MonotoneAlongEta) {
  for (const auto& km : all_walks()) {
    auto e = hkb::eta(km.rs, km.q);
    double prev = 0;
    for (int k = 0; k < 50; ++k) {
      DVec x(e.size());
      for (std::size_t i = 0; i < e.size(); ++i) x[i] = e[i] * k / 49.0;
      double v = km.kappa_poly.eval(x);
      if (k > 0) EXPECT_GT(v, prev);
      prev = v;
    }
    for (double p : {1.01, 1.25, 1.5, 4.0 / 3.0, 1.9, 2.0}) {
      auto sp = sp_delta_p(km, p);
      EXPECT_LT(km.kappa_poly.eval(sp.s), 1.0 / km.rho);
    }
  }
}

TEST(Kappa, TorusModulus) {
  for (const auto& km : {lazy_tree_walk(), a2_lazy_symmetric()}) {
    auto grid = build_grid(km.rs, km.q, km.rs.rank == 1 ? 256 : 64);
    double mx = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CVec z(km.rs.rank);
      for (int i = 0; i < km.rs.rank; ++i) z[i] = {0, grid.nodes[k][i]};
      double m = std::abs(km.kappa(z));
      EXPECT_LT(m, 1.0);
      mx = std::max(mx, m);
    }
    EXPECT_GT(mx, 0.99);
  }
}

TEST(Hessian, FiniteDifferencesAndPairwise) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& km : all_walks()) {
    const int r = km.rs.rank;
    for (int t = 0; t < 20; ++t) {
      DVec x(r);
      for (auto& v : x) v = u(rng);
      auto h = hessian(km, x);
      auto hp = hessian_pairwise(km, x);
      const double step = 1e-4;
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) {
          auto shifted = [&](double da, double db) {
            DVec y = x;
            y[a] += da;
            y[b] += db;
            return km.log_kappa(y);
          };
          double fd = (shifted(step, step) - shifted(step, -step) - shifted(-step, step) + shifted(-step, -step)) /
                      (4 * step * step);
          EXPECT_NEAR(h[a][b], fd, 1e-6);
          EXPECT_NEAR(h[a][b], hp[a][b], 1e-12);
          EXPECT_DOUBLE_EQ(h[a][b], h[b][a]);
        }
      EXPECT_GT(det(h), 0);
    }
  }
  auto km = tree_walk(2);
  EXPECT_GT(quad_form(km.B0, {1.0}), 0);
}

TEST(Saddle, OriginAndEta) {
  for (const auto& km : all_walks()) {
    auto sd = saddle(km, DVec(km.rs.rank, 0.0));
    for (double v : sd.s) EXPECT_NEAR(v, 0.0, 1e-12);
    EXPECT_NEAR(sd.phi, 0.0, 1e-14);
  }
  auto km = tree_walk(2);
  auto d1 = sp_delta_p(km, 1.0);
  auto sd = saddle(km, d1.delta);
  EXPECT_NEAR(sd.s[0], hkb::eta(km.rs, km.q)[0], 1e-10);
  auto g = km.grad_log_kappa(sd.s);
  EXPECT_LE(std::abs(g[0] - d1.delta[0]), 1e-12);
  EXPECT_THROW(saddle(km, {1.5}), Error);
  try {
    saddle(km, {1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutsideHull);
  }
}

TEST(Saddle, QuadraticApproximationNearZero) {
  for (const auto& km : all_walks()) {
    const int r = km.rs.rank;
    DMat bi = inverse(km.B0);
    DVec dir(r, 0.0);
    dir[0] = 0.6;
    if (r == 2) dir[1] = 0.3;
    std::vector<double> xs, ys;
    for (int k = 0; k < 6; ++k) {
      double h = 0.05 * std::pow(0.5, k);
      DVec d(r);
      for (int i = 0; i < r; ++i) d[i] = h * dir[i];
      double err = std::abs(saddle(km, d).phi - 0.5 * quad_form(bi, d));
      xs.push_back(std::log(h));
      ys.push_back(std::log(err));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    EXPECT_GE(sxy / sxx, 2.9) << family_name(km.rs.family);
  }
}

TEST(Saddle, LegendreDualityAndQuadraticGrowth) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& km : all_walks()) {
    const int r = km.rs.rank;
    int done = 0;
    while (done < 50) {
      DVec d(r);
      for (auto& v : d) v = 1.5 * u(rng);
      if (hull_margin(km, d) < 0.05) continue;
      auto sd = saddle(km, d);
      EXPECT_GE(sd.phi, 0);
      for (int i = 0; i < r; ++i) {
        const double h = 1e-5;
        DVec a = d, b = d;
        a[i] += h;
        b[i] -= h;
        double fd = (saddle(km, a).phi - saddle(km, b).phi) / (2 * h);
        EXPECT_NEAR(fd, sd.s[i], 1e-5);
      }
      ++done;
    }
    // φ(δ)/|δ|² over a radial sweep
    double lo = 1e300, hi = 0;
    for (int dir = 0; dir < 12; ++dir) {
      double ang = 2 * M_PI * dir / 12;
      DVec unit = r == 1 ? DVec{dir % 2 ? 1.0 : -1.0} : DVec{std::cos(ang), std::sin(ang)};
      double scale = 0.01;
      while (hull_margin(km, {scale * unit[0], r == 2 ? scale * unit[1] : 0.0}) > 0) scale *= 1.01;
      for (int k = 1; k <= 20; ++k) {
        DVec d(r);
        for (int i = 0; i < r; ++i) d[i] = 0.8 * scale / 1.01 * k / 20.0 * unit[i];
        double val = saddle(km, d).phi / std::pow(km.rs.norm(d), 2);
        lo = std::min(lo, val);
        hi = std::max(hi, val);
      }
    }
    EXPECT_GT(lo, 0);
    EXPECT_LT(hi / lo, 50);
  }
}

TEST(DeltaP, Examples) {
  auto km = tree_walk(2);
  auto e = hkb::eta(km.rs, km.q);
  EXPECT_EQ(sp_delta_p(km, 2.0).s[0], 0.0);
  EXPECT_EQ(sp_delta_p(km, std::numeric_limits<double>::infinity()).s[0], 0.0);
  EXPECT_NEAR(sp_delta_p(km, 1.0).s[0], e[0], 1e-15);
  EXPECT_NEAR(sp_delta_p(km, 4.0 / 3.0).s[0], 0.5 * std::log(2.0) / 2, 1e-15);
  for (const auto& k : all_walks())
    for (double p : {1.0, 1.2, 1.5, 1.8})
      EXPECT_GT(hull_margin(k, sp_delta_p(k, p).delta), 0);
  EXPECT_THROW(sp_delta_p(km, 0.5), Error);
}

TEST(Walk, JsonAndValidation) {
  auto rs = build_root_system(Family::A2);
  auto j = nlohmann::json::parse(R"({"coeffs":[{"lambda":[1,0],"c":"1/2"},{"lambda":[0,1],"c":"1/2"}]})");
  auto w = WalkSpec::from_json(j, 2);
  EXPECT_NO_THROW(validate_walk(rs, w));
  EXPECT_EQ(WalkSpec::from_json(w.to_json(2), 2).coeffs, w.coeffs);
  auto bad = nlohmann::json::parse(R"({"coeffs":[{"lambda":[1,0],"c":"1/2"}]})");
  EXPECT_THROW(validate_walk(rs, WalkSpec::from_json(bad, 2)), Error);
  auto neg = nlohmann::json::parse(R"({"coeffs":[{"lambda":[-1,1],"c":"1"}]})");
  EXPECT_THROW(validate_walk(rs, WalkSpec::from_json(neg, 2)), Error);
  auto extra = nlohmann::json::parse(R"({"coeffs":[],"x":1})");
  EXPECT_THROW(WalkSpec::from_json(extra, 2), Error);
}

TEST(Hull, Shapes) {
  auto km = a2_walk();
  EXPECT_EQ(km.hull.size(), 3u);
  EXPECT_GT(hull_margin(km, {0.0, 0.0}), 0);
  auto t = tree_walk(2);
  ASSERT_EQ(t.hull.size(), 2u);
  EXPECT_NEAR(hull_margin(t, {0.0}), std::sqrt(t.rs.gram[0][0].get_d()), 1e-15);
}
