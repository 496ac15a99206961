#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "hkb/error.hpp"
#include "hkb/rootsys.hpp"

using namespace hkb;

namespace {

const Family kAll[] = {Family::A1, Family::A2, Family::B2, Family::C2, Family::G2, Family::BC1, Family::BC2};

QParams sample_q(const RootSystemData& rs) {
  if (rs.family == Family::BC1) return make_qparams(rs, {{0, 2}, {1, 3}});
  if (rs.family == Family::BC2) return make_qparams(rs, {{0, 2}, {1, 4}, {2, 3}});
  if (rs.family == Family::B2 || rs.family == Family::C2 || rs.family == Family::G2) {
    // two orbits of simple roots; label 0 follows the highest root
    std::map<int, Rational> m;
    int top = rs.pos_roots.back().orbit;
    for (int i = 1; i <= rs.rank; ++i) m[i] = (i == top) ? 3 : 2;
    for (int i = 1; i <= rs.rank; ++i)
      for (const auto& pr : rs.pos_roots)
        if (pr.cartesian == rs.simple_roots[i - 1]) m[i] = (pr.orbit == top) ? 3 : 2;
    m[0] = 3;
    return make_qparams(rs, m);
  }
  return uniform_qparams(rs, 2);
}

}  // namespace

TEST(RootSystem, SizesAndOrders) {
  auto a1 = build_root_system(Family::A1);
  EXPECT_EQ(a1.rank, 1);
  EXPECT_EQ(a1.num_pos(), 1);
  EXPECT_EQ(a1.order(), 2);
  auto a2 = build_root_system(Family::A2);
  EXPECT_EQ(a2.num_indivisible(), 3);
  EXPECT_EQ(a2.order(), 6);
  auto bc2 = build_root_system(Family::BC2);
  EXPECT_EQ(bc2.num_pos(), 6);
  EXPECT_EQ(bc2.num_indivisible(), 4);
  EXPECT_EQ(build_root_system(Family::B2).order(), 8);
  EXPECT_EQ(build_root_system(Family::C2).order(), 8);
  EXPECT_EQ(build_root_system(Family::G2).order(), 12);
  EXPECT_EQ(build_root_system(Family::G2).num_pos(), 6);
  EXPECT_EQ(build_root_system(Family::BC1).order(), 2);
  EXPECT_EQ(build_root_system(Family::BC1).num_pos(), 2);
}

TEST(RootSystem, DualBasisAndWeylInvariance) {
  for (Family f : kAll) {
    auto rs = build_root_system(f);
    for (int i = 0; i < rs.rank; ++i)
      for (int j = 0; j < rs.rank; ++j) {
        Rational s = 0;
        for (int k = 0; k < rs.dim; ++k) s += rs.coweights[i][k] * rs.simple_roots[j][k];
        EXPECT_EQ(s, Rational(i == j ? 1 : 0)) << family_name(f);
      }
    // lengths: exactly one element of length 0, longest element maps Φ⁺⁺ to −Φ⁺⁺
    int zero_len = 0;
    for (const auto& w : rs.weyl) zero_len += w.length == 0;
    EXPECT_EQ(zero_len, 1);
    EXPECT_EQ(static_cast<int>(rs.weyl[rs.w0].inversions.size()), rs.num_indivisible()) << family_name(f);
    for (const auto& w : rs.weyl) EXPECT_EQ(static_cast<int>(w.inversions.size()), w.length) << family_name(f);
    // Gram-based inner products agree with Cartesian ones
    std::mt19937 gen(7);
    std::uniform_int_distribution<int> d(-5, 5);
    for (int t = 0; t < 20; ++t) {
      LatticePoint a, b;
      for (int i = 0; i < rs.rank; ++i) {
        a[i] = d(gen);
        b[i] = d(gen);
      }
      auto ca = rs.to_cartesian(a), cb = rs.to_cartesian(b);
      Rational s = 0;
      for (int k = 0; k < rs.dim; ++k) s += ca[k] * cb[k];
      EXPECT_EQ(s, rs.inner(a, b));
      // the integer action matches the Cartesian one
      for (int w = 0; w < rs.order(); ++w) {
        auto wa = rs.act(w, a);
        auto cwa = rs.to_cartesian(wa);
        for (int k = 0; k < rs.dim; ++k) {
          Rational x = 0;
          for (int m = 0; m < rs.dim; ++m) x += rs.weyl[w].cartesian[k][m] * ca[m];
          EXPECT_EQ(x, cwa[k]);
        }
      }
    }
  }
}

TEST(RootSystem, NonReducedStructureOnlyForBC) {
  for (Family f : kAll) {
    auto rs = build_root_system(f);
    bool any_double = false;
    for (const auto& pr : rs.pos_roots)
      if (pr.twice >= 0) {
        any_double = true;
        const auto& tw = rs.pos_roots[pr.twice];
        for (int k = 0; k < rs.dim; ++k) EXPECT_EQ(tw.cartesian[k] / 2, pr.cartesian[k]);
      }
    EXPECT_EQ(any_double, is_bc(f)) << family_name(f);
  }
}

TEST(QParams, RejectsThinAndInconsistent) {
  auto a2 = build_root_system(Family::A2);
  try {
    make_qparams(a2, {{0, 1}, {1, 1}, {2, 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidParameters);
  }
  EXPECT_THROW(make_qparams(a2, {{0, 2}, {1, 3}, {2, 2}}), Error);
  auto bc1 = build_root_system(Family::BC1);
  try {
    make_qparams(bc1, {{0, 4}, {1, 2}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ExceptionalCaseUnsupported);
  }
  EXPECT_NO_THROW(make_qparams(bc1, {{0, 2}, {1, 4}}));
}

TEST(Eta, Examples) {
  auto a1 = build_root_system(Family::A1);
  auto q4 = uniform_qparams(a1, 4);
  auto e = eta(a1, q4);
  // ⟨η, α⟩ = η_1 ⟨α_1, α_1⟩
  EXPECT_NEAR(e[0] * 2, std::log(4.0), 1e-14);
  auto a2 = build_root_system(Family::A2);
  auto q2 = uniform_qparams(a2, 2);
  auto e2 = eta(a2, q2);
  // ⟨η, λ_1⟩ is the first simple-root coordinate
  EXPECT_NEAR(e2[0], std::log(2.0), 1e-14);
  // q → 1⁺ limit
  auto qn = uniform_qparams(a2, Rational(1000001, 1000000));
  for (double x : eta(a2, qn)) EXPECT_LT(std::abs(x), 1e-5);
}

TEST(Eta, IdentitiesExact) {
  for (Family f : kAll) {
    auto rs = build_root_system(f);
    auto q = sample_q(rs);
    auto e = eta_exact(rs, q);
    // w0 η = −η in root coordinates
    const auto& m = rs.weyl[rs.w0].on_roots;
    for (int j = 0; j < rs.rank; ++j) {
      LogLinear s;
      for (int i = 0; i < rs.rank; ++i) s += e[i] * Rational(m[j][i]);
      EXPECT_TRUE(s == -e[j]) << family_name(f);
    }
    for (int i = 0; i < rs.rank; ++i) {
      LogLinear lhs;
      for (int k = 0; k < rs.rank; ++k) lhs += e[k] * rs.root_gram[k][i];
      int idx = -1;
      for (int a = 0; a < rs.num_pos(); ++a)
        if (rs.pos_roots[a].cartesian == rs.simple_roots[i]) idx = a;
      LogLinear rhs = log_of(rs, q, idx);
      if (rs.pos_roots[idx].twice >= 0) rhs += log_of(rs, q, rs.pos_roots[idx].twice) * Rational(2);
      rhs = rhs * (rs.root_gram[i][i] / 2);
      EXPECT_TRUE(lhs == rhs) << family_name(f);
      EXPECT_GE(lhs.value(q), 0.0);
    }
    std::mt19937 gen(11);
    std::uniform_int_distribution<int> d(0, 20);
    for (int t = 0; t < 200; ++t) {
      LatticePoint lam;
      for (int i = 0; i < rs.rank; ++i) lam[i] = d(gen);
      double en = 0;
      for (int i = 0; i < rs.rank; ++i) en += lam[i] * e[i].value(q);
      for (int idx : rs.indivisible) EXPECT_LE(rs.pairing(lam, idx), 4 * en + 1e-12) << family_name(f);
      if (lam != LatticePoint{}) EXPECT_GT(en, 0.0);
    }
  }
}

TEST(Eta, IndivisibleFormAndWeylAction) {
  for (Family f : kAll) {
    auto rs = build_root_system(f);
    auto q = sample_q(rs);
    auto e = eta_exact(rs, q);
    auto weight = [&](int idx) {
      LogLinear l = log_of(rs, q, idx);
      if (rs.pos_roots[idx].twice >= 0) l += log_of(rs, q, rs.pos_roots[idx].twice) * Rational(2);
      return l;
    };
    std::vector<LogLinear> alt(rs.rank);
    for (int idx : rs.indivisible)
      for (int i = 0; i < rs.rank; ++i) alt[i] += weight(idx) * Rational(rs.pos_roots[idx].coeffs[i], 2);
    for (int i = 0; i < rs.rank; ++i) EXPECT_TRUE(alt[i] == e[i]) << family_name(f);
    // w.η = η − Σ log(τ_β τ_{2β}²) β over β ∈ Φ⁺⁺ with w⁻¹β < 0
    for (int w = 0; w < rs.order(); ++w) {
      const auto& m = rs.weyl[w].on_roots;
      int winv = -1;
      for (int v = 0; v < rs.order(); ++v) {
        bool ident = true;
        for (int i = 0; i < rs.rank && ident; ++i)
          for (int j = 0; j < rs.rank; ++j) {
            int s = 0;
            for (int k = 0; k < rs.rank; ++k) s += m[i][k] * rs.weyl[v].on_roots[k][j];
            if (s != (i == j ? 1 : 0)) ident = false;
          }
        if (ident) winv = v;
      }
      ASSERT_GE(winv, 0);
      for (int j = 0; j < rs.rank; ++j) {
        LogLinear lhs;
        for (int i = 0; i < rs.rank; ++i) lhs += e[i] * Rational(m[j][i]);
        LogLinear rhs = e[j];
        for (int idx : rs.weyl[winv].inversions) rhs += weight(idx) * Rational(-rs.pos_roots[idx].coeffs[j]);
        EXPECT_TRUE(lhs == rhs) << family_name(f) << " w=" << w;
      }
    }
  }
}

TEST(Chi0, Examples) {
  auto a1 = build_root_system(Family::A1);
  auto q3 = uniform_qparams(a1, 3);
  EXPECT_EQ(chi0(a1, q3, unit_point(0)), Rational(3));
  EXPECT_EQ(chi0(a1, q3, LatticePoint{}), Rational(1));
  auto a2 = build_root_system(Family::A2);
  auto q2 = uniform_qparams(a2, 2);
  EXPECT_EQ(chi0(a2, q2, unit_point(0)), Rational(4));
  for (Family f : kAll) {
    auto rs = build_root_system(f);
    auto q = sample_q(rs);
    for (const auto& lam : dominant_box(rs.rank, 4)) {
      double exact = chi0(rs, q, lam).get_d();
      std::vector<double> x(lam.c.begin(), lam.c.begin() + rs.rank);
      EXPECT_NEAR(chi0(rs, q, x) / exact, 1.0, 1e-12);
    }
  }
}

TEST(Poincare, Examples) {
  auto a1 = build_root_system(Family::A1);
  EXPECT_EQ(poincare(a1, uniform_qparams(a1, 2)), Rational(3, 2));
  auto a2 = build_root_system(Family::A2);
  auto q2 = uniform_qparams(a2, 2);
  EXPECT_EQ(poincare(a2, q2), Rational(21, 8));
  EXPECT_EQ(poincare(a2, q2, lattice_point({1, 1})), Rational(1));
  EXPECT_EQ(poincare(a2, q2, LatticePoint{}), Rational(21, 8));
}

TEST(NLambda, Examples) {
  auto a2 = build_root_system(Family::A2);
  auto q2 = uniform_qparams(a2, 2);
  EXPECT_EQ(n_lambda(a2, q2, unit_point(0)), Rational(7));
  EXPECT_EQ(n_lambda(a2, q2, LatticePoint{}), Rational(1));
  EXPECT_THROW(n_lambda(a2, q2, lattice_point({-1, 1})), Error);
}

TEST(NLambda, MatchesTreeSpheres) {
  auto a1 = build_root_system(Family::A1);
  for (int q : {2, 3, 5}) {
    auto qp = uniform_qparams(a1, q);
    // sphere sizes of the (q+1)-regular tree: 1, q+1, then ×q per step
    Integer sphere = 1;
    for (int d = 0; d <= 30; ++d) {
      EXPECT_EQ(n_lambda(a1, qp, lattice_point({d})), Rational(sphere)) << "q=" << q << " d=" << d;
      sphere = d == 0 ? Integer(q + 1) : Integer(sphere * q);
    }
  }
}

TEST(NLambda, SemiRegularTree) {
  // BC1: a good vertex sees q_1+1 neighbours, each with q_0 further good neighbours
  auto bc1 = build_root_system(Family::BC1);
  auto qp = make_qparams(bc1, {{0, 2}, {1, 5}});
  EXPECT_EQ(n_lambda(bc1, qp, lattice_point({1})), Rational(6 * 2));
  EXPECT_EQ(n_lambda(bc1, qp, lattice_point({2})), Rational(6 * 2 * 5 * 2));
}

TEST(Saturation, Examples) {
  auto a1 = build_root_system(Family::A1);
  EXPECT_EQ(saturation(a1, LatticePoint{}), std::vector<LatticePoint>{LatticePoint{}});
  auto s = saturation(a1, lattice_point({2}));
  std::vector<LatticePoint> want{lattice_point({-2}), lattice_point({0}), lattice_point({2})};
  EXPECT_EQ(s, want);
  auto a2 = build_root_system(Family::A2);
  auto s2 = saturation(a2, unit_point(0));
  EXPECT_EQ(s2.size(), 3u);
  std::set<LatticePoint> orb(s2.begin(), s2.end());
  EXPECT_TRUE(orb.count(lattice_point({1, 0})));
  EXPECT_TRUE(orb.count(lattice_point({-1, 1})));
  EXPECT_TRUE(orb.count(lattice_point({0, -1})));
  auto s3 = saturation(a2, lattice_point({1, 1}));
  EXPECT_EQ(s3.size(), 7u);  // orbit of size 6 plus 0
  EXPECT_THROW(saturation(a2, lattice_point({1, -1})), Error);
}

TEST(Saturation, WeylInvariantAndClosed) {
  for (Family f : kAll) {
    auto rs = build_root_system(f);
    for (const auto& lam : dominant_box(rs.rank, 3)) {
      auto s = saturation(rs, lam);
      std::set<LatticePoint> set(s.begin(), s.end());
      for (const auto& p : s) {
        for (int w = 0; w < rs.order(); ++w) EXPECT_TRUE(set.count(rs.act(w, p)));
        EXPECT_TRUE(dominated_by(rs, rs.dominant(p), lam));
      }
      for (const auto& p : rs.orbit(lam)) EXPECT_TRUE(set.count(p));
    }
  }
}

TEST(Dominant, DualIsMinusW0) {
  auto a2 = build_root_system(Family::A2);
  EXPECT_EQ(a2.dual(lattice_point({1, 0})), lattice_point({0, 1}));
  auto a1 = build_root_system(Family::A1);
  EXPECT_EQ(a1.dual(lattice_point({3})), lattice_point({3}));
  EXPECT_EQ(a2.dominant(lattice_point({-1, 1})), lattice_point({1, 0}));
}

TEST(VolumeTable, MatchesExact) {
  for (Family f : kAll) {
    auto rs = build_root_system(f);
    auto q = sample_q(rs);
    VolumeTable vt(rs, q);
    for (const auto& lam : dominant_box(rs.rank, 5))
      EXPECT_NEAR(vt.log_n(lam), std::log(n_lambda(rs, q, lam).get_d()), 1e-12);
  }
}
