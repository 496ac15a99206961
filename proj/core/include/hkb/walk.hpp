#pragma once

#include <map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hkb/numeric.hpp"
#include "hkb/rootsys.hpp"
#include "hkb/spectral.hpp"

namespace hkb {

using DVec = std::vector<double>;
using DMat = std::vector<DVec>;

// A = Σ c_λ A_λ over finitely many dominant λ.
struct WalkSpec {
  std::map<LatticePoint, Rational> coeffs;

  nlohmann::json to_json(int rank) const;
  static WalkSpec from_json(const nlohmann::json& j, int rank);
};

// Checks dominance, positivity and Σ c_λ = 1; throws InvalidParameters.
void validate_walk(const RootSystemData& rs, const WalkSpec& walk);

struct KappaModel {
  RootSystemData rs;
  QParams q;
  WalkSpec walk;
  double rho = 1;
  ExpPoly kappa_poly;                       // κ = ρ⁻¹ h_z(A)
  std::map<LatticePoint, Rational> weights; // ρκ(z) = Σ_v weights_v χ0(v)^{1/2} e^{⟨z,v⟩}
  std::vector<LatticePoint> hull;           // vertices of conv(V), counter-clockwise for rank 2
  DMat B0;

  double log_kappa(const DVec& x) const;
  DVec grad_log_kappa(const DVec& x) const;
  std::complex<double> kappa(const CVec& z) const;
  // h_z(A) = ρκ(z)
  std::complex<double> rho_kappa(const CVec& z) const;
};

KappaModel build_kappa(const RootSystemData& rs, const QParams& q, const WalkSpec& walk);

// Coefficients of ρκ at precision T, one per exponent.
template <class T>
std::vector<std::pair<LatticePoint, T>> rho_kappa_terms(const KappaModel& km) {
  using std::exp;
  auto eta_t = eta_as<T>(km.rs, km.q);
  std::vector<std::pair<LatticePoint, T>> out;
  for (const auto& [v, w] : km.weights) {
    T e = 0;
    for (int i = 0; i < km.rs.rank; ++i) e += eta_t[i] * v[i];
    out.emplace_back(v, from_rational<T>(w) * exp(e));
  }
  return out;
}

// B_x as a matrix in simple-root/coweight coordinates: B_x(u,u) = uᵀ M u.
DMat hessian(const KappaModel& km, const DVec& x);
// Same quantity from the double-sum form.
DMat hessian_pairwise(const KappaModel& km, const DVec& x);
double det(const DMat& m);
DMat inverse(const DMat& m);
double quad_form(const DMat& m, const DVec& u);

// Signed Euclidean distance from δ to the boundary of conv(V); positive inside.
double hull_margin(const KappaModel& km, const DVec& delta);

struct Saddle {
  DVec s;
  double phi = 0;
  int iterations = 0;
};

Saddle saddle(const KappaModel& km, const DVec& delta, double margin = 1e-9);

struct DeltaP {
  DVec s;
  DVec delta;
};

// p = +∞ is passed as std::numeric_limits<double>::infinity().
DeltaP sp_delta_p(const KappaModel& km, double p);

}  // namespace hkb
