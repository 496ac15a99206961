#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hkb/numeric.hpp"
#include "hkb/rootsys.hpp"

namespace hkb {

using CVec = std::vector<std::complex<double>>;

// Σ_μ c_μ e^{⟨z,μ⟩}, z in simple-root coordinates.
struct ExpPoly {
  int rank = 1;
  std::map<LatticePoint, double> terms;
  std::map<LatticePoint, Integer> counts;      // m_λ(μ) when this is N_λ·P_λ

  std::complex<double> eval(const CVec& z) const;
  double eval(const std::vector<double>& x) const;
  nlohmann::json to_json() const;
  static ExpPoly from_json(const nlohmann::json& j, int rank);
};

std::complex<double> c_function(const RootSystemData& rs, const QParams& q, const CVec& z);
std::complex<double> spherical_direct(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda,
                                      const CVec& z);

struct SphericalExpansion {
  LatticePoint lambda;
  Rational n_lambda;
  ExpPoly poly;                 // N_λ·P_λ; integer counts when `integral`
  std::map<LatticePoint, double> raw;  // unrounded DFT coefficients
  bool integral = false;
  double residual = 0;          // max |coeff/χ0(μ)^{1/2} − round| over the DFT box
  int resolution = 0;
  Precision precision = Precision::Double;
};

// DFT extraction of the exponential-polynomial coefficients of N_λ·P_λ.
SphericalExpansion spherical_expansion(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda,
                                       int min_resolution = 0);
ExpPoly spherical_expoly(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda);
double ground_state(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda);

// Node offset (in grid steps) keeping every node off the c-function walls.
std::vector<Rational> grid_offset(const RootSystemData& rs);

struct SpectralGrid {
  RootSystemData rs;
  QParams q;
  int resolution = 0;
  std::vector<Rational> offset;
  std::vector<std::array<double, kMaxRank>> nodes;  // θ in simple-root coordinates
  std::vector<double> weights;
  double raw_mass = 0;
  double rescale = 1;
  double orthogonality_residual = 0;

  int rank() const { return rs.rank; }
  std::size_t size() const { return weights.size(); }
};

SpectralGrid build_grid(const RootSystemData& rs, const QParams& q, int resolution, int test_radius = 2,
                        int max_resolution = 0);

// P_λ(iθ) at every grid node (inverse FFT of the expansion coefficients).
CVec spherical_on_grid(const SpectralGrid& grid, const SphericalExpansion& e);
CVec spherical_on_grid(const SpectralGrid& grid, const LatticePoint& lambda);

// Σ w(θ) a(θ) conj(b(θ)), pairwise summation.
std::complex<double> plancherel_pair(const SpectralGrid& grid, const CVec& a, const CVec& b);

// max over |λ|,|μ| ≤ radius of |⟨P_λ,P_μ⟩_π − δ_{λμ}/N_λ|.
double orthogonality_residual(const SpectralGrid& grid, double radius);

// Dominant λ with Euclidean norm ≤ radius.
std::vector<LatticePoint> dominant_ball(const RootSystemData& rs, double radius);

// ---------------------------------------------------------------------------
// Precision-generic c-function pieces used by the contour-shifted inversions.

template <class T>
T log_linear_value(const LogLinear& l, const QParams& q) {
  using std::log;
  T v = 0;
  for (const auto& [label, k] : l.coeff) v += from_rational<T>(k) * log(from_rational<T>(q.q.at(label)));
  return v;
}

template <class T>
std::vector<T> eta_as(const RootSystemData& rs, const QParams& q) {
  std::vector<T> out;
  for (const auto& l : eta_exact(rs, q)) out.push_back(log_linear_value<T>(l, q));
  return out;
}

template <class T>
struct CFactors {
  int rank = 1;
  std::vector<std::array<int, kMaxRank>> coroot;
  std::vector<T> num;  // 1 − num·e^{−⟨z,α∨⟩}
  std::vector<T> den;  // 1 − den·e^{−⟨z,α∨⟩}
};

template <class T>
CFactors<T> c_factors(const RootSystemData& rs, const QParams& q) {
  using std::sqrt;
  CFactors<T> f;
  f.rank = rs.rank;
  for (int a = 0; a < rs.num_pos(); ++a) {
    const auto& pr = rs.pos_roots[a];
    std::array<int, kMaxRank> c{};
    for (int i = 0; i < rs.rank; ++i) c[i] = pr.coroot[i];
    T half = pr.half >= 0 ? T(1) / sqrt(from_rational<T>(q.tau[pr.half])) : T(1);
    f.coroot.push_back(c);
    f.num.push_back(half / from_rational<T>(q.tau[a]));
    f.den.push_back(half);
  }
  return f;
}

// c(z) and 1/c(z) at z = (re + i·im) in simple-root coordinates.
template <class T>
Cplx<T> c_value(const CFactors<T>& f, const T* re, const T* im, bool inverse) {
  Cplx<T> num(T(1)), den(T(1));
  for (std::size_t a = 0; a < f.num.size(); ++a) {
    T ur = 0, ui = 0;
    for (int i = 0; i < f.rank; ++i) {
      ur += re[i] * f.coroot[a][i];
      ui += im[i] * f.coroot[a][i];
    }
    Cplx<T> x = cexp(Cplx<T>(-ur, -ui));
    num *= Cplx<T>(T(1)) - x * f.num[a];
    den *= Cplx<T>(T(1)) - x * f.den[a];
  }
  return inverse ? den / num : num / den;
}

}  // namespace hkb
