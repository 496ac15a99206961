#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hkb/kernel.hpp"
#include "hkb/norms.hpp"

namespace hkb {

// Radial profile equal to `value` on the sphere S_λ; its mass is value·N_λ.
RadialFunction delta_profile(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda, double value = 1);
ExactRadial exact_delta_profile(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda,
                                const Rational& value = 1);

// Linear combination a·f + b·g of radial profiles.
RadialFunction combine(double a, const RadialFunction& f, double b, const RadialFunction& g);

// Spherical functions P_λ evaluated from their exponential-polynomial expansions, cached per λ.
class SphericalCache {
 public:
  SphericalCache(const RootSystemData& rs, const QParams& q);

  const RootSystemData& root_system() const { return rs_; }
  const QParams& qparams() const { return q_; }

  std::complex<double> value(const LatticePoint& lambda, const CVec& z);
  double value(const LatticePoint& lambda, const std::vector<double>& x);

 private:
  const ExpPoly& expansion(const LatticePoint& lambda);

  RootSystemData rs_;
  QParams q_;
  VolumeTable vt_;
  std::map<LatticePoint, ExpPoly> polys_;
  std::map<LatticePoint, double> inv_n_;
};

// Re z must lie in conv(W·η); throws OutOfStrip otherwise.
void check_strip(const RootSystemData& rs, const QParams& q, const CVec& z);

// ℋf(z) = Σ_λ N_λ f(λ) P_λ(−z).
std::complex<double> helgason_radial(SphericalCache& sph, const RadialFunction& f, const CVec& z);
std::complex<double> helgason_radial(const RootSystemData& rs, const QParams& q, const RadialFunction& f, const CVec& z);
// ℋf at every node z = iθ of a grid.
CVec helgason_on_grid(SphericalCache& sph, const SpectralGrid& grid, const RadialFunction& f);

// s_p = (2/p − 1)η for p < 2 and 0 otherwise.
std::vector<double> s_p(const RootSystemData& rs, const QParams& q, double p);

// M_p(f) = Σ_λ N_λ f(λ) P_λ(s_p).
double mass(SphericalCache& sph, const RadialFunction& f, double p);
double mass(const RootSystemData& rs, const QParams& q, const RadialFunction& f, double p);

struct CaloricState {
  RadialFunction profile;
  int time = 0;
  std::string datum;
};

// u_n = A^n f by the structure-constant recursion, at the requested times.
std::map<int, CaloricState> evolve(StructureTable& table, const WalkSpec& walk, const RadialFunction& f,
                                   const std::vector<int>& times, const std::string& datum = "f");
// u_n by inverting ℋf(iθ)·(ρκ(−iθ))^n on the grid; masses on the box reachable from supp f.
CaloricState evolve_spectral(SphericalCache& sph, const KappaModel& km, const SpectralGrid& grid,
                             const RadialFunction& f, int n, const std::string& datum = "f");

// err_n = ‖u_n − M·k_n‖_p / ‖k_n‖_p for every n present in both series.
std::map<int, double> convergence_error(const std::map<int, CaloricState>& u, const std::map<int, RadialFunction>& k,
                                        double massval, double p, const VolumeTable& vt);

struct RegionSplit {
  double inside_err = 0;   // ‖(u − M k) 1_region‖_p / ‖k‖_p
  double outside_u = 0;    // ‖u 1_{complement}‖_p / ‖k‖_p
};

RegionSplit region_split_error(const RadialFunction& u, const RadialFunction& k, double massval, double p,
                               const std::vector<LatticePoint>& region, const VolumeTable& vt);

// w_p(λ) = exp((2/p)⟨η,λ⟩) for p < 2 and exp(⟨η,λ⟩) for p ≥ 2.
double log_weight(const VolumeTable& vt, const LatticePoint& lambda, double p);

struct Membership {
  bool member = false;
  double norm = 0;        // Σ N_λ |f(λ)| w_p(λ) over the evaluated range
  double shell_rate = 0;  // fitted log-growth of the shell sums per unit of coordinate sum
};

// Finitely supported profile: always a member, exact norm.
Membership weighted_membership(const VolumeTable& vt, const RadialFunction& f, double p);
// Profile given by log f(λ) on the whole cone: shells Σλ_i = s ≤ radius are summed and the tail is
// judged by the exponential rate of the shell sums over the outer half.
Membership weighted_membership(const RootSystemData& rs, const VolumeTable& vt,
                               const std::function<double(const LatticePoint&)>& log_f, double p, int radius);

// f × K: masses Σ_{λ,ν} a_K(λ) a_f(ν) b^{ν'}(λ,ν).
RadialFunction convolve(StructureTable& table, const RadialFunction& f, const RadialFunction& K);
ExactRadial convolve_exact(StructureTable& table, const ExactRadial& f, const ExactRadial& K);

// Relative margin 1 − ‖f × K‖_p / (ℋ(|K|)(s_p)·‖f‖_p); nonnegative when the Herz bound holds.
double herz_check(StructureTable& table, SphericalCache& sph, const RadialFunction& f, const RadialFunction& K,
                  double p);

struct GroundStateNorm {
  double head = 0;        // (Σ_{Σλ_i ≤ S} N_λ Φ(λ)^{p'})^{1/p'}
  double tail_bound = 0;  // bound on the remaining Σ N_λ Φ(λ)^{p'}
  double envelope = 0;    // sup of Φ(λ)χ0(λ)^{1/2}/Π_{α∈Φ⁺⁺}(1+⟨λ,α⟩) over the head
  int radius = 0;         // S
};

// C_p = ‖Φ‖_{p'} with a certified tail; throws TailBoundFailed when the tail exceeds rel_tol of the head.
// `cache` keeps Φ(λ) between calls for the same building.
GroundStateNorm ground_state_norm(const RootSystemData& rs, const QParams& q, double p, double rel_tol = 1e-6,
                                  int max_radius = 160, std::map<LatticePoint, double>* cache = nullptr);

// Relative margin 1 − ‖f × K‖_2 / (C_p‖K‖_p‖f‖_2) with C_p the head of ‖Φ‖_{p'}, a lower bound.
double kunze_stein_check(StructureTable& table, const GroundStateNorm& cp, const RadialFunction& f,
                         const RadialFunction& K, double p);

// Seeded random profile: coefficients uniform on [−1,1] (or [0,1]) on the dominant ball of the given radius.
RadialFunction random_profile(const RootSystemData& rs, const QParams& q, double radius, bool nonneg, std::uint64_t seed);

}  // namespace hkb
