#pragma once

#include <map>
#include <optional>
#include <vector>

#include "hkb/numeric.hpp"
#include "hkb/rootsys.hpp"
#include "hkb/spectral.hpp"
#include "hkb/structure.hpp"
#include "hkb/walk.hpp"

namespace hkb {

// Radial function stored by sphere mass a(λ) = N_λ f(λ); per-vertex values of a heat kernel
// underflow long before the masses do.
struct RadialFunction {
  int rank = 1;
  std::map<LatticePoint, double> mass;
  double imag_residue = 0;    // spectral route only
  double error_estimate = 0;  // spectral route only: relative change under resolution doubling

  double mass_at(const LatticePoint& lambda) const;
  double total_mass() const;
  // log f(λ); -inf off the support
  double log_value(const VolumeTable& vt, const LatticePoint& lambda) const;
  double value(const VolumeTable& vt, const LatticePoint& lambda) const;
};

struct ExactRadial {
  int rank = 1;
  std::map<LatticePoint, Rational> mass;

  Rational total_mass() const;
  Rational value(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda) const;
  RadialFunction to_double() const;
};

// Dominant part of the n-fold sumset of the walk exponents: the support of k_n.
std::vector<LatticePoint> reachable_support(const KappaModel& km, int n);

// Structure table prepared for a walk: rows for every walk λ are certified translation-stationary.
StructureTable prepare_table(const RootSystemData& rs, const QParams& q, const WalkSpec& walk);
// Same certification on an existing table, e.g. one filled from a cache file.
void prepare_table(StructureTable& table, const WalkSpec& walk);

// Exact kernels k_0..k_n by the mass recursion a_{m+1}(ν') = Σ_ν a_m(ν) Σ_λ c_λ b^{ν'}(λ,ν).
std::vector<ExactRadial> heat_recursive_exact(StructureTable& table, const WalkSpec& walk, int n);
// Same recursion in double over a dense lattice box, for long runs; keeps only the requested times.
std::map<int, RadialFunction> heat_recursive_at(StructureTable& table, const WalkSpec& walk, const std::vector<int>& times);
RadialFunction heat_recursive(StructureTable& table, const WalkSpec& walk, int n);
// The same recursions started from an arbitrary radial profile (given by its sphere masses).
std::vector<ExactRadial> evolve_exact(StructureTable& table, const WalkSpec& walk, const ExactRadial& initial, int n);
std::map<int, RadialFunction> evolve_recursive_at(StructureTable& table, const WalkSpec& walk,
                                                  const RadialFunction& initial, const std::vector<int>& times);

struct SpectralOptions {
  Precision precision = Precision::Double;
  double loss_budget = 0;   // log-scale cancellation allowed per contour; 0 picks one for the precision
  bool verify = true;       // recompute at doubled resolution and bound the relative change
  int min_resolution = 0;
};

// Plancherel inversion of A^n, evaluated on contours Re z = s chosen near the saddle of each λ/n.
// lambdas empty means the whole reachable support.
RadialFunction heat_spectral(const KappaModel& km, const SpectralGrid& grid, int n,
                             const std::vector<LatticePoint>& lambdas = {}, const SpectralOptions& opts = {});

// Literal quadrature ρ^n Σ w(θ) κ(iθ)^n conj P_λ(iθ) on the grid nodes; only sound for small n.
RadialFunction heat_spectral_direct(const KappaModel& km, const SpectralGrid& grid, int n,
                                    const std::vector<LatticePoint>& lambdas);

struct RegimeMargins {
  double wall = 0;  // ξ: min over α>0 of ⟨δ,α⟩
  double hull = 0;  // ε: Euclidean distance from δ to the boundary of conv(V)
};

// log of n^{-r/2} ρ^n e^{-nφ(δ)} χ0(λ)^{-1/2} det(B_s)^{-1/2} / c(s) with δ = λ/n.
double log_asym_interior(const KappaModel& km, int n, const LatticePoint& lambda, const RegimeMargins& margins);
double asym_interior(const KappaModel& km, int n, const LatticePoint& lambda, const RegimeMargins& margins);
// log of n^{-r/2-|Φ⁺⁺|} ρ^n e^{-nφ(λ/n)} Φ(λ); requires |λ|/n ≤ max_ratio.
double log_asym_origin(const KappaModel& km, int n, const LatticePoint& lambda, double max_ratio);
double asym_origin(const KappaModel& km, int n, const LatticePoint& lambda, double max_ratio);
// log of χ0(λ)^{-1/2} ρ^n e^{-nφ(λ/n)}, the envelope of the global bound.
double log_heat_envelope(const KappaModel& km, int n, const LatticePoint& lambda);

struct CheckedRatio {
  double measured = 0;
  double predicted = 0;
  double deviation = 0;  // |measured - predicted|
};

CheckedRatio ratio_interior(const KappaModel& km, const RadialFunction& kn, int n, const LatticePoint& lambda,
                            const LatticePoint& xi);
CheckedRatio ratio_origin(const KappaModel& km, const RadialFunction& kn, const LatticePoint& lambda,
                          const LatticePoint& mu);

struct Admissibility {
  bool aperiodic = false;
  bool irreducible = false;
  int period = 0;
};

// Support propagation up to n0 steps.
Admissibility certify_admissible(StructureTable& table, const WalkSpec& walk, int n0 = 40);

}  // namespace hkb
