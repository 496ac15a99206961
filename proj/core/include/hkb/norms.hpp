#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "hkb/kernel.hpp"
#include "hkb/stats.hpp"

namespace hkb {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct RegionSpec {
  double p = 1;
  double gamma = 0;      // p ≤ 2
  double rn_power = 2;   // p > 2: r_n = (log n)^rn_power
};

// p=1 → γ = 1/10; p=2 → min(1/(2(|Φ⁺⁺|+1)), 0.9/(4|Φ⁺⁺|)); p>2 → r_n = (log n)².
RegionSpec default_region(const RootSystemData& rs, double p);
// Validates γ against (0,1/6) for p<2 and (0,1/(4|Φ⁺⁺|)) for p=2, and rn_power > 1.
void validate_region(const RootSystemData& rs, const RegionSpec& spec);
double gamma_prime(const RootSystemData& rs, const RegionSpec& spec);
double region_radius(const RegionSpec& spec, int n);

// Dominant λ of the critical region at time n; throws EmptyRegion when none qualify.
std::vector<LatticePoint> critical_region(const RegionSpec& spec, const KappaModel& km, int n);

using LambdaFilter = std::function<bool(const LatticePoint&)>;

// log ‖k‖_p with ‖k‖_p^p = Σ N_λ |k(λ)|^p; p = ∞ gives log max |k(λ)|. Optional filter restricts the sum.
double log_lp_norm(const RadialFunction& k, const VolumeTable& vt, double p, const LambdaFilter& keep = {});
double lp_norm(const RadialFunction& k, const VolumeTable& vt, double p, const LambdaFilter& keep = {});

// log of the predicted rate: n^{-r/(2p')} ρ^n κ(s_p)^n, n^{-r/4-|Φ⁺⁺|/2} ρ^n, n^{-r/2-|Φ⁺⁺|} ρ^n.
double log_theoretical_rate(const KappaModel& km, double p, int n);
double theoretical_rate(const KappaModel& km, double p, int n);
// ρ κ(s_p); the per-step normaliser used by rate fits.
double log_step_scale(const KappaModel& km, double p);

struct ConcentrationReport {
  double inside = 0;   // ‖k 1_region‖_p
  double outside = 0;  // ‖k 1_{complement}‖_p
  double ratio = 0;    // outside / ‖k‖_p
};

ConcentrationReport concentration_report(const RadialFunction& k, const VolumeTable& vt,
                                         const std::vector<LatticePoint>& region, double p);

struct RateFit {
  double slope = 0;
  double intercept = 0;
  double drift = 0;        // largest residual of the regression
  double plain_slope = 0;  // straight log-log regression, no correction terms
};

// Regression of log(‖k_n‖_p ρ^{-n} κ(s_p)^{-n}) on log n over the series entries with n in [n_lo, n_hi],
// with `corrections` nuisance terms n^{-1}, n^{-2}, ... in the model.
RateFit rate_fit(const KappaModel& km, const std::map<int, RadialFunction>& series, double p, int n_lo, int n_hi,
                 int corrections = 2);

}  // namespace hkb
