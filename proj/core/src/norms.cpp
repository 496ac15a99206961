#include "hkb/norms.hpp"

#include <algorithm>
#include <cmath>

#include "hkb/error.hpp"

namespace hkb {

namespace {

double log_sum_exp(std::vector<double>& v) {
  if (v.empty()) return -kInfinity;
  double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  std::vector<double> terms;
  terms.reserve(v.size());
  for (double x : v) terms.push_back(std::exp(x - mx));
  std::sort(terms.begin(), terms.end());
  return mx + std::log(pairwise_sum(terms.data(), terms.size()));
}

// Bound on |λ_i| in terms of |λ|: |λ_i| ≤ |λ|·|ω_i| with ω_i the dual basis.
double coordinate_bound(const RootSystemData& rs) {
  if (rs.rank == 1) return 1 / std::sqrt(rs.gram[0][0].get_d());
  const double a = rs.gram[0][0].get_d(), b = rs.gram[0][1].get_d(), d = rs.gram[1][1].get_d();
  const double det = a * d - b * b;
  return std::sqrt(std::max(a, d) / det);
}

double euclid(const RootSystemData& rs, const std::vector<double>& x) { return rs.norm(x); }

}  // namespace

RegionSpec default_region(const RootSystemData& rs, double p) {
  RegionSpec s;
  s.p = p;
  const double m = rs.num_indivisible();
  if (p < 2)
    s.gamma = 0.1;
  else if (p == 2)
    s.gamma = std::min(1 / (2 * (m + 1)), 0.9 / (4 * m));
  return s;
}

void validate_region(const RootSystemData& rs, const RegionSpec& spec) {
  if (!(spec.p >= 1)) throw Error(ErrorCode::InvalidParameters, "p must be at least 1");
  const double m = rs.num_indivisible();
  if (spec.p < 2 && !(spec.gamma > 0 && spec.gamma < 1.0 / 6))
    throw Error(ErrorCode::InvalidParameters, "gamma must lie in (0, 1/6) for p < 2");
  if (spec.p == 2 && !(spec.gamma > 0 && spec.gamma < 1 / (4 * m)))
    throw Error(ErrorCode::InvalidParameters, "gamma must lie in (0, 1/(4|Phi++|)) for p = 2");
  if (spec.p > 2 && !(spec.rn_power > 1))
    throw Error(ErrorCode::InvalidParameters, "r_n = (log n)^k needs k > 1");
}

double gamma_prime(const RootSystemData& rs, const RegionSpec& spec) { return 2 * spec.gamma * rs.num_indivisible(); }

double region_radius(const RegionSpec& spec, int n) {
  if (spec.p > 2) return std::pow(std::log(static_cast<double>(n)), spec.rn_power);
  return std::pow(static_cast<double>(n), 0.5 + spec.gamma);
}

std::vector<LatticePoint> critical_region(const RegionSpec& spec, const KappaModel& km, int n) {
  const auto& rs = km.rs;
  validate_region(rs, spec);
  if (n < 1) throw Error(ErrorCode::InvalidParameters, "time must be positive");
  const int r = rs.rank;
  std::vector<double> center(r, 0.0);
  if (spec.p < 2) {
    auto d = sp_delta_p(km, spec.p).delta;
    for (int i = 0; i < r; ++i) center[i] = n * d[i];
  }
  const double radius = region_radius(spec, n);
  int bound = static_cast<int>(std::ceil(radius * coordinate_bound(rs)));
  for (int i = 0; i < r; ++i) bound = std::max(bound, static_cast<int>(std::ceil(center[i] + radius * coordinate_bound(rs))));
  const double inner = std::pow(static_cast<double>(n), 0.5 - spec.gamma);
  const double wall = std::pow(static_cast<double>(n), 0.5 - gamma_prime(rs, spec));

  std::vector<LatticePoint> out;
  for (const auto& lam : dominant_box(r, bound)) {
    std::vector<double> x(r);
    for (int i = 0; i < r; ++i) x[i] = lam[i] - center[i];
    const double dist = euclid(rs, x);
    if (dist > radius) continue;
    if (spec.p == 2) {
      if (dist < inner) continue;
      bool ok = true;
      for (int a : rs.indivisible) ok = ok && rs.pairing(lam, a) >= wall;
      if (!ok) continue;
    }
    out.push_back(lam);
  }
  if (out.empty()) throw Error(ErrorCode::EmptyRegion, "critical region is empty at n = " + std::to_string(n));
  return out;
}

double log_lp_norm(const RadialFunction& k, const VolumeTable& vt, double p, const LambdaFilter& keep) {
  if (!(p >= 1)) throw Error(ErrorCode::InvalidParameters, "p must be at least 1");
  std::vector<double> logs;
  for (const auto& [l, a] : k.mass) {
    if (a == 0 || (keep && !keep(l))) continue;
    const double la = std::log(std::abs(a)), ln = vt.log_n(l);
    logs.push_back(std::isinf(p) ? la - ln : p * la + (1 - p) * ln);
  }
  if (std::isinf(p)) return logs.empty() ? -kInfinity : *std::max_element(logs.begin(), logs.end());
  return log_sum_exp(logs) / p;
}

double lp_norm(const RadialFunction& k, const VolumeTable& vt, double p, const LambdaFilter& keep) {
  return std::exp(log_lp_norm(k, vt, p, keep));
}

double log_step_scale(const KappaModel& km, double p) { return std::log(km.rho) + km.log_kappa(sp_delta_p(km, p).s); }

double log_theoretical_rate(const KappaModel& km, double p, int n) {
  if (!(p >= 1)) throw Error(ErrorCode::InvalidParameters, "p must be at least 1");
  if (n < 2) throw Error(ErrorCode::InvalidParameters, "rates need n >= 2");
  const double r = km.rs.rank, m = km.rs.num_indivisible();
  const double ln = std::log(static_cast<double>(n));
  if (p < 2) {
    const double inv_conj = 1 - 1 / p;
    return -r * inv_conj / 2 * ln + n * log_step_scale(km, p);
  }
  const double expo = p == 2 ? -r / 4 - m / 2 : -r / 2 - m;
  return expo * ln + n * std::log(km.rho);
}

double theoretical_rate(const KappaModel& km, double p, int n) { return std::exp(log_theoretical_rate(km, p, n)); }

ConcentrationReport concentration_report(const RadialFunction& k, const VolumeTable& vt,
                                         const std::vector<LatticePoint>& region, double p) {
  auto inside = [&](const LatticePoint& l) { return std::binary_search(region.begin(), region.end(), l); };
  ConcentrationReport out;
  const double total = log_lp_norm(k, vt, p);
  const double li = log_lp_norm(k, vt, p, inside);
  const double lo = log_lp_norm(k, vt, p, [&](const LatticePoint& l) { return !inside(l); });
  out.inside = std::exp(li);
  out.outside = std::exp(lo);
  out.ratio = std::exp(lo - total);
  return out;
}

RateFit rate_fit(const KappaModel& km, const std::map<int, RadialFunction>& series, double p, int n_lo, int n_hi,
                 int corrections) {
  const VolumeTable vt(km.rs, km.q);
  const double step = log_step_scale(km, p);
  std::vector<double> ns, y;
  for (const auto& [n, k] : series) {
    if (n < n_lo || n > n_hi) continue;
    ns.push_back(n);
    y.push_back(log_lp_norm(k, vt, p) - n * step);
  }
  const auto f = fit_power_law(ns, y, corrections);
  return {f.slope, f.intercept, f.max_residual, fit_power_law(ns, y, 0).slope};
}

}  // namespace hkb
