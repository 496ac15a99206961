#include "hkb/caloric.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hkb/error.hpp"

namespace hkb {

namespace {

double log_sum_exp(const std::vector<double>& v) {
  if (v.empty()) return -kInfinity;
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  std::vector<double> t;
  t.reserve(v.size());
  for (double x : v) t.push_back(std::exp(x - mx));
  std::sort(t.begin(), t.end());
  return mx + std::log(pairwise_sum(t.data(), t.size()));
}

double conjugate_exponent(double p) { return p == 1 ? kInfinity : p / (p - 1); }

// Π_{α∈Φ⁺⁺} (1 + ⟨λ,α⟩)
double wall_polynomial(const RootSystemData& rs, const LatticePoint& lambda) {
  double v = 1;
  for (int a : rs.indivisible) v *= 1 + rs.pairing(lambda, a);
  return v;
}

std::vector<LatticePoint> shell(int rank, int s) {
  std::vector<LatticePoint> out;
  if (rank == 1) return {lattice_point({s})};
  for (int i = 0; i <= s; ++i) out.push_back(lattice_point({i, s - i}));
  return out;
}

}  // namespace

RadialFunction delta_profile(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda, double value) {
  if (!is_dominant(lambda, rs.rank)) throw Error(ErrorCode::NonDominant, "profiles live on dominant coweights");
  RadialFunction f;
  f.rank = rs.rank;
  f.mass[lambda] = value * n_lambda(rs, q, lambda).get_d();
  return f;
}

ExactRadial exact_delta_profile(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda,
                                const Rational& value) {
  if (!is_dominant(lambda, rs.rank)) throw Error(ErrorCode::NonDominant, "profiles live on dominant coweights");
  ExactRadial f;
  f.rank = rs.rank;
  f.mass[lambda] = value * n_lambda(rs, q, lambda);
  return f;
}

RadialFunction combine(double a, const RadialFunction& f, double b, const RadialFunction& g) {
  if (f.rank != g.rank) throw Error(ErrorCode::InvalidParameters, "profiles of different rank");
  RadialFunction out;
  out.rank = f.rank;
  for (const auto& [l, m] : f.mass) out.mass[l] += a * m;
  for (const auto& [l, m] : g.mass) out.mass[l] += b * m;
  return out;
}

SphericalCache::SphericalCache(const RootSystemData& rs, const QParams& q) : rs_(rs), q_(q), vt_(rs, q) {}

const ExpPoly& SphericalCache::expansion(const LatticePoint& lambda) {
  auto it = polys_.find(lambda);
  if (it != polys_.end()) return it->second;
  inv_n_[lambda] = std::exp(-vt_.log_n(lambda));
  return polys_[lambda] = spherical_expoly(rs_, q_, lambda);
}

std::complex<double> SphericalCache::value(const LatticePoint& lambda, const CVec& z) {
  const auto& e = expansion(lambda);
  return e.eval(z) * inv_n_.at(lambda);
}

double SphericalCache::value(const LatticePoint& lambda, const std::vector<double>& x) {
  const auto& e = expansion(lambda);
  return e.eval(x) * inv_n_.at(lambda);
}

void check_strip(const RootSystemData& rs, const QParams& q, const CVec& z) {
  if (static_cast<int>(z.size()) != rs.rank) throw Error(ErrorCode::InvalidParameters, "z has the wrong rank");
  const auto e = eta(rs, q);
  std::vector<double> x(rs.rank);
  for (int i = 0; i < rs.rank; ++i) x[i] = z[i].real();
  // x ∈ conv(Wη) iff every Weyl image has root coordinates ≤ those of η
  for (int w = 0; w < rs.order(); ++w) {
    auto y = rs.act_roots(w, x);
    for (int i = 0; i < rs.rank; ++i)
      if (y[i] > e[i] * (1 + 1e-12) + 1e-12) throw Error(ErrorCode::OutOfStrip, "Re z lies outside conv(W eta)");
  }
}

std::complex<double> helgason_radial(SphericalCache& sph, const RadialFunction& f, const CVec& z) {
  check_strip(sph.root_system(), sph.qparams(), z);
  CVec mz(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) mz[i] = -z[i];
  std::complex<double> s = 0;
  for (const auto& [l, a] : f.mass)
    if (a != 0) s += a * sph.value(l, mz);
  return s;
}

std::complex<double> helgason_radial(const RootSystemData& rs, const QParams& q, const RadialFunction& f, const CVec& z) {
  SphericalCache sph(rs, q);
  return helgason_radial(sph, f, z);
}

CVec helgason_on_grid(SphericalCache& sph, const SpectralGrid& grid, const RadialFunction& f) {
  const int r = grid.rank();
  CVec out(grid.size());
  CVec z(r);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (int i = 0; i < r; ++i) z[i] = {0.0, grid.nodes[k][i]};
    out[k] = helgason_radial(sph, f, z);
  }
  return out;
}

std::vector<double> s_p(const RootSystemData& rs, const QParams& q, double p) {
  if (!(p >= 1)) throw Error(ErrorCode::InvalidParameters, "p must be at least 1");
  auto e = eta(rs, q);
  const double t = p < 2 ? 2 / p - 1 : 0;
  for (double& v : e) v *= t;
  return e;
}

double mass(SphericalCache& sph, const RadialFunction& f, double p) {
  const auto s = s_p(sph.root_system(), sph.qparams(), p);
  std::vector<double> terms;
  double total = 0;
  for (const auto& [l, a] : f.mass)
    if (a != 0) terms.push_back(a * sph.value(l, s));
  std::sort(terms.begin(), terms.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
  for (double t : terms) total += t;
  return total;
}

double mass(const RootSystemData& rs, const QParams& q, const RadialFunction& f, double p) {
  SphericalCache sph(rs, q);
  return mass(sph, f, p);
}

std::map<int, CaloricState> evolve(StructureTable& table, const WalkSpec& walk, const RadialFunction& f,
                                   const std::vector<int>& times, const std::string& datum) {
  std::map<int, CaloricState> out;
  for (auto& [n, u] : evolve_recursive_at(table, walk, f, times)) out[n] = {std::move(u), n, datum};
  return out;
}

CaloricState evolve_spectral(SphericalCache& sph, const KappaModel& km, const SpectralGrid& grid,
                             const RadialFunction& f, int n, const std::string& datum) {
  if (n < 0) throw Error(ErrorCode::InvalidParameters, "time must be nonnegative");
  if (grid.rs.family != km.rs.family || grid.q.q != km.q.q)
    throw Error(ErrorCode::InvalidParameters, "grid and walk belong to different buildings");
  const auto& rs = km.rs;
  const int r = rs.rank;
  int start = 0, step = 0;
  for (const auto& [l, _] : f.mass)
    for (int i = 0; i < r; ++i) start = std::max(start, l[i]);
  for (const auto& [l, _] : km.walk.coeffs) step = std::max(step, saturation_span(rs, l));

  CVec h = helgason_on_grid(sph, grid, f);
  CVec z(r);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    for (int i = 0; i < r; ++i) z[i] = {0.0, -grid.nodes[k][i]};
    h[k] *= std::pow(km.rho_kappa(z), n);
  }
  CaloricState out;
  out.time = n;
  out.datum = datum;
  out.profile.rank = r;
  VolumeTable vt(rs, grid.q);
  for (const auto& nu : dominant_box(r, start + n * step)) {
    std::vector<std::complex<double>> terms(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      for (int i = 0; i < r; ++i) z[i] = {0.0, grid.nodes[k][i]};
      terms[k] = grid.weights[k] * h[k] * sph.value(nu, z);
    }
    std::vector<double> re(terms.size()), im(terms.size());
    for (std::size_t k = 0; k < terms.size(); ++k) {
      re[k] = terms[k].real();
      im[k] = terms[k].imag();
    }
    const double nn = std::exp(vt.log_n(nu));
    out.profile.mass[nu] = nn * pairwise_sum(re.data(), re.size());
    out.profile.imag_residue = std::max(out.profile.imag_residue, std::abs(nn * pairwise_sum(im.data(), im.size())));
  }
  return out;
}

std::map<int, double> convergence_error(const std::map<int, CaloricState>& u, const std::map<int, RadialFunction>& k,
                                        double massval, double p, const VolumeTable& vt) {
  std::map<int, double> out;
  for (const auto& [n, state] : u) {
    auto it = k.find(n);
    if (it == k.end()) continue;
    const auto diff = combine(1, state.profile, -massval, it->second);
    out[n] = std::exp(log_lp_norm(diff, vt, p) - log_lp_norm(it->second, vt, p));
  }
  return out;
}

RegionSplit region_split_error(const RadialFunction& u, const RadialFunction& k, double massval, double p,
                               const std::vector<LatticePoint>& region, const VolumeTable& vt) {
  auto inside = [&](const LatticePoint& l) { return std::binary_search(region.begin(), region.end(), l); };
  const double norm_k = log_lp_norm(k, vt, p);
  const auto diff = combine(1, u, -massval, k);
  RegionSplit out;
  out.inside_err = std::exp(log_lp_norm(diff, vt, p, inside) - norm_k);
  out.outside_u = std::exp(log_lp_norm(u, vt, p, [&](const LatticePoint& l) { return !inside(l); }) - norm_k);
  return out;
}

double log_weight(const VolumeTable& vt, const LatticePoint& lambda, double p) {
  if (!(p >= 1)) throw Error(ErrorCode::InvalidParameters, "p must be at least 1");
  return (p < 2 ? 2 / p : 1.0) * vt.log_chi0_half(lambda);
}

Membership weighted_membership(const VolumeTable& vt, const RadialFunction& f, double p) {
  std::vector<double> logs;
  for (const auto& [l, a] : f.mass)
    if (a != 0) logs.push_back(std::log(std::abs(a)) + log_weight(vt, l, p));
  return {true, std::exp(log_sum_exp(logs)), -kInfinity};
}

Membership weighted_membership(const RootSystemData& rs, const VolumeTable& vt,
                               const std::function<double(const LatticePoint&)>& log_f, double p, int radius) {
  if (radius < 8) throw Error(ErrorCode::InvalidParameters, "membership test needs radius of at least 8");
  std::vector<double> all, xs, ys;
  for (int s = 0; s <= radius; ++s) {
    std::vector<double> logs;
    for (const auto& l : shell(rs.rank, s)) logs.push_back(vt.log_n(l) + log_f(l) + log_weight(vt, l, p));
    const double ls = log_sum_exp(logs);
    all.push_back(ls);
    if (2 * s >= radius) {
      xs.push_back(s);
      ys.push_back(ls);
    }
  }
  Membership m;
  m.shell_rate = fit_line(xs, ys).slope;
  // shells that stop shrinking exponentially mean the weighted sum diverges
  m.member = m.shell_rate < -1e-2;
  m.norm = std::exp(log_sum_exp(all));
  return m;
}

RadialFunction convolve(StructureTable& table, const RadialFunction& f, const RadialFunction& K) {
  RadialFunction out;
  out.rank = table.root_system().rank;
  for (const auto& [l, a] : K.mass) {
    if (a == 0) continue;
    for (const auto& [nu, b] : f.mass) {
      if (b == 0) continue;
      for (const auto& [nu2, c] : table.product(l, nu)) out.mass[nu2] += a * b * c.get_d();
    }
  }
  return out;
}

ExactRadial convolve_exact(StructureTable& table, const ExactRadial& f, const ExactRadial& K) {
  ExactRadial out;
  out.rank = table.root_system().rank;
  for (const auto& [l, a] : K.mass) {
    if (a == 0) continue;
    for (const auto& [nu, b] : f.mass) {
      if (b == 0) continue;
      const Rational w = a * b;
      for (const auto& [nu2, c] : table.product(l, nu)) out.mass[nu2] += w * c;
    }
  }
  for (auto it = out.mass.begin(); it != out.mass.end();) it = it->second == 0 ? out.mass.erase(it) : std::next(it);
  return out;
}

double herz_check(StructureTable& table, SphericalCache& sph, const RadialFunction& f, const RadialFunction& K,
                  double p) {
  if (!(p > 1 && p <= 2)) throw Error(ErrorCode::InvalidParameters, "Herz check needs p in (1, 2]");
  const auto& rs = table.root_system();
  VolumeTable vt(rs, table.qparams());
  RadialFunction abs_k = K;
  for (auto& [l, a] : abs_k.mass) a = std::abs(a);
  const double hk = mass(sph, abs_k, p);  // ℋ(|K|)(s_p), using P_λ(−s_p) = P_λ(s_p)
  const double lhs = log_lp_norm(convolve(table, f, K), vt, p);
  const double rhs = std::log(hk) + log_lp_norm(f, vt, p);
  // relative margin: both sides scale with N_λ, which is large even for small supports
  return 1 - std::exp(lhs - rhs);
}

GroundStateNorm ground_state_norm(const RootSystemData& rs, const QParams& q, double p, double rel_tol,
                                  int max_radius, std::map<LatticePoint, double>* cache) {
  if (!(p >= 1 && p < 2)) throw Error(ErrorCode::InvalidParameters, "Kunze-Stein constant needs p in [1, 2)");
  GroundStateNorm out;
  if (p == 1) {
    out.head = 1;  // sup Φ = Φ(0) = 1
    return out;
  }
  const double pc = conjugate_exponent(p);
  const VolumeTable vt(rs, q);
  const double log_w = std::log(poincare(rs, q).get_d());
  auto envelope_term = [&](const LatticePoint& l, double a) {
    // N_λ ≤ W(q⁻¹)χ0(λ); Φ(λ) ≤ a·Π(1+⟨λ,α⟩)χ0(λ)^{-1/2}
    return log_w + pc * (std::log(a) + std::log(wall_polynomial(rs, l))) - (pc - 2) * vt.log_chi0_half(l);
  };
  std::vector<double> head_logs;
  double envelope = 0;
  for (int s = 0; s <= max_radius; ++s) {
    for (const auto& l : shell(rs.rank, s)) {
      double phi;
      if (cache && cache->count(l)) {
        phi = cache->at(l);
      } else {
        phi = ground_state(rs, q, l);
        if (cache) (*cache)[l] = phi;
      }
      envelope = std::max(envelope, phi * std::exp(vt.log_chi0_half(l)) / wall_polynomial(rs, l));
      head_logs.push_back(vt.log_n(l) + pc * std::log(phi));
    }
    if (s < 4) continue;
    const double head = log_sum_exp(head_logs);
    // safety factor on the fitted envelope constant
    const double a = 1.25 * envelope;
    std::vector<double> tail;
    double prev = kInfinity;
    for (int t = s + 1;; ++t) {
      std::vector<double> sh;
      for (const auto& l : shell(rs.rank, t)) sh.push_back(envelope_term(l, a));
      const double ls = log_sum_exp(sh);
      tail.push_back(ls);
      if (std::isfinite(prev) && ls < prev && ls < head - 80) {
        // shell sums are log-concave in t beyond their peak: bound the rest geometrically
        const double ratio = std::exp(ls - prev);
        tail.push_back(ls + std::log(ratio / (1 - ratio)));
        break;
      }
      prev = ls;
      if (t > 100000) break;
    }
    const double lt = log_sum_exp(tail);
    if (lt - head <= std::log(rel_tol)) {
      out.head = std::exp(head / pc);
      out.tail_bound = std::exp(lt);
      out.envelope = envelope;
      out.radius = s;
      return out;
    }
  }
  throw Error(ErrorCode::TailBoundFailed, "ground-state tail not below tolerance by radius " + std::to_string(max_radius));
}

double kunze_stein_check(StructureTable& table, const GroundStateNorm& cp, const RadialFunction& f,
                         const RadialFunction& K, double p) {
  if (!(p >= 1 && p < 2)) throw Error(ErrorCode::InvalidParameters, "Kunze-Stein check needs p in [1, 2)");
  VolumeTable vt(table.root_system(), table.qparams());
  const double lhs = log_lp_norm(convolve(table, f, K), vt, 2);
  const double rhs = std::log(cp.head) + log_lp_norm(K, vt, p) + log_lp_norm(f, vt, 2);
  return 1 - std::exp(lhs - rhs);
}

RadialFunction random_profile(const RootSystemData& rs, const QParams& q, double radius, bool nonneg, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(nonneg ? 0.0 : -1.0, 1.0);
  VolumeTable vt(rs, q);
  RadialFunction f;
  f.rank = rs.rank;
  for (const auto& l : dominant_ball(rs, radius)) f.mass[l] = dist(gen) * std::exp(vt.log_n(l));
  return f;
}

}  // namespace hkb
