#include "hkb/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <set>

#include "hkb/error.hpp"

namespace hkb {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

int next_pow2(int x) {
  int r = 1;
  while (r < x) r <<= 1;
  return r;
}

double dot_eta(const std::vector<double>& eta, const LatticePoint& p, int rank) {
  double s = 0;
  for (int i = 0; i < rank; ++i) s += eta[i] * p[i];
  return s;
}

// Index of lattice point μ in an R^rank box, wrapping modulo R.
std::size_t wrap_index(const LatticePoint& mu, int rank, int R) {
  std::size_t idx = 0, stride = 1;
  for (int i = 0; i < rank; ++i) {
    int m = ((mu[i] % R) + R) % R;
    idx += static_cast<std::size_t>(m) * stride;
    stride *= static_cast<std::size_t>(R);
  }
  return idx;
}

LatticePoint unwrap_index(std::size_t idx, int rank, int R) {
  LatticePoint p;
  for (int i = 0; i < rank; ++i) {
    int m = static_cast<int>(idx % static_cast<std::size_t>(R));
    idx /= static_cast<std::size_t>(R);
    p[i] = m <= R / 2 ? m : m - R;
  }
  return p;
}

std::size_t box_size(int rank, int R) {
  std::size_t n = 1;
  for (int i = 0; i < rank; ++i) n *= static_cast<std::size_t>(R);
  return n;
}

struct DirectEvaluator {
  const RootSystemData& rs;
  CFactors<double> cf;
  std::vector<double> eta;
  double w_total;

  DirectEvaluator(const RootSystemData& r, const QParams& q)
      : rs(r), cf(c_factors<double>(r, q)), eta(hkb::eta(r, q)), w_total(poincare(r, q).get_d()) {}

  std::complex<double> c_at(const std::complex<double>* z) const {
    std::complex<double> num(1), den(1);
    for (std::size_t a = 0; a < cf.num.size(); ++a) {
      std::complex<double> u(0);
      for (int i = 0; i < rs.rank; ++i) u += z[i] * static_cast<double>(cf.coroot[a][i]);
      std::complex<double> x = std::exp(-u);
      std::complex<double> d = 1.0 - cf.den[a] * x;
      if (std::abs(d) < 1e-14) throw Error(ErrorCode::SingularPoint, "c-function denominator vanishes");
      num *= 1.0 - cf.num[a] * x;
      den *= d;
    }
    return num / den;
  }

  // Σ_w c(wz) e^{⟨wz,λ⟩ − log_shift}
  std::complex<double> weyl_sum(const LatticePoint& lambda, const std::complex<double>* z, double log_shift) const {
    std::complex<double> total(0);
    std::complex<double> wz[kMaxRank];
    for (int w = 0; w < rs.order(); ++w) {
      const auto& m = rs.weyl[w].on_roots;
      std::complex<double> e(-log_shift);
      for (int j = 0; j < rs.rank; ++j) {
        wz[j] = 0;
        for (int i = 0; i < rs.rank; ++i) wz[j] += static_cast<double>(m[j][i]) * z[i];
        e += wz[j] * static_cast<double>(lambda[j]);
      }
      total += c_at(wz) * std::exp(e);
    }
    return total;
  }

  std::complex<double> spherical(const LatticePoint& lambda, const std::complex<double>* z) const {
    double half_log_chi = dot_eta(eta, lambda, rs.rank);
    return weyl_sum(lambda, z, half_log_chi) / w_total;
  }
};

}  // namespace

std::complex<double> ExpPoly::eval(const CVec& z) const {
  std::complex<double> s(0);
  for (const auto& [mu, c] : terms) {
    std::complex<double> e(0);
    for (int i = 0; i < rank; ++i) e += z[i] * static_cast<double>(mu[i]);
    s += c * std::exp(e);
  }
  return s;
}

double ExpPoly::eval(const std::vector<double>& x) const {
  double s = 0;
  for (const auto& [mu, c] : terms) {
    double e = 0;
    for (int i = 0; i < rank; ++i) e += x[i] * mu[i];
    s += c * std::exp(e);
  }
  return s;
}

nlohmann::json ExpPoly::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [mu, c] : terms) {
    nlohmann::json t;
    t["mu"] = std::vector<int>(mu.c.begin(), mu.c.begin() + rank);
    t["coeff"] = c;
    auto it = counts.find(mu);
    if (it != counts.end()) t["count"] = it->second.get_str();
    out.push_back(t);
  }
  return out;
}

ExpPoly ExpPoly::from_json(const nlohmann::json& j, int rank) {
  ExpPoly p;
  p.rank = rank;
  for (const auto& t : j) {
    LatticePoint mu;
    auto v = t.at("mu").get<std::vector<int>>();
    for (int i = 0; i < rank; ++i) mu[i] = v.at(i);
    p.terms[mu] = t.at("coeff").get<double>();
    if (t.contains("count")) p.counts[mu] = Integer(t.at("count").get<std::string>());
  }
  return p;
}

std::complex<double> c_function(const RootSystemData& rs, const QParams& q, const CVec& z) {
  DirectEvaluator ev(rs, q);
  return ev.c_at(z.data());
}

std::complex<double> spherical_direct(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda,
                                      const CVec& z) {
  DirectEvaluator ev(rs, q);
  return ev.spherical(lambda, z.data());
}

std::vector<Rational> grid_offset(const RootSystemData& rs) {
  constexpr int kDen = 24;
  std::vector<Rational> best(rs.rank, Rational(1, 2));
  Rational best_score = -1;
  std::vector<int> j(rs.rank, 1);
  std::function<void(int)> rec = [&](int i) {
    if (i == rs.rank) {
      Rational score = -1;
      for (const auto& pr : rs.pos_roots) {
        int g = 0;
        Rational s = 0;
        for (int k = 0; k < rs.rank; ++k) {
          g = std::gcd(g, std::abs(pr.coroot[k]));
          s += Rational(j[k] * pr.coroot[k], kDen);
        }
        // distance from ⟨o, α∨⟩ to gZ
        Rational t = s / g;
        Integer fl;
        mpz_fdiv_q(fl.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
        Rational frac = t - Rational(fl);
        Rational d = std::min<Rational>(frac, Rational(1 - frac)) * g;
        if (score < 0 || d < score) score = d;
      }
      if (score > best_score) {
        best_score = score;
        for (int k = 0; k < rs.rank; ++k) best[k] = Rational(j[k], kDen);
      }
      return;
    }
    for (int v = 1; v < kDen; ++v) {
      j[i] = v;
      rec(i + 1);
    }
  };
  rec(0);
  return best;
}

namespace {

// Contour used for count extraction: Re z = −kCountShift·η makes coefficients ≈ m_λ(μ).
constexpr double kCountShift = 63.0 / 64.0;

// DFT coefficients of z ↦ N_λ P_λ(−s·η + iθ) sampled on the offset grid, or of P_λ itself when
// `normalized`. Every phase is an integer multiple of 2π/R up to a constant, so it comes from a table.
template <class T>
std::vector<Cplx<T>> sample_coefficients(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda,
                                         int R, const std::vector<Rational>& offset, double shift,
                                         bool normalized = false) {
  using std::exp;
  using std::log;
  const int r = rs.rank;
  const auto f = c_factors<T>(rs, q);
  const auto eta_t = eta_as<T>(rs, q);
  std::vector<T> s_re(r), off(r);
  T half_log_chi = 0;
  for (int i = 0; i < r; ++i) {
    s_re[i] = -T(shift) * eta_t[i];
    half_log_chi += eta_t[i] * lambda[i];
    off[i] = from_rational<T>(offset[i]);
  }
  // N_λ χ0(λ)^{-1/2} / W(q⁻¹) = χ0(λ)^{1/2} / W_λ(q⁻¹)
  const T log_pref = normalized ? -half_log_chi - log(from_rational<T>(poincare(rs, q)))
                                : half_log_chi - log(from_rational<T>(poincare(rs, q, lambda)));
  const T two_pi = 2 * pi_v<T>();
  std::vector<Cplx<T>> table(R);
  for (int m = 0; m < R; ++m) table[m] = cexp(Cplx<T>(T(0), two_pi * T(m) / T(R)));

  struct Term {
    std::array<int, kMaxRank> g{};
    Cplx<T> base;
  };
  const int nw = rs.order(), na = static_cast<int>(f.num.size());
  std::vector<Term> lam_terms(nw), root_terms(static_cast<std::size_t>(nw * na));
  for (int w = 0; w < nw; ++w) {
    const auto& m = rs.weyl[w].on_roots;
    auto pull = [&](const auto& v, Term& t, T sign, T extra) {
      T re = 0, ph = 0;
      for (int i = 0; i < r; ++i) {
        int gi = 0;
        for (int j = 0; j < r; ++j) gi += m[j][i] * v[j];
        t.g[i] = gi;
        re += s_re[i] * gi;
        ph += off[i] * gi;
      }
      t.base = cexp(Cplx<T>(sign * re + extra, sign * two_pi * ph / T(R)));
    };
    pull(lambda.c, lam_terms[w], T(1), log_pref);
    for (int a = 0; a < na; ++a) pull(f.coroot[a], root_terms[w * na + a], T(-1), T(0));
  }

  const std::size_t n = box_size(r, R);
  std::vector<Cplx<T>> data(n);
  std::array<int, kMaxRank> k{};
  const Cplx<T> one(T(1));
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t rem = idx;
    for (int i = 0; i < r; ++i) {
      k[i] = static_cast<int>(rem % static_cast<std::size_t>(R));
      rem /= static_cast<std::size_t>(R);
    }
    auto phase = [&](const std::array<int, kMaxRank>& g) {
      long s = 0;
      for (int i = 0; i < r; ++i) s += static_cast<long>(g[i]) * k[i];
      return static_cast<int>(((s % R) + R) % R);
    };
    Cplx<T> acc;
    for (int w = 0; w < nw; ++w) {
      Cplx<T> num = one, den = one;
      for (int a = 0; a < na; ++a) {
        const Term& t = root_terms[w * na + a];
        Cplx<T> x = t.base * table[phase(t.g)].conj();
        num *= one - x * f.num[a];
        den *= one - x * f.den[a];
      }
      const Term& lt = lam_terms[w];
      acc += lt.base * table[phase(lt.g)] * num / den;
    }
    data[idx] = acc;
  }
  Fft<T> fft(R);
  fft.transform(data, r, false);
  const T inv_n = T(1) / T(static_cast<double>(n));
  for (std::size_t idx = 0; idx < n; ++idx) {
    LatticePoint mu = unwrap_index(idx, r, R);
    T ph = 0;
    for (int i = 0; i < r; ++i) ph -= two_pi * off[i] * mu[i] / T(R);
    data[idx] = data[idx] * cexp(Cplx<T>(T(0), ph)) * inv_n;
  }
  return data;
}

Integer round_to_integer(const Extended& x) {
  std::string s = boost::multiprecision::round(x).str(0, std::ios_base::fixed);
  auto dot = s.find('.');
  if (dot != std::string::npos) s.resize(dot);
  return Integer(s);
}

template <class T>
bool extract_counts(const RootSystemData& rs, const QParams& q, SphericalExpansion& out,
                    const std::set<LatticePoint>& support, const std::vector<Rational>& offset) {
  using std::abs;
  using std::exp;
  const auto eta_d = eta(rs, q);
  const auto eta_t = eta_as<T>(rs, q);
  auto data = sample_coefficients<T>(rs, q, out.lambda, out.resolution, offset, kCountShift);
  const int R = out.resolution;
  double residual = 0;
  Integer total = 0;
  bool nonneg = true;
  out.poly.counts.clear();
  out.raw.clear();
  for (std::size_t idx = 0; idx < data.size(); ++idx) {
    LatticePoint mu = unwrap_index(idx, rs.rank, R);
    // coefficient here is m(μ)·χ0(μ)^{(1−shift)/2}
    T de = 0;
    for (int i = 0; i < rs.rank; ++i) de += eta_t[i] * mu[i];
    T scale = exp(T(1 - kCountShift) * de);
    T cnt = data[idx].re / scale;
    T cim = data[idx].im / scale;
    bool member = support.count(mu) > 0;
    Integer r = member ? round_to_integer(Extended(cnt)) : Integer(0);
    T diff = cnt - T(from_rational<Extended>(Rational(r)));
    residual = std::max({residual, static_cast<double>(abs(diff)), static_cast<double>(abs(cim))});
    if (!member) continue;
    if (r < 0) nonneg = false;
    if (r > 0) out.poly.counts[mu] = r;
    total += r;
    out.raw[mu] = static_cast<double>(data[idx].re) * std::exp(kCountShift * dot_eta(eta_d, mu, rs.rank));
  }
  out.residual = residual;
  out.integral = residual < 1e-6 && nonneg && out.n_lambda.get_den() == 1 && Rational(total) == out.n_lambda;
  return out.integral;
}

}  // namespace

SphericalExpansion spherical_expansion(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda,
                                       int min_resolution) {
  if (!is_dominant(lambda, rs.rank))
    throw Error(ErrorCode::NonDominant, "spherical expansion needs dominant lambda");
  SphericalExpansion out;
  out.lambda = lambda;
  out.n_lambda = n_lambda(rs, q, lambda);
  out.poly.rank = rs.rank;

  auto sat = saturation(rs, lambda);
  std::set<LatticePoint> support(sat.begin(), sat.end());
  int span = 0;
  for (const auto& mu : sat)
    for (int i = 0; i < rs.rank; ++i) span = std::max(span, std::abs(mu[i]));
  out.resolution = std::max({16, next_pow2(2 * span + 2), min_resolution});
  const auto offset = grid_offset(rs);

  out.precision = Precision::Double;
  if (!extract_counts<double>(rs, q, out, support, offset)) {
    out.precision = Precision::Extended;
    extract_counts<Extended>(rs, q, out, support, offset);
  }
  const auto eta_d = eta(rs, q);
  if (out.integral) {
    for (const auto& [mu, m] : out.poly.counts)
      out.poly.terms[mu] = m.get_d() * std::exp(dot_eta(eta_d, mu, rs.rank));
  } else {
    out.poly.counts.clear();
    out.poly.terms = out.raw;
  }
  return out;
}

ExpPoly spherical_expoly(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda) {
  auto e = spherical_expansion(rs, q, lambda);
  if (!e.integral)
    throw Error(ErrorCode::ExtractionFailed, "integer rounding residual " + std::to_string(e.residual) + " at " +
                                                 to_string(lambda, rs.rank));
  return e.poly;
}

double ground_state(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda) {
  if (!is_dominant(lambda, rs.rank)) throw Error(ErrorCode::NonDominant, "ground state needs dominant lambda");
  if (lambda == LatticePoint{}) return 1.0;
  auto sat = saturation(rs, lambda);
  int span = 0;
  for (const auto& mu : sat)
    for (int i = 0; i < rs.rank; ++i) span = std::max(span, std::abs(mu[i]));
  const int R = std::max(16, next_pow2(2 * span + 2));
  // on Re z = 0 all coefficients are positive, so their sum is well conditioned
  auto data = sample_coefficients<double>(rs, q, lambda, R, grid_offset(rs), 0.0, true);
  std::vector<double> vals;
  for (const auto& mu : sat) vals.push_back(data[wrap_index(mu, rs.rank, R)].re);
  std::sort(vals.begin(), vals.end());
  return pairwise_sum(vals.data(), vals.size());
}

std::vector<LatticePoint> dominant_ball(const RootSystemData& rs, double radius) {
  std::vector<LatticePoint> out;
  Rational r2(static_cast<long>(std::floor(radius * radius * 1e6)), 1000000);
  std::vector<int> bound(rs.rank);
  for (int i = 0; i < rs.rank; ++i)
    bound[i] = static_cast<int>(std::floor(std::sqrt(radius * radius / rs.gram[i][i].get_d()))) + 1;
  LatticePoint p;
  std::function<void(int)> rec = [&](int i) {
    if (i == rs.rank) {
      if (rs.inner(p, p) <= r2) out.push_back(p);
      return;
    }
    for (int v = 0; v <= bound[i]; ++v) {
      p[i] = v;
      rec(i + 1);
    }
    p[i] = 0;
  };
  rec(0);
  return out;
}

CVec spherical_on_grid(const SpectralGrid& grid, const SphericalExpansion& e) {
  const int R = grid.resolution;
  const int rank = grid.rank();
  const std::size_t n = box_size(rank, R);
  std::vector<Cplx<double>> a(n);
  for (const auto& [mu, c] : e.poly.terms) {
    double ph = 0;
    for (int i = 0; i < rank; ++i) ph += kTwoPi * grid.offset[i].get_d() * mu[i] / R;
    a[wrap_index(mu, rank, R)] += Cplx<double>(c * std::cos(ph), c * std::sin(ph));
  }
  Fft<double> fft(R);
  fft.transform(a, rank, true);
  const double inv_n = 1.0 / e.n_lambda.get_d();
  CVec out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = std::complex<double>(a[k].re, a[k].im) * inv_n;
  return out;
}

CVec spherical_on_grid(const SpectralGrid& grid, const LatticePoint& lambda) {
  return spherical_on_grid(grid, spherical_expansion(grid.rs, grid.q, lambda));
}

std::complex<double> plancherel_pair(const SpectralGrid& grid, const CVec& a, const CVec& b) {
  const std::size_t n = grid.size();
  std::vector<double> re(n), im(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> v = grid.weights[k] * a[k] * std::conj(b[k]);
    re[k] = v.real();
    im[k] = v.imag();
  }
  return {pairwise_sum(re.data(), n), pairwise_sum(im.data(), n)};
}

double orthogonality_residual(const SpectralGrid& grid, double radius) {
  auto lams = dominant_ball(grid.rs, radius);
  std::vector<CVec> vals;
  std::vector<double> inv_n;
  for (const auto& l : lams) {
    auto e = spherical_expansion(grid.rs, grid.q, l);
    vals.push_back(spherical_on_grid(grid, e));
    inv_n.push_back(1.0 / e.n_lambda.get_d());
  }
  double worst = 0;
  for (std::size_t i = 0; i < lams.size(); ++i)
    for (std::size_t j = i; j < lams.size(); ++j) {
      std::complex<double> ip = plancherel_pair(grid, vals[i], vals[j]);
      double target = i == j ? inv_n[i] : 0.0;
      worst = std::max(worst, std::abs(ip - target));
    }
  return worst;
}

SpectralGrid build_grid(const RootSystemData& rs, const QParams& q, int resolution, int test_radius,
                        int max_resolution) {
  if (!q.standard)
    throw Error(ErrorCode::ExceptionalCaseUnsupported, "Plancherel grid requires the standard case");
  if (resolution < 16) throw Error(ErrorCode::InvalidParameters, "grid resolution must be at least 16");
  const int cap = max_resolution > 0 ? max_resolution : (rs.rank == 1 ? 1 << 14 : 1024);
  SpectralGrid g;
  g.rs = rs;
  g.q = q;
  g.offset = grid_offset(rs);
  DirectEvaluator ev(rs, q);
  const double scale = poincare(rs, q).get_d() / rs.order();
  for (int R = next_pow2(resolution); R <= cap; R *= 2) {
    g.resolution = R;
    const std::size_t n = box_size(rs.rank, R);
    g.nodes.assign(n, {});
    g.weights.assign(n, 0.0);
    std::complex<double> z[kMaxRank];
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t rem = k;
      for (int i = 0; i < rs.rank; ++i) {
        double kk = static_cast<double>(rem % static_cast<std::size_t>(R));
        rem /= static_cast<std::size_t>(R);
        g.nodes[k][i] = kTwoPi * (kk + g.offset[i].get_d()) / R;
        z[i] = std::complex<double>(0, g.nodes[k][i]);
      }
      g.weights[k] = scale / static_cast<double>(n) / std::norm(ev.c_at(z));
    }
    g.raw_mass = pairwise_sum(g.weights.data(), n);
    g.rescale = 1.0;
    if (std::abs(g.raw_mass - 1.0) > 1e-10) continue;
    g.orthogonality_residual = orthogonality_residual(g, test_radius);
    if (g.orthogonality_residual <= 1e-10) return g;
  }
  throw Error(ErrorCode::ResolutionCapExceeded, "Plancherel grid did not validate up to resolution " +
                                                    std::to_string(cap));
}

}  // namespace hkb
