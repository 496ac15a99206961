#include "hkb/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>

#include "hkb/error.hpp"

namespace hkb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int next_pow2(long x) {
  int r = 1;
  while (r < x) r <<= 1;
  return r;
}

DVec as_delta(const LatticePoint& lambda, int rank, int n) {
  DVec d(rank);
  for (int i = 0; i < rank; ++i) d[i] = static_cast<double>(lambda[i]) / n;
  return d;
}

double dot(const DVec& a, const LatticePoint& v) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * v[static_cast<int>(i)];
  return s;
}

std::vector<LatticePoint> exponents(const KappaModel& km) {
  std::vector<LatticePoint> v;
  for (const auto& [e, _] : km.kappa_poly.terms) v.push_back(e);
  return v;
}

// δ pulled towards the centre of the hull when it sits on (or numerically outside) the boundary.
DVec interior_delta(const KappaModel& km, DVec delta) {
  if (hull_margin(km, delta) > 1e-7) return delta;
  const DVec c = km.grad_log_kappa(DVec(km.rs.rank, 0.0));
  for (double shrink = 1e-3; shrink < 1; shrink *= 4) {
    DVec d(delta.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = c[i] + (1 - shrink) * (delta[i] - c[i]);
    if (hull_margin(km, d) > 1e-9) return d;
  }
  return c;
}

// Rate φ(δ) extended continuously to the hull boundary.
double rate(const KappaModel& km, const DVec& delta) {
  if (hull_margin(km, delta) < -1e-12) throw Error(ErrorCode::OutsideHull, "delta outside the exponent hull");
  return saddle(km, interior_delta(km, delta), 0.0).phi;
}

// ---------------------------------------------------------------------------
// contour-shifted inversion

struct Contour {
  DVec s;
  std::vector<std::size_t> members;  // indices into the λ list
};

template <class T>
struct InversionSetup {
  const KappaModel& km;
  int n;
  int R;
  CFactors<T> cf;
  std::vector<std::pair<LatticePoint, T>> terms;  // ρκ = Σ g_v e^{⟨z,v⟩}
  std::vector<Cplx<T>> table;                     // e^{2πi m/R}
};

// log-coefficients log(N_λ k_n(λ)) for the members of one contour, with the relative noise floor.
struct ContourResult {
  std::vector<double> log_mass;  // -inf when the real part is not positive
  std::vector<double> noise;     // estimated relative error
  std::vector<double> imag;      // |Im| / |Re|
};

template <class T>
ContourResult eval_contour(const InversionSetup<T>& st, const Contour& ct, const std::vector<LatticePoint>& lambdas,
                           const VolumeTable& vt) {
  using std::exp;
  using std::log;
  const int r = st.km.rs.rank;
  const int R = st.R;
  std::vector<T> s(r);
  for (int i = 0; i < r; ++i) s[i] = T(ct.s[i]);

  // normalised weights g_v e^{⟨s,v⟩} / G(s)
  std::vector<T> gw;
  T gs = 0;
  for (const auto& [v, g] : st.terms) {
    T e = 0;
    for (int i = 0; i < r; ++i) e += s[i] * v[i];
    gw.push_back(g * exp(e));
    gs += gw.back();
  }
  for (auto& x : gw) x /= gs;
  const T log_gs = log(gs);

  const std::size_t na = st.cf.num.size();
  std::vector<T> root_base(na);
  for (std::size_t a = 0; a < na; ++a) {
    T e = 0;
    for (int i = 0; i < r; ++i) e += s[i] * st.cf.coroot[a][i];
    root_base[a] = exp(-e);
  }

  std::size_t total = 1;
  for (int i = 0; i < r; ++i) total *= static_cast<std::size_t>(R);
  std::vector<Cplx<T>> data(total);
  std::array<int, kMaxRank> k{};
  const Cplx<T> one(T(1));
  T peak = 0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (int i = 0; i < r; ++i) {
      k[i] = static_cast<int>(rem % static_cast<std::size_t>(R));
      rem /= static_cast<std::size_t>(R);
    }
    auto phase = [&](const auto& g) {
      long p = 0;
      for (int i = 0; i < r; ++i) p += static_cast<long>(g[i]) * k[i];
      return static_cast<std::size_t>(((p % R) + R) % R);
    };
    Cplx<T> g;
    for (std::size_t t = 0; t < gw.size(); ++t) g += st.table[phase(st.terms[t].first.c)] * gw[t];
    Cplx<T> pw = one, base = g;
    for (int e = st.n; e > 0; e >>= 1) {
      if (e & 1) pw *= base;
      base *= base;
    }
    Cplx<T> num = one, den = one;
    for (std::size_t a = 0; a < na; ++a) {
      Cplx<T> x = st.table[phase(st.cf.coroot[a])].conj() * root_base[a];
      num *= one - x * st.cf.num[a];
      den *= one - x * st.cf.den[a];
    }
    data[idx] = pw * den / num;
    using std::sqrt;
    peak = std::max(peak, sqrt(data[idx].norm2()));
  }
  Fft<T> fft(R);
  fft.transform(data, r, false);

  const double eps = std::is_same_v<T, double> ? 2.2e-16 : 1.9e-34;
  const double noise_abs = eps * 8 * std::log2(static_cast<double>(total)) * to_double(peak);
  const auto eta_d = eta(st.km.rs, st.km.q);
  ContourResult out;
  for (std::size_t m : ct.members) {
    const LatticePoint& lam = lambdas[m];
    std::size_t idx = 0, stride = 1;
    for (int i = 0; i < r; ++i) {
      idx += static_cast<std::size_t>(((lam[i] % R) + R) % R) * stride;
      stride *= static_cast<std::size_t>(R);
    }
    double re = to_double(data[idx].re / T(static_cast<double>(total)));
    double im = to_double(data[idx].im / T(static_cast<double>(total)));
    T shift = T(st.n) * log_gs;
    for (int i = 0; i < r; ++i) shift -= s[i] * lam[i];
    double lm = re > 0 ? vt.log_n(lam) - dot(eta_d, lam) + to_double(shift) + std::log(re) : -kInf;
    out.log_mass.push_back(lm);
    out.noise.push_back(re > 0 ? noise_abs / to_double(T(static_cast<double>(total))) / re : kInf);
    out.imag.push_back(re != 0 ? std::abs(im / re) : kInf);
  }
  return out;
}

template <class T>
RadialFunction spectral_impl(const KappaModel& km, int n, const std::vector<LatticePoint>& lambdas,
                             const SpectralOptions& opts) {
  const auto& rs = km.rs;
  const int r = rs.rank;
  const bool dbl = std::is_same_v<T, double>;
  const double budget = opts.loss_budget > 0 ? opts.loss_budget : (dbl ? 3.0 : 30.0);
  const double tol = dbl ? 1e-11 : 1e-26;
  const VolumeTable vt(rs, km.q);

  InversionSetup<T> st{km, n, 0, c_factors<T>(rs, km.q), rho_kappa_terms<T>(km), {}};
  // τ = 1 factors cancel identically
  for (std::size_t a = st.cf.num.size(); a-- > 0;)
    if (st.cf.num[a] == st.cf.den[a]) {
      st.cf.num.erase(st.cf.num.begin() + a);
      st.cf.den.erase(st.cf.den.begin() + a);
      st.cf.coroot.erase(st.cf.coroot.begin() + a);
    }
  double num_max = 1e-3;
  int coroot_max = 1;
  for (std::size_t a = 0; a < st.cf.num.size(); ++a) {
    num_max = std::max(num_max, to_double(st.cf.num[a]));
    for (int i = 0; i < r; ++i) coroot_max = std::max(coroot_max, std::abs(st.cf.coroot[a][i]));
  }
  if (num_max >= 1) throw Error(ErrorCode::InvalidParameters, "spectral inversion needs τ > 1");
  long width = 0;
  for (int i = 0; i < r; ++i) {
    int lo = 0, hi = 0;
    for (const auto& [v, _] : st.terms) {
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
    }
    width = std::max<long>(width, static_cast<long>(n) * (hi - lo));
  }
  const double digits = dbl ? 18 : 36;
  const long tail = static_cast<long>(std::ceil(digits * std::log(10.0) / -std::log(num_max))) * coroot_max;
  st.R = std::max(next_pow2(width + tail + 1), opts.min_resolution);
  if (st.R > (r == 1 ? (1 << 20) : (1 << 11)))
    throw Error(ErrorCode::ResolutionCapExceeded, "spectral inversion resolution exceeds the cap");

  auto make_table = [&](int R) {
    std::vector<Cplx<T>> tb(R);
    const T two_pi = 2 * pi_v<T>();
    for (int m = 0; m < R; ++m) tb[m] = cexp(Cplx<T>(T(0), two_pi * T(m) / T(R)));
    return tb;
  };
  st.table = make_table(st.R);

  // ideal contour per λ and its own cost n(log κ(s) − ⟨s,δ⟩)
  std::vector<DVec> ideal(lambdas.size());
  std::vector<double> own(lambdas.size());
  auto cost = [&](std::size_t m, const DVec& s) { return n * km.log_kappa(s) - dot(s, lambdas[m]); };
  for (std::size_t m = 0; m < lambdas.size(); ++m) {
    DVec s = saddle(km, interior_delta(km, as_delta(lambdas[m], r, n)), 0.0).s;
    double mx = 0;
    for (double x : s) mx = std::max(mx, std::abs(x));
    if (mx > 20)
      for (double& x : s) x *= 20 / mx;
    ideal[m] = s;
    own[m] = cost(m, s);
  }

  std::vector<double> log_mass(lambdas.size(), -kInf), noise(lambdas.size(), kInf), imag(lambdas.size(), 0);
  std::vector<bool> done(lambdas.size(), false), forced(lambdas.size(), false);
  std::vector<Contour> used;
  for (int round = 0; round < 3; ++round) {
    std::vector<Contour> contours;
    for (std::size_t m = 0; m < lambdas.size(); ++m) {
      if (done[m]) continue;
      if (forced[m]) {
        contours.push_back({ideal[m], {m}});
        continue;
      }
      double best = kInf;
      std::size_t pick = 0;
      for (std::size_t c = 0; c < contours.size(); ++c) {
        double l = cost(m, contours[c].s) - own[m];
        if (l < best) {
          best = l;
          pick = c;
        }
      }
      if (best <= budget)
        contours[pick].members.push_back(m);
      else
        contours.push_back({ideal[m], {m}});
    }
    for (const auto& ct : contours) {
      auto res = eval_contour(st, ct, lambdas, vt);
      for (std::size_t j = 0; j < ct.members.size(); ++j) {
        std::size_t m = ct.members[j];
        log_mass[m] = res.log_mass[j];
        noise[m] = res.noise[j];
        imag[m] = res.imag[j];
        if (noise[m] <= tol || forced[m]) done[m] = true;
        else forced[m] = true;
      }
      used.push_back(ct);
    }
    if (std::all_of(done.begin(), done.end(), [](bool b) { return b; })) break;
  }

  RadialFunction out;
  out.rank = r;
  for (std::size_t m = 0; m < lambdas.size(); ++m) {
    // below the noise floor the coefficient is indistinguishable from zero
    bool resolved = std::isfinite(log_mass[m]) && noise[m] < 0.1;
    out.mass[lambdas[m]] = resolved ? std::exp(log_mass[m]) : 0.0;
    if (std::isfinite(log_mass[m])) out.imag_residue = std::max(out.imag_residue, imag[m]);
  }

  if (opts.verify) {
    InversionSetup<T> st2 = st;
    st2.R = 2 * st.R;
    st2.table = make_table(st2.R);
    double worst = 0;
    for (const auto& ct : used) {
      auto res = eval_contour(st2, ct, lambdas, vt);
      for (std::size_t j = 0; j < ct.members.size(); ++j) {
        std::size_t m = ct.members[j];
        if (!std::isfinite(log_mass[m]) || !std::isfinite(res.log_mass[j])) continue;
        worst = std::max(worst, std::abs(std::expm1(res.log_mass[j] - log_mass[m])));
      }
    }
    out.error_estimate = worst;
    if (worst > 1e-3)
      throw Error(ErrorCode::PrecisionLoss, "spectral kernel changed by " + std::to_string(worst) +
                                                " under resolution doubling");
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

double RadialFunction::mass_at(const LatticePoint& lambda) const {
  auto it = mass.find(lambda);
  return it == mass.end() ? 0.0 : it->second;
}

double RadialFunction::total_mass() const {
  std::vector<double> v;
  for (const auto& [_, a] : mass) v.push_back(a);
  std::sort(v.begin(), v.end());
  return pairwise_sum(v.data(), v.size());
}

double RadialFunction::log_value(const VolumeTable& vt, const LatticePoint& lambda) const {
  double a = mass_at(lambda);
  if (a <= 0) return -kInf;
  return std::log(a) - vt.log_n(lambda);
}

double RadialFunction::value(const VolumeTable& vt, const LatticePoint& lambda) const {
  double a = mass_at(lambda);
  if (a == 0) return 0;
  return (a > 0 ? 1 : -1) * std::exp(std::log(std::abs(a)) - vt.log_n(lambda));
}

Rational ExactRadial::total_mass() const {
  Rational t = 0;
  for (const auto& [_, a] : mass) t += a;
  return t;
}

Rational ExactRadial::value(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda) const {
  auto it = mass.find(lambda);
  if (it == mass.end()) return 0;
  return it->second / n_lambda(rs, q, lambda);
}

RadialFunction ExactRadial::to_double() const {
  RadialFunction f;
  f.rank = rank;
  for (const auto& [l, a] : mass) f.mass[l] = a.get_d();
  return f;
}

std::vector<LatticePoint> reachable_support(const KappaModel& km, int n) {
  if (n < 0) throw Error(ErrorCode::InvalidParameters, "time must be nonnegative");
  const int r = km.rs.rank;
  const auto v = exponents(km);
  std::array<int, kMaxRank> lo{}, hi{};
  for (const auto& e : v)
    for (int i = 0; i < r; ++i) {
      lo[i] = std::min(lo[i], e[i]);
      hi[i] = std::max(hi[i], e[i]);
    }
  std::array<int, kMaxRank> off{}, dim{1, 1};
  for (int i = 0; i < r; ++i) {
    off[i] = -n * lo[i];
    dim[i] = n * (hi[i] - lo[i]) + 1;
  }
  auto index = [&](const LatticePoint& p) { return (p[0] + off[0]) + static_cast<std::size_t>(dim[0]) * (p[1] + off[1]); };
  std::vector<char> cur(static_cast<std::size_t>(dim[0]) * dim[1], 0), nxt;
  std::vector<LatticePoint> pts{LatticePoint{}};
  cur[index(LatticePoint{})] = 1;
  for (int step = 0; step < n; ++step) {
    nxt.assign(cur.size(), 0);
    std::vector<LatticePoint> np;
    for (const auto& p : pts)
      for (const auto& e : v) {
        LatticePoint x = p + e;
        auto& c = nxt[index(x)];
        if (!c) {
          c = 1;
          np.push_back(x);
        }
      }
    cur.swap(nxt);
    pts.swap(np);
  }
  std::vector<LatticePoint> out;
  for (const auto& p : pts)
    if (is_dominant(p, r)) out.push_back(p);
  std::sort(out.begin(), out.end());
  return out;
}

void prepare_table(StructureTable& table, const WalkSpec& walk) {
  const auto& rs = table.root_system();
  validate_walk(rs, walk);
  std::vector<LatticePoint> lambdas;
  int span = 0;
  for (const auto& [l, _] : walk.coeffs) {
    lambdas.push_back(l);
    span = std::max(span, saturation_span(rs, l));
  }
  // μ_i > span keeps every μ + v off the walls the same way; escalate if certification disagrees
  for (int threshold = span + 1;; ++threshold) {
    try {
      table.certify_stationarity(lambdas, threshold, threshold + 1);
      return;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TableIncomplete || threshold >= 3 * span + 2) throw;
    }
  }
}

StructureTable prepare_table(const RootSystemData& rs, const QParams& q, const WalkSpec& walk) {
  StructureTable table(rs, q);
  prepare_table(table, walk);
  return table;
}

std::vector<ExactRadial> heat_recursive_exact(StructureTable& table, const WalkSpec& walk, int n) {
  ExactRadial delta;
  delta.rank = table.root_system().rank;
  delta.mass[LatticePoint{}] = 1;
  return evolve_exact(table, walk, delta, n);
}

std::vector<ExactRadial> evolve_exact(StructureTable& table, const WalkSpec& walk, const ExactRadial& initial, int n) {
  if (n < 0) throw Error(ErrorCode::InvalidParameters, "time must be nonnegative");
  const auto& rs = table.root_system();
  validate_walk(rs, walk);
  for (const auto& [l, _] : walk.coeffs)
    if (!table.covers(l)) throw Error(ErrorCode::TableIncomplete, "structure table not certified for " + to_string(l, rs.rank));
  for (const auto& [l, _] : initial.mass)
    if (!is_dominant(l, rs.rank)) throw Error(ErrorCode::NonDominant, "radial profiles live on dominant coweights");
  std::vector<ExactRadial> out{initial};
  for (int m = 0; m < n; ++m) {
    ExactRadial next;
    next.rank = rs.rank;
    for (const auto& [nu, a] : out.back().mass)
      for (const auto& [l, c] : walk.coeffs) {
        if (a == 0) continue;
        const Rational w = a * c;
        for (const auto& [nu2, b] : table.product_stationary(l, nu)) next.mass[nu2] += w * b;
      }
    out.push_back(std::move(next));
  }
  return out;
}

std::map<int, RadialFunction> evolve_recursive_at(StructureTable& table, const WalkSpec& walk,
                                                  const RadialFunction& initial, const std::vector<int>& times) {
  const auto& rs = table.root_system();
  const int r = rs.rank;
  validate_walk(rs, walk);
  for (const auto& [l, _] : walk.coeffs)
    if (!table.covers(l)) throw Error(ErrorCode::TableIncomplete, "structure table not certified for " + to_string(l, r));
  std::map<int, RadialFunction> out;
  if (times.empty()) return out;
  for (int t : times)
    if (t < 0) throw Error(ErrorCode::InvalidParameters, "time must be nonnegative");
  const int n = *std::max_element(times.begin(), times.end());
  const std::set<int> wanted(times.begin(), times.end());
  const int T = table.threshold();

  // one stencil per clamped reference point: offsets ν' − ref with summed weights
  struct Stencil {
    std::vector<std::pair<LatticePoint, double>> taps;
  };
  std::map<LatticePoint, Stencil> stencils;
  int reach = 1;
  for (const auto& ref : dominant_box(r, T)) {
    std::map<LatticePoint, Rational> acc;
    for (const auto& [l, c] : walk.coeffs)
      for (const auto& [nu, b] : table.product(l, ref)) acc[nu - ref] += c * b;
    Stencil s;
    for (const auto& [off, w] : acc) {
      s.taps.emplace_back(off, w.get_d());
      for (int i = 0; i < r; ++i) reach = std::max(reach, off[i]);
    }
    stencils[ref] = std::move(s);
  }
  int start = 0;
  for (const auto& [l, _] : initial.mass) {
    if (!is_dominant(l, r)) throw Error(ErrorCode::NonDominant, "radial profiles live on dominant coweights");
    for (int i = 0; i < r; ++i) start = std::max(start, l[i]);
  }
  const int B = start + n * reach + 1;
  const std::size_t dim = static_cast<std::size_t>(B) + 1;
  const std::size_t cells = r == 1 ? dim : dim * dim;
  std::vector<double> cur(cells, 0.0), nxt(cells, 0.0);
  auto index = [&](const LatticePoint& p) { return static_cast<std::size_t>(p[0]) + (r == 2 ? dim * p[1] : 0); };
  // stencil lookup indexed by clamped coordinates
  const std::size_t tdim = static_cast<std::size_t>(T) + 1;
  std::vector<const Stencil*> by_ref(r == 1 ? tdim : tdim * tdim);
  for (const auto& [ref, s] : stencils) by_ref[ref[0] + (r == 2 ? tdim * ref[1] : 0)] = &s;

  std::array<int, kMaxRank> extent{0, 0};
  for (const auto& [l, a] : initial.mass) {
    cur[index(l)] = a;
    for (int i = 0; i < r; ++i) extent[i] = std::max(extent[i], l[i]);
  }
  auto emit = [&](int t) {
    RadialFunction f;
    f.rank = r;
    for (int y = 0; y <= (r == 2 ? extent[1] : 0); ++y)
      for (int x = 0; x <= extent[0]; ++x) {
        double a = cur[x + (r == 2 ? dim * y : 0)];
        if (a != 0) f.mass[r == 2 ? lattice_point({x, y}) : lattice_point({x})] = a;
      }
    out[t] = std::move(f);
  };
  if (wanted.count(0)) emit(0);
  for (int m = 1; m <= n; ++m) {
    std::fill(nxt.begin(), nxt.end(), 0.0);
    std::array<int, kMaxRank> ext{0, 0};
    for (int y = 0; y <= (r == 2 ? extent[1] : 0); ++y)
      for (int x = 0; x <= extent[0]; ++x) {
        const double a = cur[x + (r == 2 ? dim * y : 0)];
        if (a == 0) continue;
        LatticePoint nu;
        nu[0] = x;
        nu[1] = r == 2 ? y : 0;
        const std::size_t key = std::min(x, T) + (r == 2 ? tdim * std::min(y, T) : 0);
        for (const auto& [off, w] : by_ref[key]->taps) {
          LatticePoint p = nu + off;
          nxt[index(p)] += a * w;
          for (int i = 0; i < r; ++i) ext[i] = std::max(ext[i], p[i]);
        }
      }
    cur.swap(nxt);
    extent = ext;
    if (wanted.count(m)) emit(m);
  }
  return out;
}

std::map<int, RadialFunction> heat_recursive_at(StructureTable& table, const WalkSpec& walk,
                                                const std::vector<int>& times) {
  RadialFunction delta;
  delta.rank = table.root_system().rank;
  delta.mass[LatticePoint{}] = 1.0;
  return evolve_recursive_at(table, walk, delta, times);
}

RadialFunction heat_recursive(StructureTable& table, const WalkSpec& walk, int n) {
  return heat_recursive_at(table, walk, {n}).at(n);
}

RadialFunction heat_spectral(const KappaModel& km, const SpectralGrid& grid, int n,
                             const std::vector<LatticePoint>& lambdas, const SpectralOptions& opts) {
  if (n < 0) throw Error(ErrorCode::InvalidParameters, "time must be nonnegative");
  if (grid.rs.family != km.rs.family || grid.q.q != km.q.q)
    throw Error(ErrorCode::InvalidParameters, "grid and walk belong to different buildings");
  const int r = km.rs.rank;
  std::vector<LatticePoint> support = reachable_support(km, n);
  std::vector<LatticePoint> targets;
  RadialFunction out;
  out.rank = r;
  if (lambdas.empty()) {
    targets = support;
  } else {
    for (const auto& l : lambdas) {
      if (!is_dominant(l, r)) throw Error(ErrorCode::NonDominant, "kernel arguments must be dominant");
      if (std::binary_search(support.begin(), support.end(), l))
        targets.push_back(l);
      else
        out.mass[l] = 0.0;
    }
  }
  if (n == 0) {
    for (const auto& l : targets) out.mass[l] = l == LatticePoint{} ? 1.0 : 0.0;
    return out;
  }
  RadialFunction f = opts.precision == Precision::Extended ? spectral_impl<Extended>(km, n, targets, opts)
                                                           : spectral_impl<double>(km, n, targets, opts);
  for (auto& [l, a] : f.mass) out.mass[l] = a;
  out.imag_residue = f.imag_residue;
  out.error_estimate = f.error_estimate;
  return out;
}

RadialFunction heat_spectral_direct(const KappaModel& km, const SpectralGrid& grid, int n,
                                    const std::vector<LatticePoint>& lambdas) {
  if (n < 0) throw Error(ErrorCode::InvalidParameters, "time must be nonnegative");
  const int r = km.rs.rank;
  CVec kap(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CVec z(r);
    for (int i = 0; i < r; ++i) z[i] = {0.0, grid.nodes[k][i]};
    kap[k] = std::pow(km.rho_kappa(z), n);
  }
  RadialFunction out;
  out.rank = r;
  for (const auto& l : lambdas) {
    CVec p = spherical_on_grid(grid, l);
    std::complex<double> v = plancherel_pair(grid, kap, p);
    double nl = n_lambda(km.rs, km.q, l).get_d();
    out.mass[l] = nl * v.real();
    out.imag_residue = std::max(out.imag_residue, nl * std::abs(v.imag()));
  }
  return out;
}

double log_asym_interior(const KappaModel& km, int n, const LatticePoint& lambda, const RegimeMargins& margins) {
  const auto& rs = km.rs;
  if (n <= 0) throw Error(ErrorCode::InvalidParameters, "time must be positive");
  const DVec delta = as_delta(lambda, rs.rank, n);
  double wall = kInf;
  for (int a = 0; a < rs.num_pos(); ++a) wall = std::min(wall, static_cast<double>(rs.pairing(lambda, a)) / n);
  if (wall < margins.wall) throw Error(ErrorCode::OutsideRegime, "delta too close to a wall");
  if (hull_margin(km, delta) < margins.hull) throw Error(ErrorCode::OutsideRegime, "delta too close to the hull boundary");
  Saddle sd = saddle(km, delta);
  CVec s(rs.rank);
  for (int i = 0; i < rs.rank; ++i) s[i] = sd.s[i];
  double c = c_function(rs, km.q, s).real();
  const auto e = eta(rs, km.q);
  return -0.5 * rs.rank * std::log(n) + n * std::log(km.rho) - n * sd.phi - dot(e, lambda) -
         0.5 * std::log(det(hessian(km, sd.s))) - std::log(c);
}

double asym_interior(const KappaModel& km, int n, const LatticePoint& lambda, const RegimeMargins& margins) {
  return std::exp(log_asym_interior(km, n, lambda, margins));
}

double log_asym_origin(const KappaModel& km, int n, const LatticePoint& lambda, double max_ratio) {
  const auto& rs = km.rs;
  if (n <= 0) throw Error(ErrorCode::InvalidParameters, "time must be positive");
  if (rs.norm(lambda) / n > max_ratio) throw Error(ErrorCode::OutsideRegime, "lambda too far from the origin");
  double phi = lambda == LatticePoint{} ? 0.0 : rate(km, as_delta(lambda, rs.rank, n));
  double expo = -0.5 * rs.rank - rs.num_indivisible();
  return expo * std::log(n) + n * std::log(km.rho) - n * phi + std::log(ground_state(rs, km.q, lambda));
}

double asym_origin(const KappaModel& km, int n, const LatticePoint& lambda, double max_ratio) {
  return std::exp(log_asym_origin(km, n, lambda, max_ratio));
}

double log_heat_envelope(const KappaModel& km, int n, const LatticePoint& lambda) {
  if (n <= 0) return lambda == LatticePoint{} ? 0.0 : -kInf;
  const auto e = eta(km.rs, km.q);
  double phi = lambda == LatticePoint{} ? 0.0 : rate(km, as_delta(lambda, km.rs.rank, n));
  return -dot(e, lambda) + n * std::log(km.rho) - n * phi;
}

CheckedRatio ratio_interior(const KappaModel& km, const RadialFunction& kn, int n, const LatticePoint& lambda,
                            const LatticePoint& xi) {
  const auto& rs = km.rs;
  const LatticePoint moved = lambda + xi;
  if (!is_dominant(lambda, rs.rank) || !is_dominant(moved, rs.rank))
    throw Error(ErrorCode::OutsideRegime, "ratio arguments must be dominant");
  const VolumeTable vt(rs, km.q);
  double a = kn.log_value(vt, lambda), b = kn.log_value(vt, moved);
  if (!std::isfinite(a) || !std::isfinite(b)) throw Error(ErrorCode::OutsideRegime, "ratio outside the kernel support");
  const DVec delta = as_delta(lambda, rs.rank, n);
  if (hull_margin(km, delta) <= 0) throw Error(ErrorCode::OutsideRegime, "delta outside the exponent hull");
  Saddle sd = saddle(km, delta);
  const auto e = eta(rs, km.q);
  CheckedRatio out;
  out.measured = std::exp(b - a);
  out.predicted = std::exp(-dot(e, xi) - dot(sd.s, xi));
  out.deviation = std::abs(out.measured - out.predicted);
  return out;
}

CheckedRatio ratio_origin(const KappaModel& km, const RadialFunction& kn, const LatticePoint& lambda,
                          const LatticePoint& mu) {
  const auto& rs = km.rs;
  if (!is_dominant(lambda, rs.rank) || !is_dominant(mu, rs.rank))
    throw Error(ErrorCode::OutsideRegime, "ratio arguments must be dominant");
  const VolumeTable vt(rs, km.q);
  double a = kn.log_value(vt, lambda), b = kn.log_value(vt, mu);
  if (!std::isfinite(a) || !std::isfinite(b)) throw Error(ErrorCode::OutsideRegime, "ratio outside the kernel support");
  CheckedRatio out;
  out.measured = lambda == mu ? 1.0 : std::exp(b - a);
  out.predicted = lambda == mu ? 1.0 : ground_state(rs, km.q, mu) / ground_state(rs, km.q, lambda);
  out.deviation = std::abs(out.measured - out.predicted);
  return out;
}

Admissibility certify_admissible(StructureTable& table, const WalkSpec& walk, int n0) {
  const auto& rs = table.root_system();
  const int r = rs.rank;
  validate_walk(rs, walk);
  std::set<LatticePoint> cur{LatticePoint{}}, all;
  Admissibility out;
  for (int m = 1; m <= n0; ++m) {
    std::set<LatticePoint> next;
    for (const auto& nu : cur)
      for (const auto& [l, _] : walk.coeffs)
        for (const auto& [nu2, b] : table.product_stationary(l, nu))
          if (b > 0) next.insert(nu2);
    cur.swap(next);
    all.insert(cur.begin(), cur.end());
    if (cur.count(LatticePoint{})) out.period = std::gcd(out.period, m);
  }
  out.aperiodic = out.period == 1;
  long g = 0;
  std::vector<LatticePoint> gens(all.begin(), all.end());
  if (r == 1) {
    for (const auto& p : gens) g = std::gcd(g, static_cast<long>(std::abs(p[0])));
  } else {
    for (std::size_t i = 0; i < gens.size() && g != 1; ++i)
      for (std::size_t j = i + 1; j < gens.size() && g != 1; ++j)
        g = std::gcd(g, std::abs(static_cast<long>(gens[i][0]) * gens[j][1] - static_cast<long>(gens[i][1]) * gens[j][0]));
  }
  out.irreducible = g == 1;
  return out;
}

}  // namespace hkb
