#include "hkb/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hkb/error.hpp"

namespace hkb {

namespace {

double dot(const DVec& x, const LatticePoint& v) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * v[static_cast<int>(i)];
  return s;
}

// Cholesky factor of the coweight gram, so that y = Lᵀx is Euclidean.
DMat euclidean_frame(const RootSystemData& rs) {
  const int r = rs.rank;
  DMat L(r, DVec(r, 0.0));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j <= i; ++j) {
      double s = rs.gram[i][j].get_d();
      for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      L[i][j] = (i == j) ? std::sqrt(s) : s / L[j][j];
    }
  return L;
}

std::array<double, 2> to_frame(const DMat& L, const DVec& x) {
  std::array<double, 2> y{0, 0};
  for (std::size_t j = 0; j < x.size(); ++j)
    for (std::size_t i = 0; i < x.size(); ++i) y[j] += L[i][j] * x[i];
  return y;
}

DVec as_dvec(const LatticePoint& p, int rank) {
  DVec v(rank);
  for (int i = 0; i < rank; ++i) v[i] = p[i];
  return v;
}

long cross(const LatticePoint& o, const LatticePoint& a, const LatticePoint& b) {
  return static_cast<long>(a[0] - o[0]) * (b[1] - o[1]) - static_cast<long>(a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew monotone chain. Convexity is affine, so integer coordinates suffice; the orientation is
// counter-clockwise in coweight coordinates, which the positive-determinant frame preserves.
std::vector<LatticePoint> convex_hull(std::vector<LatticePoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const LatticePoint& a, const LatticePoint& b) {
    return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<LatticePoint> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

bool spans(const std::vector<LatticePoint>& exps, int rank) {
  if (exps.size() < 2) return false;
  if (rank == 1) return true;
  for (std::size_t i = 1; i < exps.size(); ++i)
    for (std::size_t j = i + 1; j < exps.size(); ++j)
      if (cross(exps[0], exps[i], exps[j]) != 0) return true;
  return false;
}

struct Weighted {
  std::vector<double> p;
  double log_norm;
};

Weighted softmax(const KappaModel& km, const DVec& x) {
  Weighted w;
  double mx = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  for (const auto& [v, c] : km.kappa_poly.terms) {
    logs.push_back(std::log(c) + dot(x, v));
    mx = std::max(mx, logs.back());
  }
  double s = 0;
  for (double l : logs) s += std::exp(l - mx);
  w.log_norm = mx + std::log(s);
  for (double l : logs) w.p.push_back(std::exp(l - w.log_norm));
  return w;
}

}  // namespace

nlohmann::json WalkSpec::to_json(int rank) const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& [l, c] : coeffs)
    list.push_back({{"lambda", std::vector<int>(l.c.begin(), l.c.begin() + rank)}, {"c", to_string(c)}});
  return {{"coeffs", list}};
}

WalkSpec WalkSpec::from_json(const nlohmann::json& j, int rank) {
  WalkSpec w;
  if (!j.is_object() || !j.contains("coeffs") || !j.at("coeffs").is_array())
    throw Error(ErrorCode::InvalidConfig, "walk needs a 'coeffs' list");
  for (const auto& [key, _] : j.items())
    if (key != "coeffs") throw Error(ErrorCode::InvalidConfig, "unknown walk key '" + key + "'");
  for (const auto& t : j.at("coeffs")) {
    for (const auto& [key, _] : t.items())
      if (key != "lambda" && key != "c") throw Error(ErrorCode::InvalidConfig, "unknown walk entry key '" + key + "'");
    auto coords = t.at("lambda").get<std::vector<int>>();
    if (static_cast<int>(coords.size()) != rank)
      throw Error(ErrorCode::InvalidConfig, "walk lambda has wrong rank");
    LatticePoint l;
    for (int i = 0; i < rank; ++i) l[i] = coords[i];
    const auto& c = t.at("c");
    Rational v = c.is_string() ? parse_rational(c.get<std::string>()) : parse_rational(c.dump());
    w.coeffs[l] += v;
  }
  return w;
}

void validate_walk(const RootSystemData& rs, const WalkSpec& walk) {
  if (walk.coeffs.empty()) throw Error(ErrorCode::InvalidParameters, "walk has no coefficients");
  Rational total = 0;
  for (const auto& [l, c] : walk.coeffs) {
    if (!is_dominant(l, rs.rank))
      throw Error(ErrorCode::NonDominant, "walk support must be dominant: " + to_string(l, rs.rank));
    if (c <= 0) throw Error(ErrorCode::InvalidParameters, "walk coefficients must be positive");
    total += c;
  }
  if (total != 1) throw Error(ErrorCode::InvalidParameters, "walk coefficients sum to " + to_string(total));
}

KappaModel build_kappa(const RootSystemData& rs, const QParams& q, const WalkSpec& walk) {
  validate_walk(rs, walk);
  KappaModel km;
  km.rs = rs;
  km.q = q;
  km.walk = walk;
  for (const auto& [l, c] : walk.coeffs) {
    auto e = spherical_expoly(rs, q, l);
    Rational n = n_lambda(rs, q, l);
    for (const auto& [v, m] : e.counts) km.weights[v] += c * Rational(m) / n;
  }
  const auto eta_d = eta(rs, q);
  std::vector<double> raw;
  for (const auto& [v, w] : km.weights) raw.push_back(w.get_d() * std::exp(dot(eta_d, v)));
  std::vector<double> sorted = raw;
  std::sort(sorted.begin(), sorted.end());
  km.rho = pairwise_sum(sorted.data(), sorted.size());
  km.kappa_poly.rank = rs.rank;
  std::size_t i = 0;
  std::vector<LatticePoint> exps;
  for (const auto& [v, w] : km.weights) {
    km.kappa_poly.terms[v] = raw[i++] / km.rho;
    exps.push_back(v);
  }
  if (rs.rank == 1) {
    auto [lo, hi] = std::minmax_element(exps.begin(), exps.end());
    km.hull = {*lo, *hi};
  } else {
    km.hull = convex_hull(exps);
  }
  if (spans(exps, rs.rank)) km.B0 = hessian(km, DVec(rs.rank, 0.0));
  return km;
}

double KappaModel::log_kappa(const DVec& x) const { return softmax(*this, x).log_norm; }

DVec KappaModel::grad_log_kappa(const DVec& x) const {
  auto w = softmax(*this, x);
  DVec g(rs.rank, 0.0);
  std::size_t i = 0;
  for (const auto& [v, _] : kappa_poly.terms) {
    for (int k = 0; k < rs.rank; ++k) g[k] += w.p[i] * v[k];
    ++i;
  }
  return g;
}

std::complex<double> KappaModel::kappa(const CVec& z) const { return kappa_poly.eval(z); }

std::complex<double> KappaModel::rho_kappa(const CVec& z) const { return rho * kappa_poly.eval(z); }

DMat hessian(const KappaModel& km, const DVec& x) {
  const int r = km.rs.rank;
  std::vector<LatticePoint> exps;
  for (const auto& [v, _] : km.kappa_poly.terms) exps.push_back(v);
  if (!spans(exps, r))
    throw Error(ErrorCode::DegenerateDirection, "walk exponents do not span the coweight space");
  auto w = softmax(km, x);
  DVec mean(r, 0.0);
  for (std::size_t i = 0; i < exps.size(); ++i)
    for (int k = 0; k < r; ++k) mean[k] += w.p[i] * exps[i][k];
  DMat m(r, DVec(r, 0.0));
  for (std::size_t i = 0; i < exps.size(); ++i)
    for (int a = 0; a < r; ++a)
      for (int b = a; b < r; ++b) m[a][b] += w.p[i] * (exps[i][a] - mean[a]) * (exps[i][b] - mean[b]);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < a; ++b) m[a][b] = m[b][a];
  return m;
}

DMat hessian_pairwise(const KappaModel& km, const DVec& x) {
  const int r = km.rs.rank;
  std::vector<LatticePoint> exps;
  for (const auto& [v, _] : km.kappa_poly.terms) exps.push_back(v);
  auto w = softmax(km, x);
  DMat m(r, DVec(r, 0.0));
  for (std::size_t i = 0; i < exps.size(); ++i)
    for (std::size_t j = 0; j < exps.size(); ++j)
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b)
          m[a][b] += 0.5 * w.p[i] * w.p[j] * (exps[i][a] - exps[j][a]) * (exps[i][b] - exps[j][b]);
  return m;
}

double det(const DMat& m) {
  if (m.size() == 1) return m[0][0];
  return m[0][0] * m[1][1] - m[0][1] * m[1][0];
}

DMat inverse(const DMat& m) {
  double d = det(m);
  if (m.size() == 1) return {{1.0 / d}};
  return {{m[1][1] / d, -m[0][1] / d}, {-m[1][0] / d, m[0][0] / d}};
}

double quad_form(const DMat& m, const DVec& u) {
  double s = 0;
  for (std::size_t a = 0; a < u.size(); ++a)
    for (std::size_t b = 0; b < u.size(); ++b) s += u[a] * m[a][b] * u[b];
  return s;
}

double hull_margin(const KappaModel& km, const DVec& delta) {
  const auto L = euclidean_frame(km.rs);
  if (km.rs.rank == 1) {
    double scale = L[0][0];
    return scale * std::min(delta[0] - km.hull[0][0], km.hull[1][0] - delta[0]);
  }
  if (km.hull.size() < 3) return -std::numeric_limits<double>::infinity();
  auto p = to_frame(L, delta);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < km.hull.size(); ++i) {
    auto a = to_frame(L, as_dvec(km.hull[i], 2));
    auto b = to_frame(L, as_dvec(km.hull[(i + 1) % km.hull.size()], 2));
    double ex = b[0] - a[0], ey = b[1] - a[1];
    double c = ex * (p[1] - a[1]) - ey * (p[0] - a[0]);
    margin = std::min(margin, c / std::hypot(ex, ey));
  }
  return margin;
}

Saddle saddle(const KappaModel& km, const DVec& delta, double margin) {
  const int r = km.rs.rank;
  if (hull_margin(km, delta) < margin)
    throw Error(ErrorCode::OutsideHull, "delta is not inside the exponent hull with the required margin");
  auto objective = [&](const DVec& s) {
    double d = 0;
    for (int i = 0; i < r; ++i) d += s[i] * delta[i];
    return d - km.log_kappa(s);
  };
  Saddle out;
  out.s.assign(r, 0.0);
  double f = objective(out.s);
  for (int it = 0; it < 500; ++it) {
    DVec g = km.grad_log_kappa(out.s);
    double gnorm = 0;
    for (int i = 0; i < r; ++i) {
      g[i] = delta[i] - g[i];
      gnorm = std::max(gnorm, std::abs(g[i]));
    }
    out.iterations = it;
    if (gnorm <= 1e-12) {
      out.phi = f;
      return out;
    }
    DMat h = hessian(km, out.s);
    DVec step(r, 0.0);
    double tr = 0;
    for (int i = 0; i < r; ++i) tr += h[i][i];
    double d = det(h);
    bool newton = r == 1 ? d > 1e-300 : (d > 0 && tr * tr / d < 1e12);
    if (newton) {
      DMat hi = inverse(h);
      for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) step[a] += hi[a][b] * g[b];
    } else {
      step = g;
    }
    double slope = 0;
    for (int i = 0; i < r; ++i) slope += g[i] * step[i];
    if (newton && gnorm < 1e-10) {
      // inside the quadratic basin objective differences drown in roundoff
      double move = 0, size = 1;
      for (int i = 0; i < r; ++i) {
        out.s[i] += step[i];
        move = std::max(move, std::abs(step[i]));
        size = std::max(size, std::abs(out.s[i]));
      }
      f = objective(out.s);
      if (move <= 1e-15 * size) {
        out.phi = f;
        return out;
      }
      continue;
    }
    double t = 1;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, t *= 0.5) {
      DVec trial = out.s;
      for (int i = 0; i < r; ++i) trial[i] += t * step[i];
      double ft = objective(trial);
      auto gt = km.grad_log_kappa(trial);
      double gt_norm = 0;
      for (int i = 0; i < r; ++i) gt_norm = std::max(gt_norm, std::abs(delta[i] - gt[i]));
      if (ft >= f + 1e-4 * t * slope || gt_norm <= 0.5 * gnorm) {
        out.s = trial;
        f = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw Error(ErrorCode::NewtonDiverged, "saddle line search stalled");
  }
  throw Error(ErrorCode::NewtonDiverged, "saddle Newton iteration did not converge");
}

DeltaP sp_delta_p(const KappaModel& km, double p) {
  if (!(p >= 1)) throw Error(ErrorCode::InvalidParameters, "p must be at least 1");
  DeltaP out;
  auto e = eta(km.rs, km.q);
  double k = p < 2 ? 2.0 / p - 1.0 : 0.0;
  for (double v : e) out.s.push_back(k * v);
  out.delta = km.grad_log_kappa(out.s);
  return out;
}

}  // namespace hkb
