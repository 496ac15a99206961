#include "hkb/rootsys.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "hkb/error.hpp"

namespace hkb {

namespace {

Rational dot(const RVec& a, const RVec& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

RVec scaled(const RVec& a, const Rational& k) {
  RVec r(a);
  for (auto& x : r) x *= k;
  return r;
}

RVec added(const RVec& a, const RVec& b) {
  RVec r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

RVec mat_vec(const RMat& m, const RVec& v) {
  RVec r(m.size(), Rational(0));
  for (std::size_t i = 0; i < m.size(); ++i) r[i] = dot(m[i], v);
  return r;
}

RMat mat_mul(const RMat& a, const RMat& b) {
  std::size_t n = a.size();
  RMat r(n, RVec(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) r[i][j] += a[i][k] * b[k][j];
    }
  return r;
}

RMat identity(std::size_t n) {
  RMat r(n, RVec(n, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = 1;
  return r;
}

RMat reflection(const RVec& alpha) {
  std::size_t n = alpha.size();
  Rational len2 = dot(alpha, alpha);
  RMat r = identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r[i][j] -= 2 * alpha[i] * alpha[j] / len2;
  return r;
}

RMat invert(RMat a) {
  std::size_t n = a.size();
  RMat inv = identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) throw Error(ErrorCode::InvalidParameters, "singular matrix");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    Rational d = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col || a[i][col] == 0) continue;
      Rational f = a[i][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[i][j] -= f * a[col][j];
        inv[i][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

int to_int(const Rational& x) {
  if (!is_integer(x)) throw Error(ErrorCode::InvalidParameters, "expected integer, got " + to_string(x));
  return static_cast<int>(x.get_num().get_si());
}

RVec rv(std::initializer_list<int> xs) {
  RVec r;
  for (int x : xs) r.emplace_back(x);
  return r;
}

std::vector<RVec> simple_roots_for(Family f) {
  switch (f) {
    case Family::A1: return {rv({1, -1})};
    case Family::A2: return {rv({1, -1, 0}), rv({0, 1, -1})};
    case Family::B2: return {rv({1, -1}), rv({0, 1})};
    case Family::C2: return {rv({1, -1}), rv({0, 2})};
    case Family::G2: return {rv({1, -1, 0}), rv({-2, 1, 1})};
    case Family::BC1: return {rv({1})};
    case Family::BC2: return {rv({1, -1}), rv({0, 1})};
  }
  return {};
}

std::size_t expected_order(Family f) {
  switch (f) {
    case Family::A1: return 2;
    case Family::A2: return 6;
    case Family::B2: return 8;
    case Family::C2: return 8;
    case Family::G2: return 12;
    case Family::BC1: return 2;
    case Family::BC2: return 8;
  }
  return 0;
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::A1: return "A1";
    case Family::A2: return "A2";
    case Family::B2: return "B2";
    case Family::C2: return "C2";
    case Family::G2: return "G2";
    case Family::BC1: return "BC1";
    case Family::BC2: return "BC2";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  for (Family f : {Family::A1, Family::A2, Family::B2, Family::C2, Family::G2, Family::BC1, Family::BC2})
    if (family_name(f) == name) return f;
  throw Error(ErrorCode::InvalidConfig, "unknown family '" + std::string(name) + "'");
}

bool is_bc(Family f) { return f == Family::BC1 || f == Family::BC2; }

LatticePoint lattice_point(std::initializer_list<int> coords) {
  LatticePoint p;
  int i = 0;
  for (int x : coords) p[i++] = x;
  return p;
}

LatticePoint unit_point(int i) {
  LatticePoint p;
  p[i] = 1;
  return p;
}

bool is_dominant(const LatticePoint& p, int rank) {
  for (int i = 0; i < rank; ++i)
    if (p[i] < 0) return false;
  return true;
}

int coord_sum(const LatticePoint& p, int rank) {
  int s = 0;
  for (int i = 0; i < rank; ++i) s += p[i];
  return s;
}

std::string to_string(const LatticePoint& p, int rank) {
  std::string s = "(";
  for (int i = 0; i < rank; ++i) {
    if (i) s += ",";
    s += std::to_string(p[i]);
  }
  return s + ")";
}

int RootSystemData::pairing(const LatticePoint& lambda, int root) const {
  int s = 0;
  for (int i = 0; i < rank; ++i) s += lambda[i] * pos_roots[root].coeffs[i];
  return s;
}

Rational RootSystemData::inner(const LatticePoint& a, const LatticePoint& b) const {
  Rational s = 0;
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j) s += gram[i][j] * a[i] * b[j];
  return s;
}

double RootSystemData::norm(const LatticePoint& a) const { return std::sqrt(inner(a, a).get_d()); }

double RootSystemData::norm(const std::vector<double>& x) const {
  double s = 0;
  for (int i = 0; i < rank; ++i)
    for (int j = 0; j < rank; ++j) s += gram[i][j].get_d() * x[i] * x[j];
  return std::sqrt(std::max(0.0, s));
}

LatticePoint RootSystemData::act(int w, const LatticePoint& lambda) const {
  LatticePoint r;
  const auto& m = weyl[w].on_coweights;
  for (int j = 0; j < rank; ++j) {
    int s = 0;
    for (int i = 0; i < rank; ++i) s += m[j][i] * lambda[i];
    r[j] = s;
  }
  return r;
}

std::vector<double> RootSystemData::act_roots(int w, const std::vector<double>& z) const {
  std::vector<double> r(rank, 0.0);
  const auto& m = weyl[w].on_roots;
  for (int j = 0; j < rank; ++j)
    for (int i = 0; i < rank; ++i) r[j] += m[j][i] * z[i];
  return r;
}

LatticePoint RootSystemData::dominant(const LatticePoint& lambda) const {
  LatticePoint x = lambda;
  for (;;) {
    int neg = -1;
    for (int i = 0; i < rank; ++i)
      if (x[i] < 0) {
        neg = i;
        break;
      }
    if (neg < 0) return x;
    int a = x[neg];
    for (int j = 0; j < rank; ++j) x[j] -= a * cartan[neg][j];
  }
}

std::vector<LatticePoint> RootSystemData::orbit(const LatticePoint& lambda) const {
  std::set<LatticePoint> s;
  for (int w = 0; w < order(); ++w) s.insert(act(w, lambda));
  return {s.begin(), s.end()};
}

std::vector<int> RootSystemData::stabilizer(const LatticePoint& lambda) const {
  std::vector<int> r;
  for (int w = 0; w < order(); ++w)
    if (act(w, lambda) == lambda) r.push_back(w);
  return r;
}

LatticePoint RootSystemData::dual(const LatticePoint& lambda) const { return -act(w0, lambda); }

RVec RootSystemData::to_cartesian(const LatticePoint& lambda) const {
  RVec r(dim, Rational(0));
  for (int i = 0; i < rank; ++i) r = added(r, scaled(coweights[i], lambda[i]));
  return r;
}

RootSystemData build_root_system(Family family) {
  RootSystemData rs;
  rs.family = family;
  rs.simple_roots = simple_roots_for(family);
  rs.rank = static_cast<int>(rs.simple_roots.size());
  rs.dim = static_cast<int>(rs.simple_roots[0].size());
  const int r = rs.rank;
  const std::size_t d = rs.dim;

  rs.root_gram.assign(r, RVec(r, Rational(0)));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) rs.root_gram[i][j] = dot(rs.simple_roots[i], rs.simple_roots[j]);
  rs.gram = invert(rs.root_gram);
  rs.coweights.assign(r, RVec(d, Rational(0)));
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < r; ++k) rs.coweights[i] = added(rs.coweights[i], scaled(rs.simple_roots[k], rs.gram[i][k]));

  rs.cartan.assign(r, std::vector<int>(r, 0));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) rs.cartan[i][j] = to_int(2 * rs.root_gram[i][j] / rs.root_gram[i][i]);

  // Weyl group by breadth-first closure; BFS depth is the Coxeter length.
  std::vector<RMat> gens;
  for (const auto& a : rs.simple_roots) gens.push_back(reflection(a));
  std::vector<RMat> elems{identity(d)};
  std::vector<int> lengths{0};
  std::set<RMat> seen{elems[0]};
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    std::size_t cur = queue.front();
    queue.pop_front();
    for (const auto& g : gens) {
      RMat m = mat_mul(g, elems[cur]);
      if (seen.insert(m).second) {
        elems.push_back(m);
        lengths.push_back(lengths[cur] + 1);
        queue.push_back(elems.size() - 1);
      }
    }
  }
  if (elems.size() != expected_order(family))
    throw Error(ErrorCode::InvalidParameters, "Weyl group order mismatch");

  auto root_coeffs = [&](const RVec& v) {
    std::array<int, kMaxRank> c{};
    for (int i = 0; i < r; ++i) c[i] = to_int(dot(v, rs.coweights[i]));
    return c;
  };
  auto is_positive = [&](const std::array<int, kMaxRank>& c) {
    bool nonneg = true, nonzero = false;
    for (int i = 0; i < r; ++i) {
      if (c[i] < 0) nonneg = false;
      if (c[i] != 0) nonzero = true;
    }
    return nonneg && nonzero;
  };

  // Φ = W·{α_i}, plus 2·W·α_r for the non-reduced families.
  std::set<RVec> roots;
  std::map<RVec, int> orbit_of;
  for (int j = 0; j < r; ++j)
    for (const auto& m : elems) {
      RVec v = mat_vec(m, rs.simple_roots[j]);
      roots.insert(v);
      orbit_of.emplace(v, j + 1);
    }
  if (is_bc(family)) {
    std::set<RVec> extra;
    for (const auto& m : elems) extra.insert(scaled(mat_vec(m, rs.simple_roots[r - 1]), 2));
    roots.insert(extra.begin(), extra.end());
  }
  for (const auto& v : roots) {
    auto c = root_coeffs(v);
    if (!is_positive(c)) continue;
    PositiveRoot pr;
    pr.cartesian = v;
    pr.coeffs = c;
    Rational len2 = dot(v, v);
    for (int j = 0; j < r; ++j) pr.coroot[j] = to_int(2 * dot(v, rs.simple_roots[j]) / len2);
    rs.pos_roots.push_back(pr);
  }
  std::sort(rs.pos_roots.begin(), rs.pos_roots.end(), [&](const PositiveRoot& a, const PositiveRoot& b) {
    int ha = 0, hb = 0;
    for (int i = 0; i < r; ++i) {
      ha += a.coeffs[i];
      hb += b.coeffs[i];
    }
    if (ha != hb) return ha < hb;
    return a.coeffs < b.coeffs;
  });
  for (std::size_t a = 0; a < rs.pos_roots.size(); ++a) {
    for (std::size_t b = 0; b < rs.pos_roots.size(); ++b)
      if (scaled(rs.pos_roots[a].cartesian, 2) == rs.pos_roots[b].cartesian) {
        rs.pos_roots[a].twice = static_cast<int>(b);
        rs.pos_roots[b].half = static_cast<int>(a);
      }
  }
  for (std::size_t a = 0; a < rs.pos_roots.size(); ++a) {
    auto& pr = rs.pos_roots[a];
    const RVec& base = pr.half >= 0 ? rs.pos_roots[pr.half].cartesian : pr.cartesian;
    pr.orbit = orbit_of.at(base);
    if (pr.half < 0) rs.indivisible.push_back(static_cast<int>(a));
  }

  for (std::size_t k = 0; k < elems.size(); ++k) {
    WeylElement we;
    we.cartesian = elems[k];
    we.length = lengths[k];
    we.on_coweights.assign(r, std::vector<int>(r, 0));
    we.on_roots.assign(r, std::vector<int>(r, 0));
    for (int i = 0; i < r; ++i) {
      RVec wl = mat_vec(elems[k], rs.coweights[i]);
      RVec wa = mat_vec(elems[k], rs.simple_roots[i]);
      for (int j = 0; j < r; ++j) {
        we.on_coweights[j][i] = to_int(dot(wl, rs.simple_roots[j]));
        we.on_roots[j][i] = to_int(dot(wa, rs.coweights[j]));
      }
    }
    for (int idx : rs.indivisible) {
      auto c = root_coeffs(mat_vec(elems[k], rs.pos_roots[idx].cartesian));
      if (!is_positive(c)) we.inversions.push_back(idx);
    }
    rs.weyl.push_back(std::move(we));
  }
  rs.w0 = static_cast<int>(std::max_element(lengths.begin(), lengths.end()) - lengths.begin());

  const PositiveRoot& top = rs.pos_roots.back();
  rs.highest_root = top.cartesian;
  rs.marks.assign(top.coeffs.begin(), top.coeffs.begin() + r);
  rs.good_types = {0};
  if (!is_bc(family))
    for (int i = 0; i < r; ++i)
      if (rs.marks[i] == 1) rs.good_types.push_back(i + 1);

  for (int i = 0; i < r; ++i) {
    int idx = -1;
    for (std::size_t a = 0; a < rs.pos_roots.size(); ++a)
      if (rs.pos_roots[a].cartesian == rs.simple_roots[i]) idx = static_cast<int>(a);
    const PositiveRoot& pr = rs.pos_roots[idx];
    rs.qplus_basis.push_back(pr.twice >= 0 ? rs.pos_roots[pr.twice].coroot : pr.coroot);
  }
  RMat b(r, RVec(r, Rational(0)));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) b[j][i] = rs.qplus_basis[i][j];
  rs.qplus_inverse = invert(b);
  return rs;
}

QParams make_qparams(const RootSystemData& rs, const std::map<int, Rational>& q) {
  QParams qp;
  for (int i = 0; i <= rs.rank; ++i) {
    auto it = q.find(i);
    if (it == q.end()) throw Error(ErrorCode::InvalidParameters, "missing q for type label " + std::to_string(i));
    if (it->second <= 1)
      throw Error(ErrorCode::InvalidParameters,
                  "thickness requires q_" + std::to_string(i) + " > 1, got " + to_string(it->second));
    qp.q[i] = it->second;
  }
  for (const auto& [label, _] : q)
    if (label < 0 || label > rs.rank)
      throw Error(ErrorCode::InvalidParameters, "unknown type label " + std::to_string(label));

  // Labels in one W-orbit of simple roots share a parameter; for reduced
  // systems label 0 is tied to the orbit of the highest root.
  std::map<int, int> simple_orbit;
  for (int i = 0; i < rs.rank; ++i)
    for (const auto& pr : rs.pos_roots)
      if (pr.cartesian == rs.simple_roots[i]) simple_orbit[i + 1] = pr.orbit;
  for (int i = 1; i <= rs.rank; ++i)
    if (qp.q[i] != qp.q[simple_orbit[i]])
      throw Error(ErrorCode::InvalidParameters, "q_" + std::to_string(i) + " must equal q_" +
                                                    std::to_string(simple_orbit[i]) + " (same Weyl orbit)");
  if (!is_bc(rs.family)) {
    int top_orbit = rs.pos_roots.back().orbit;
    if (qp.q[0] != qp.q[top_orbit])
      throw Error(ErrorCode::InvalidParameters,
                  "q_0 must equal q_" + std::to_string(top_orbit) + " (highest root orbit)");
  }

  qp.tau.resize(rs.pos_roots.size());
  for (std::size_t a = 0; a < rs.pos_roots.size(); ++a) {
    const auto& pr = rs.pos_roots[a];
    if (pr.half >= 0)
      qp.tau[a] = qp.q[0];
    else if (pr.twice >= 0)
      qp.tau[a] = qp.q[pr.orbit] / qp.q[0];
    else
      qp.tau[a] = qp.q[pr.orbit];
  }
  for (std::size_t a = 0; a < rs.pos_roots.size(); ++a) {
    const auto& pr = rs.pos_roots[a];
    if (pr.half >= 0) continue;
    Rational t2 = pr.twice >= 0 ? qp.tau[pr.twice] : Rational(1);
    if (qp.tau[a] * t2 * t2 <= 1)
      throw Error(ErrorCode::InvalidParameters, "tau_a * tau_2a^2 must exceed 1");
    if (qp.tau[a] < 1) qp.standard = false;
  }
  if (!qp.standard)
    throw Error(ErrorCode::ExceptionalCaseUnsupported,
                "q_r < q_0 gives tau < 1 (exceptional Plancherel case); only the standard case is supported");
  return qp;
}

QParams uniform_qparams(const RootSystemData& rs, const Rational& q) {
  std::map<int, Rational> m;
  for (int i = 0; i <= rs.rank; ++i) m[i] = q;
  return make_qparams(rs, m);
}

LogLinear& LogLinear::operator+=(const LogLinear& o) {
  for (const auto& [k, v] : o.coeff) {
    coeff[k] += v;
    if (coeff[k] == 0) coeff.erase(k);
  }
  return *this;
}

LogLinear LogLinear::operator*(const Rational& k) const {
  LogLinear r;
  if (k == 0) return r;
  for (const auto& [l, v] : coeff) r.coeff[l] = v * k;
  return r;
}

bool LogLinear::operator==(const LogLinear& o) const {
  LogLinear d = *this;
  d += -o;
  return d.is_zero();
}

double LogLinear::value(const QParams& q) const {
  double s = 0;
  for (const auto& [l, v] : coeff) s += v.get_d() * std::log(q.q.at(l).get_d());
  return s;
}

bool LogLinear::is_zero() const {
  for (const auto& [_, v] : coeff)
    if (v != 0) return false;
  return true;
}

LogLinear log_of(const RootSystemData& rs, const QParams&, int root) {
  const auto& pr = rs.pos_roots[root];
  LogLinear l;
  if (pr.half >= 0) {
    l.coeff[0] = 1;
  } else if (pr.twice >= 0) {
    l.coeff[pr.orbit] = 1;
    l.coeff[0] = -1;
  } else {
    l.coeff[pr.orbit] = 1;
  }
  return l;
}

std::vector<LogLinear> eta_exact(const RootSystemData& rs, const QParams& q) {
  std::vector<LogLinear> e(rs.rank);
  for (int a = 0; a < rs.num_pos(); ++a) {
    LogLinear lt = log_of(rs, q, a);
    for (int i = 0; i < rs.rank; ++i) e[i] += lt * Rational(rs.pos_roots[a].coeffs[i], 2);
  }
  return e;
}

std::vector<double> eta(const RootSystemData& rs, const QParams& q) {
  std::vector<double> r;
  for (const auto& l : eta_exact(rs, q)) r.push_back(l.value(q));
  return r;
}

Rational chi0(const RootSystemData& rs, const QParams& q, const LatticePoint& x) {
  Rational r = 1;
  for (int a = 0; a < rs.num_pos(); ++a) r *= rational_pow(q.tau[a], rs.pairing(x, a));
  return r;
}

double chi0(const RootSystemData& rs, const QParams& q, const std::vector<double>& x) {
  auto e = eta(rs, q);
  double s = 0;
  for (int i = 0; i < rs.rank; ++i) s += x[i] * e[i];
  return std::exp(2 * s);
}

double log_chi0(const RootSystemData& rs, const QParams& q, const LatticePoint& x) {
  auto e = eta(rs, q);
  double s = 0;
  for (int i = 0; i < rs.rank; ++i) s += x[i] * e[i];
  return 2 * s;
}

Rational q_w(const RootSystemData& rs, const QParams& q, int w) {
  Rational r = 1;
  for (int idx : rs.weyl[w].inversions) {
    const auto& pr = rs.pos_roots[idx];
    r *= q.tau[idx];
    if (pr.twice >= 0) r *= q.tau[pr.twice];
  }
  return r;
}

Rational poincare(const RootSystemData& rs, const QParams& q, const std::optional<LatticePoint>& stabilizer_of) {
  Rational s = 0;
  if (!stabilizer_of) {
    for (int w = 0; w < rs.order(); ++w) s += 1 / q_w(rs, q, w);
  } else {
    for (int w : rs.stabilizer(*stabilizer_of)) s += 1 / q_w(rs, q, w);
  }
  return s;
}

Rational n_lambda(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda) {
  if (!is_dominant(lambda, rs.rank))
    throw Error(ErrorCode::NonDominant, "N_lambda needs dominant lambda, got " + to_string(lambda, rs.rank));
  return poincare(rs, q) / poincare(rs, q, lambda) * chi0(rs, q, lambda);
}

double log_n_lambda(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda) {
  if (!is_dominant(lambda, rs.rank))
    throw Error(ErrorCode::NonDominant, "N_lambda needs dominant lambda, got " + to_string(lambda, rs.rank));
  Rational ratio = poincare(rs, q) / poincare(rs, q, lambda);
  return std::log(ratio.get_d()) + log_chi0(rs, q, lambda);
}

bool dominated_by(const RootSystemData& rs, const LatticePoint& mu, const LatticePoint& lambda) {
  const int r = rs.rank;
  const RMat& inv = rs.qplus_inverse;
  for (int i = 0; i < r; ++i) {
    Rational n = 0;
    for (int j = 0; j < r; ++j) n += inv[i][j] * (lambda[j] - mu[j]);
    if (!is_integer(n) || n < 0) return false;
  }
  return true;
}

std::vector<LatticePoint> saturation(const RootSystemData& rs, const LatticePoint& lambda) {
  if (!is_dominant(lambda, rs.rank))
    throw Error(ErrorCode::NonDominant, "saturation needs dominant lambda, got " + to_string(lambda, rs.rank));
  Rational n2 = rs.inner(lambda, lambda);
  std::vector<int> bound(rs.rank);
  for (int i = 0; i < rs.rank; ++i)
    bound[i] = static_cast<int>(std::floor(std::sqrt(Rational(n2 / rs.gram[i][i]).get_d()))) + 1;
  std::set<LatticePoint> out;
  LatticePoint mu;
  std::function<void(int)> rec = [&](int i) {
    if (i == rs.rank) {
      if (rs.inner(mu, mu) <= n2 && dominated_by(rs, mu, lambda))
        for (const auto& p : rs.orbit(mu)) out.insert(p);
      return;
    }
    for (int v = 0; v <= bound[i]; ++v) {
      mu[i] = v;
      rec(i + 1);
    }
    mu[i] = 0;
  };
  rec(0);
  return {out.begin(), out.end()};
}

std::vector<LatticePoint> dominant_box(int rank, int bound, bool by_sum) {
  std::vector<LatticePoint> out;
  LatticePoint p;
  std::function<void(int, int)> rec = [&](int i, int used) {
    if (i == rank) {
      out.push_back(p);
      return;
    }
    int hi = by_sum ? bound - used : bound;
    for (int v = 0; v <= hi; ++v) {
      p[i] = v;
      rec(i + 1, used + v);
    }
    p[i] = 0;
  };
  rec(0, 0);
  return out;
}

VolumeTable::VolumeTable(const RootSystemData& rs, const QParams& q) : rank_(rs.rank), eta_(eta(rs, q)) {
  Rational full = poincare(rs, q);
  log_w_ratio_by_mask_.resize(std::size_t{1} << rank_);
  for (unsigned mask = 0; mask < log_w_ratio_by_mask_.size(); ++mask) {
    LatticePoint rep;
    for (int i = 0; i < rank_; ++i) rep[i] = (mask >> i) & 1u ? 1 : 0;
    log_w_ratio_by_mask_[mask] = std::log(Rational(full / poincare(rs, q, rep)).get_d());
  }
}

double VolumeTable::log_chi0_half(const LatticePoint& lambda) const {
  double s = 0;
  for (int i = 0; i < rank_; ++i) s += lambda[i] * eta_[i];
  return s;
}

double VolumeTable::log_n(const LatticePoint& lambda) const {
  unsigned mask = 0;
  for (int i = 0; i < rank_; ++i)
    if (lambda[i] != 0) mask |= 1u << i;
  return log_w_ratio_by_mask_[mask] + 2 * log_chi0_half(lambda);
}

}  // namespace hkb
