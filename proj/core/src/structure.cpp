#include "hkb/structure.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hkb/error.hpp"

namespace hkb {

namespace {

LatticePoint from_vec(const std::vector<int>& v, int rank) {
  LatticePoint p;
  for (int i = 0; i < rank; ++i) p[i] = v.at(i);
  return p;
}

std::vector<int> to_vec(const LatticePoint& p, int rank) { return {p.c.begin(), p.c.begin() + rank}; }

LatticePoint clamp_point(const LatticePoint& mu, int rank, int threshold) {
  LatticePoint c = mu;
  for (int i = 0; i < rank; ++i) c[i] = std::min(c[i], threshold);
  return c;
}

}  // namespace

int dominance_height(const RootSystemData& rs, const LatticePoint& nu) {
  int h = 0;
  for (int a = 0; a < rs.num_pos(); ++a) h += rs.pairing(nu, a);
  return h;
}

int saturation_span(const RootSystemData& rs, const LatticePoint& lambda) {
  int span = 0;
  for (const auto& mu : saturation(rs, lambda))
    for (int i = 0; i < rs.rank; ++i) span = std::max(span, std::abs(mu[i]));
  return span;
}

StructureTable::StructureTable(const RootSystemData& rs, const QParams& q) : rs_(rs), q_(q) {}

Rational StructureTable::n_lambda(const LatticePoint& lambda) {
  auto it = n_cache_.find(lambda);
  if (it != n_cache_.end()) return it->second;
  return n_cache_[lambda] = hkb::n_lambda(rs_, q_, lambda);
}

const CountPoly& StructureTable::counts(const LatticePoint& lambda) {
  auto it = counts_.find(lambda);
  if (it != counts_.end()) return it->second;
  auto e = spherical_expansion(rs_, q_, lambda);
  if (!e.integral)
    throw Error(ErrorCode::ExtractionFailed,
                "vertex counts of " + to_string(lambda, rs_.rank) + " not integral (residual " +
                    std::to_string(e.residual) + ")");
  return counts_[lambda] = e.poly.counts;
}

const StructureRow& StructureTable::product(const LatticePoint& lambda, const LatticePoint& mu) {
  // the algebra is commutative; store one orientation
  auto key = lambda <= mu ? std::make_pair(lambda, mu) : std::make_pair(mu, lambda);
  auto it = rows_.find(key);
  if (it != rows_.end()) return it->second;
  if (!is_dominant(lambda, rs_.rank) || !is_dominant(mu, rs_.rank))
    throw Error(ErrorCode::NonDominant, "structure constants need dominant arguments");

  const CountPoly a = counts(key.first);
  const CountPoly b = counts(key.second);
  CountPoly prod;
  for (const auto& [x, m] : a)
    for (const auto& [y, n] : b) prod[x + y] += m * n;

  std::map<LatticePoint, Integer> peeled;
  while (true) {
    for (auto p = prod.begin(); p != prod.end();) p = (p->second == 0) ? prod.erase(p) : std::next(p);
    if (prod.empty()) break;
    const LatticePoint* top = nullptr;
    int best = 0;
    for (const auto& [nu, c] : prod) {
      if (!is_dominant(nu, rs_.rank)) continue;
      int h = dominance_height(rs_, nu);
      if (!top || h > best) {
        top = &nu;
        best = h;
      }
    }
    if (!top) throw Error(ErrorCode::RoundingFailed, "product left a non-dominant remainder");
    const LatticePoint nu = *top;
    const Integer t = prod.at(nu);
    if (t < 0) throw Error(ErrorCode::RoundingFailed, "negative structure count at " + to_string(nu, rs_.rank));
    peeled[nu] = t;
    for (const auto& [x, m] : counts(nu)) prod[x] -= t * m;
  }

  StructureRow row;
  const Rational scale = n_lambda(lambda) * n_lambda(mu);
  Rational total = 0;
  for (const auto& [nu, t] : peeled) {
    row[nu] = Rational(t) * n_lambda(nu) / scale;
    total += row[nu];
  }
  if (total != 1) throw Error(ErrorCode::RoundingFailed, "structure constants do not sum to one");
  return rows_[key] = std::move(row);
}

void StructureTable::certify_stationarity(const std::vector<LatticePoint>& lambdas, int threshold, int radius) {
  if (radius <= threshold) throw Error(ErrorCode::InvalidParameters, "stationarity radius must exceed threshold");
  for (const auto& lam : lambdas)
    for (const auto& mu : dominant_box(rs_.rank, radius)) {
      LatticePoint ref = clamp_point(mu, rs_.rank, threshold);
      if (ref == mu) continue;
      const StructureRow exact = product(lam, mu);
      const StructureRow& base = product(lam, ref);
      StructureRow shifted;
      for (const auto& [nu, b] : base) shifted[nu + (mu - ref)] = b;
      if (shifted != exact)
        throw Error(ErrorCode::TableIncomplete, "row (" + to_string(lam, rs_.rank) + ", " + to_string(mu, rs_.rank) +
                                                    ") is not a translate of its clamped reference");
    }
  threshold_ = threshold;
  certified_ = lambdas;
}

bool StructureTable::covers(const LatticePoint& lambda) const {
  return threshold_ >= 0 && std::find(certified_.begin(), certified_.end(), lambda) != certified_.end();
}

StructureRow StructureTable::product_stationary(const LatticePoint& lambda, const LatticePoint& mu) {
  if (!covers(lambda)) return product(lambda, mu);
  LatticePoint ref = clamp_point(mu, rs_.rank, threshold_);
  if (ref == mu) return product(lambda, mu);
  StructureRow out;
  for (const auto& [nu, b] : product(lambda, ref)) out[nu + (mu - ref)] = b;
  return out;
}

nlohmann::json StructureTable::to_json() const {
  nlohmann::json j;
  j["family"] = std::string(family_name(rs_.family));
  nlohmann::json q = nlohmann::json::object();
  for (const auto& [label, v] : q_.q) q[std::to_string(label)] = to_string(v);
  j["q"] = q;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [key, row] : rows_) {
    nlohmann::json r;
    r["lambda"] = to_vec(key.first, rs_.rank);
    r["mu"] = to_vec(key.second, rs_.rank);
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [nu, b] : row) entries.push_back({{"nu", to_vec(nu, rs_.rank)}, {"b", to_string(b)}});
    r["row"] = entries;
    rows.push_back(r);
  }
  j["rows"] = rows;
  return j;
}

void StructureTable::merge_json(const nlohmann::json& j) {
  if (j.at("family").get<std::string>() != family_name(rs_.family))
    throw Error(ErrorCode::InvalidConfig, "structure cache belongs to another family");
  for (const auto& [label, v] : j.at("q").items())
    if (parse_rational(v.get<std::string>()) != q_.q.at(std::stoi(label)))
      throw Error(ErrorCode::InvalidConfig, "structure cache has different q-parameters");
  for (const auto& r : j.at("rows")) {
    auto lam = from_vec(r.at("lambda").get<std::vector<int>>(), rs_.rank);
    auto mu = from_vec(r.at("mu").get<std::vector<int>>(), rs_.rank);
    StructureRow row;
    Rational total = 0;
    for (const auto& e : r.at("row")) {
      Rational b = parse_rational(e.at("b").get<std::string>());
      row[from_vec(e.at("nu").get<std::vector<int>>(), rs_.rank)] = b;
      total += b;
    }
    if (total != 1) throw Error(ErrorCode::InvalidConfig, "structure cache row does not sum to one");
    rows_[lam <= mu ? std::make_pair(lam, mu) : std::make_pair(mu, lam)] = row;
  }
}

QuadratureRow structure_constants(const SpectralGrid& grid, const LatticePoint& lambda, const LatticePoint& mu) {
  const auto& rs = grid.rs;
  const auto& q = grid.q;
  std::set<LatticePoint> candidates;
  for (const auto& v : saturation(rs, mu)) candidates.insert(rs.dominant(lambda + v));

  auto el = spherical_expansion(rs, q, lambda);
  auto em = spherical_expansion(rs, q, mu);
  CVec pl = spherical_on_grid(grid, el);
  CVec pm = spherical_on_grid(grid, em);
  CVec prod(grid.size());
  for (std::size_t k = 0; k < prod.size(); ++k) prod[k] = pl[k] * pm[k];

  QuadratureRow out;
  const Rational nn = el.n_lambda * em.n_lambda;
  Rational total = 0;
  for (const auto& nu : candidates) {
    auto en = spherical_expansion(rs, q, nu);
    CVec pn = spherical_on_grid(grid, en);
    // b^ν N_λ N_μ / N_ν = N_λ N_μ ⟨P_λ P_μ, P_ν⟩_π
    double t = nn.get_d() * plancherel_pair(grid, prod, pn).real();
    double r = std::nearbyint(t);
    out.residual = std::max(out.residual, std::abs(t - r));
    if (r < 0) throw Error(ErrorCode::RoundingFailed, "negative structure count");
    if (r > 0) {
      Rational b = Rational(Integer(static_cast<long>(r))) * en.n_lambda / nn;
      out.row[nu] = b;
      total += b;
    }
  }
  if (out.residual >= 1e-6 || total != 1)
    throw Error(ErrorCode::RoundingFailed, "structure constants did not round cleanly (residual " +
                                               std::to_string(out.residual) + ")");
  return out;
}

}  // namespace hkb
