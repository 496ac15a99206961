#pragma once

#include <map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hkb/rootsys.hpp"
#include "hkb/spectral.hpp"

namespace hkb {

using CountPoly = std::map<LatticePoint, Integer>;
using StructureRow = std::map<LatticePoint, Rational>;  // ν ↦ b^ν

// Structure constants of the radial algebra: A_λ A_μ = Σ_ν b^ν A_ν.
class StructureTable {
 public:
  StructureTable(const RootSystemData& rs, const QParams& q);

  const RootSystemData& root_system() const { return rs_; }
  const QParams& qparams() const { return q_; }

  // Vertex counts m_λ(μ) of N_λ·P_λ; throws ExtractionFailed when they cannot be certified.
  const CountPoly& counts(const LatticePoint& lambda);

  // Exact b^ν by peeling the product of count polynomials from the top.
  const StructureRow& product(const LatticePoint& lambda, const LatticePoint& mu);

  // Rows for μ beyond `threshold` in some coordinate are translates of the row at the clamped μ.
  // certify_stationarity checks this exactly for μ up to `radius` and throws TableIncomplete otherwise.
  void certify_stationarity(const std::vector<LatticePoint>& lambdas, int threshold, int radius);
  bool stationary() const { return threshold_ >= 0; }
  int threshold() const { return threshold_; }
  bool covers(const LatticePoint& lambda) const;
  StructureRow product_stationary(const LatticePoint& lambda, const LatticePoint& mu);

  Rational n_lambda(const LatticePoint& lambda);

  nlohmann::json to_json() const;
  void merge_json(const nlohmann::json& j);
  std::size_t size() const { return rows_.size(); }

 private:
  RootSystemData rs_;
  QParams q_;
  std::map<LatticePoint, CountPoly> counts_;
  std::map<std::pair<LatticePoint, LatticePoint>, StructureRow> rows_;
  std::map<LatticePoint, Rational> n_cache_;
  int threshold_ = -1;
  std::vector<LatticePoint> certified_;
};

// Height Σ_{α∈Φ⁺} ⟨ν, α⟩; strictly monotone in the dominance order.
int dominance_height(const RootSystemData& rs, const LatticePoint& nu);

// Quadrature route: b^ν = N_ν Σ w P_λ P_μ conj P_ν, rationalised through integer vertex counts.
struct QuadratureRow {
  StructureRow row;
  double residual = 0;  // max |b^ν N_λ N_μ / N_ν − round|
};

QuadratureRow structure_constants(const SpectralGrid& grid, const LatticePoint& lambda, const LatticePoint& mu);

// Largest coordinate of Π_λ, used to pick the stationarity threshold of a walk.
int saturation_span(const RootSystemData& rs, const LatticePoint& lambda);

}  // namespace hkb
