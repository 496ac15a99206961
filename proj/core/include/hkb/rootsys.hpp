#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hkb/rational.hpp"

namespace hkb {

enum class Family { A1, A2, B2, C2, G2, BC1, BC2 };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);
bool is_bc(Family f);

inline constexpr int kMaxRank = 2;

// Point of the coweight lattice P, in the fundamental-coweight basis.
struct LatticePoint {
  std::array<int, kMaxRank> c{};

  int& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  int operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;

  LatticePoint& operator+=(const LatticePoint& o) {
    for (int i = 0; i < kMaxRank; ++i) c[i] += o.c[i];
    return *this;
  }
  LatticePoint& operator-=(const LatticePoint& o) {
    for (int i = 0; i < kMaxRank; ++i) c[i] -= o.c[i];
    return *this;
  }
  friend LatticePoint operator+(LatticePoint a, const LatticePoint& b) { return a += b; }
  friend LatticePoint operator-(LatticePoint a, const LatticePoint& b) { return a -= b; }
  friend LatticePoint operator-(LatticePoint a) {
    for (auto& x : a.c) x = -x;
    return a;
  }
  friend LatticePoint operator*(int k, LatticePoint a) {
    for (auto& x : a.c) x *= k;
    return a;
  }
};

LatticePoint lattice_point(std::initializer_list<int> coords);
LatticePoint unit_point(int i);
bool is_dominant(const LatticePoint& p, int rank);
int coord_sum(const LatticePoint& p, int rank);
std::string to_string(const LatticePoint& p, int rank);

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (int x : p.c) h = (h ^ static_cast<std::size_t>(static_cast<unsigned>(x))) * 1099511628211ull;
    return h;
  }
};

using RVec = std::vector<Rational>;
using RMat = std::vector<RVec>;
using IMat = std::vector<std::vector<int>>;

struct WeylElement {
  RMat cartesian;     // orthogonal matrix on the ambient space
  IMat on_coweights;  // action on fundamental-coweight coordinates
  IMat on_roots;      // action on simple-root coordinates
  int length = 0;
  std::vector<int> inversions;  // indices into pos_roots of indivisible α > 0 with wα < 0
};

struct PositiveRoot {
  RVec cartesian;
  std::array<int, kMaxRank> coeffs{};   // simple-root coefficients; ⟨λ,α⟩ = Σ λ_i coeffs_i
  LatticePoint coroot;                  // α∨ in coweight coordinates
  int half = -1;                        // index of α/2 when α/2 ∈ Φ
  int twice = -1;                       // index of 2α when 2α ∈ Φ
  int orbit = 0;                        // label j ∈ {1..r} with α (or α/2) ∈ W·α_j
  bool indivisible() const { return half < 0; }
};

struct RootSystemData {
  Family family = Family::A1;
  int rank = 1;
  int dim = 1;
  std::vector<RVec> simple_roots;
  std::vector<PositiveRoot> pos_roots;
  std::vector<int> indivisible;          // indices of Φ⁺⁺ in pos_roots
  std::vector<RVec> coweights;           // fundamental coweights λ_i (Cartesian)
  RMat gram;                             // ⟨λ_i, λ_j⟩
  RMat root_gram;                        // ⟨α_i, α_j⟩
  std::vector<LatticePoint> qplus_basis; // generators of Q⁺ in coweight coordinates
  RMat qplus_inverse;                    // coordinates of a coweight in that basis
  RVec highest_root;
  std::vector<int> marks;                // highest root coefficients m_i
  std::vector<int> good_types;
  std::vector<WeylElement> weyl;
  int w0 = 0;
  IMat cartan;                           // ⟨α_i∨, α_j⟩

  int num_pos() const { return static_cast<int>(pos_roots.size()); }
  int num_indivisible() const { return static_cast<int>(indivisible.size()); }
  int order() const { return static_cast<int>(weyl.size()); }

  int pairing(const LatticePoint& lambda, int root) const;
  Rational inner(const LatticePoint& a, const LatticePoint& b) const;
  double norm(const LatticePoint& a) const;
  double norm(const std::vector<double>& coweight_coords) const;
  LatticePoint act(int w, const LatticePoint& lambda) const;
  std::vector<double> act_roots(int w, const std::vector<double>& z) const;
  LatticePoint dominant(const LatticePoint& lambda) const;
  std::vector<LatticePoint> orbit(const LatticePoint& lambda) const;
  std::vector<int> stabilizer(const LatticePoint& lambda) const;
  LatticePoint dual(const LatticePoint& lambda) const;  // λ* = -w0 λ
  RVec to_cartesian(const LatticePoint& lambda) const;
};

RootSystemData build_root_system(Family family);

// q-parameters per type label 0..r together with the derived τ table.
struct QParams {
  std::map<int, Rational> q;
  std::vector<Rational> tau;  // per pos_roots index
  bool standard = true;
};

QParams make_qparams(const RootSystemData& rs, const std::map<int, Rational>& q);
QParams uniform_qparams(const RootSystemData& rs, const Rational& q);

// Σ_label coeff·log q_label, kept formal so identities can be checked exactly.
struct LogLinear {
  std::map<int, Rational> coeff;

  LogLinear& operator+=(const LogLinear& o);
  LogLinear operator*(const Rational& k) const;
  LogLinear operator-() const { return *this * Rational(-1); }
  bool operator==(const LogLinear& o) const;
  double value(const QParams& q) const;
  bool is_zero() const;
};

LogLinear log_of(const RootSystemData& rs, const QParams& q, int root);

// η in simple-root coordinates (η_i = ⟨η, λ_i⟩).
std::vector<LogLinear> eta_exact(const RootSystemData& rs, const QParams& q);
std::vector<double> eta(const RootSystemData& rs, const QParams& q);

Rational chi0(const RootSystemData& rs, const QParams& q, const LatticePoint& x);
double chi0(const RootSystemData& rs, const QParams& q, const std::vector<double>& x);
double log_chi0(const RootSystemData& rs, const QParams& q, const LatticePoint& x);

Rational q_w(const RootSystemData& rs, const QParams& q, int w);
Rational poincare(const RootSystemData& rs, const QParams& q,
                  const std::optional<LatticePoint>& stabilizer_of = std::nullopt);
Rational n_lambda(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda);
double log_n_lambda(const RootSystemData& rs, const QParams& q, const LatticePoint& lambda);

std::vector<LatticePoint> saturation(const RootSystemData& rs, const LatticePoint& lambda);
bool dominated_by(const RootSystemData& rs, const LatticePoint& mu, const LatticePoint& lambda);

// Dominant λ with coordinates in [0, bound] (or coordinate sum ≤ bound when by_sum).
std::vector<LatticePoint> dominant_box(int rank, int bound, bool by_sum = false);

// Cached per-λ log N_λ for hot loops.
class VolumeTable {
 public:
  VolumeTable(const RootSystemData& rs, const QParams& q);
  double log_n(const LatticePoint& lambda) const;
  double log_chi0_half(const LatticePoint& lambda) const;  // ⟨η, λ⟩

 private:
  int rank_;
  std::vector<double> eta_;
  std::vector<double> log_w_ratio_by_mask_;  // log W(q⁻¹)/W_λ(q⁻¹) by zero pattern of λ
};

}  // namespace hkb
