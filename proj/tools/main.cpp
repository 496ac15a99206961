#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "acceptance.hpp"
#include "config.hpp"
#include "hkb/caloric.hpp"
#include "hkb/error.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;
using namespace hkb;
using hkb::cli::RunConfig;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPrecision = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidParameters:
    case ErrorCode::ExceptionalCaseUnsupported:
    case ErrorCode::NonDominant:
      return kExitConfig;
    case ErrorCode::PrecisionLoss:
    case ErrorCode::RoundingFailed:
    case ErrorCode::ResolutionCapExceeded:
    case ErrorCode::ExtractionFailed:
    case ErrorCode::NewtonDiverged:
    case ErrorCode::TailBoundFailed:
      return kExitPrecision;
    default:
      return kExitCheckFailure;
  }
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string coords(const LatticePoint& l, int rank) {
  std::string s;
  for (int i = 0; i < rank; ++i) s += (i ? " " : "") + std::to_string(l[i]);
  return s;
}

Json metadata(const RunConfig& c, const std::string& command, const Json& formulas) {
  return {{"tool", "hkb"}, {"version", "0.1.0"}, {"command", command}, {"config", c.to_json()}, {"formulas", formulas}};
}

class Output {
 public:
  explicit Output(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

  void write(const std::string& name, const std::string& body) const {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write " + (dir_ / name).string());
    out << body;
  }
  void write_json(const std::string& name, const Json& j) const { write(name, j.dump(2) + "\n"); }
  fs::path path(const std::string& name) const { return dir_ / name; }

 private:
  fs::path dir_;
};

// Structure table for the configured building, merged with and written back to the on-disk cache.
StructureTable cached_table(const RunConfig& c, const Output& out) {
  std::string key = std::string(family_name(c.family));
  for (const auto& [label, v] : c.q.q) key += fmt::format("-q{}_{}", label, to_string(v));
  for (auto& ch : key)
    if (ch == '/') ch = 'd';
  const fs::path dir = out.path("cache");
  fs::create_directories(dir);
  const fs::path file = dir / ("structure-" + key + ".json");
  StructureTable table(c.rs, c.q);
  if (fs::exists(file)) {
    std::ifstream in(file);
    try {
      table.merge_json(Json::parse(in));
    } catch (const Json::exception&) {
      // unreadable cache: recompute
    }
  }
  prepare_table(table, c.walk);
  std::ofstream(file, std::ios::binary) << table.to_json().dump() << "\n";
  return table;
}

std::map<int, RadialFunction> kernels_for(const RunConfig& c, const Output& out, const std::vector<LatticePoint>& lambdas = {}) {
  std::map<int, RadialFunction> ks;
  if (c.route == "spectral") {
    auto km = build_kappa(c.rs, c.q, c.walk);
    auto grid = build_grid(c.rs, c.q, c.grid_resolution());
    SpectralOptions so;
    so.precision = c.precision;
    for (int n : c.n_schedule) ks[n] = heat_spectral(km, grid, n, lambdas, so);
    return ks;
  }
  auto table = cached_table(c, out);
  ks = heat_recursive_at(table, c.walk, c.n_schedule);
  if (!lambdas.empty())
    for (auto& [n, k] : ks) {
      RadialFunction kept;
      kept.rank = k.rank;
      for (const auto& l : lambdas) kept.mass[l] = k.mass_at(l);
      k = kept;
    }
  return ks;
}

double theoretical_slope(const RootSystemData& rs, double p) {
  const double r = rs.rank, m = rs.num_indivisible();
  if (p < 2) return p == 1 ? 0.0 : -r / (2 * (p / (p - 1)));
  if (p == 2) return -r / 4 - m / 2;
  return -r / 2 - m;
}

std::string rate_formula(double p) { return p < 2 ? "Thm1-rate" : (p == 2 ? "Thm2-rate" : "Thm3-rate"); }

Json formula_table() {
  return {{"Thm1-rate", "n^{-r/(2p')} rho^n kappa(s_p)^n, 1 <= p < 2"},
          {"Thm2-rate", "n^{-r/4-|Phi++|/2} rho^n, p = 2"},
          {"Thm3-rate", "n^{-r/2-|Phi++|} rho^n, p > 2"}};
}

std::pair<int, int> window(const RunConfig& c) {
  if (c.fit_window) return *c.fit_window;
  int lo = c.n_schedule.front();
  if (lo == 0 && c.n_schedule.size() > 1) lo = c.n_schedule[1];
  return {lo, c.n_schedule.back()};
}

// ---------------------------------------------------------------------------------------------

int cmd_rootsys(const RunConfig& c) {
  const auto& rs = c.rs;
  auto rvec = [](const RVec& v) {
    Json a = Json::array();
    for (const auto& x : v) a.push_back(to_string(x));
    return a;
  };
  Json roots = Json::array();
  for (const auto& pr : rs.pos_roots)
    roots.push_back({{"cartesian", rvec(pr.cartesian)},
                     {"simple_coeffs", std::vector<int>(pr.coeffs.begin(), pr.coeffs.begin() + rs.rank)},
                     {"coroot", std::vector<int>(pr.coroot.c.begin(), pr.coroot.c.begin() + rs.rank)},
                     {"indivisible", pr.indivisible()},
                     {"orbit", pr.orbit}});
  Json cw = Json::array(), gram = Json::array(), simple = Json::array();
  for (const auto& v : rs.coweights) cw.push_back(rvec(v));
  for (const auto& row : rs.gram) gram.push_back(rvec(row));
  for (const auto& v : rs.simple_roots) simple.push_back(rvec(v));
  Json weyl_lengths = Json::array();
  for (const auto& w : rs.weyl) weyl_lengths.push_back(w.length);
  Json eta_j = Json::array();
  for (const auto& e : eta_exact(rs, c.q)) {
    Json terms = Json::object();
    for (const auto& [label, k] : e.coeff) terms["log q_" + std::to_string(label)] = to_string(k);
    eta_j.push_back({{"symbolic", terms}, {"value", e.value(c.q)}});
  }
  Json q_j = Json::object();
  for (const auto& [label, v] : c.q.q) q_j[std::to_string(label)] = to_string(v);
  Json info = {{"family", family_name(rs.family)},
               {"rank", rs.rank},
               {"simple_roots", simple},
               {"positive_roots", roots},
               {"indivisible_count", rs.num_indivisible()},
               {"fundamental_coweights", cw},
               {"gram", gram},
               {"highest_root", rvec(rs.highest_root)},
               {"marks", rs.marks},
               {"good_types", rs.good_types},
               {"weyl_order", rs.order()},
               {"weyl_lengths", weyl_lengths},
               {"w0", rs.w0},
               {"q", q_j},
               {"eta", eta_j},
               {"poincare", to_string(poincare(rs, c.q))}};
  Output out(c.out);
  out.write_json("rootsys.json", {{"metadata", metadata(c, "rootsys-info", Json::object())}, {"root_system", info}});
  std::cout << info.dump(2) << "\n";
  return kExitPass;
}

int cmd_kernel(const RunConfig& c) {
  Output out(c.out);
  auto ks = kernels_for(c, out, c.lambdas);
  VolumeTable vt(c.rs, c.q);
  std::string csv = "n,lambda_coords,k_value,N_lambda,route\n";
  Json totals = Json::object();
  for (const auto& [n, k] : ks) {
    for (const auto& [l, a] : k.mass) {
      if (c.lambdas.empty() && a == 0) continue;
      csv += fmt::format("{},{},{},{},{}\n", n, coords(l, c.rs.rank), num(k.value(vt, l)),
                         to_string(n_lambda(c.rs, c.q, l)), c.route);
    }
    totals[std::to_string(n)] = k.total_mass();
  }
  out.write("kernel.csv", csv);
  out.write_json("kernel.json", {{"metadata", metadata(c, "kernel", {{"k_value", "k_n(lambda) = mass on S_lambda / N_lambda"}})},
                                 {"total_mass", totals}});
  fmt::print("wrote {} and {}\n", out.path("kernel.csv").string(), out.path("kernel.json").string());
  return kExitPass;
}

int cmd_table(const RunConfig& c) {
  Output out(c.out);
  auto km = build_kappa(c.rs, c.q, c.walk);
  auto ks = kernels_for(c, out);
  VolumeTable vt(c.rs, c.q);
  std::string csv = "p,n,norm,theoretical_rate,ratio\n";
  for (double p : c.p_list)
    for (const auto& [n, k] : ks) {
      const double ln = log_lp_norm(k, vt, p), lr = log_theoretical_rate(km, p, n);
      csv += fmt::format("{},{},{},{},{}\n", cli::p_label(p), n, num(std::exp(ln)), num(std::exp(lr)),
                         num(std::exp(ln - lr)));
    }
  Json fits = Json::object();
  const auto [lo, hi] = window(c);
  for (double p : c.p_list) {
    Json e = {{"formula", rate_formula(p)}, {"theoretical_slope", theoretical_slope(c.rs, p)}, {"window", {lo, hi}}};
    try {
      auto f = rate_fit(km, ks, p, lo, hi);
      e["slope"] = f.slope;
      e["plain_slope"] = f.plain_slope;
      e["drift"] = f.drift;
    } catch (const Error& err) {
      e["fit_error"] = err.what();
    }
    fits[cli::p_label(p)] = e;
  }
  out.write("table.csv", csv);
  out.write_json("table.json", {{"metadata", metadata(c, "table", formula_table())},
                                {"rho", km.rho},
                                {"fits", fits}});
  fmt::print("wrote {} and {}\n", out.path("table.csv").string(), out.path("table.json").string());
  return kExitPass;
}

int cmd_regions(const RunConfig& c) {
  Output out(c.out);
  auto km = build_kappa(c.rs, c.q, c.walk);
  std::string csv = "p,n,rule,gamma,radius,size\n";
  for (double p : c.p_list) {
    auto spec = default_region(c.rs, p);
    if (auto it = c.gamma.find(cli::p_label(p)); it != c.gamma.end()) spec.gamma = it->second;
    spec.rn_power = c.rn_power;
    validate_region(c.rs, spec);
    const std::string rule = p < 2 ? "ball n*delta_p, radius n^(1/2+gamma)"
                                   : (p == 2 ? "shell n^(1/2-gamma)..n^(1/2+gamma), wall margin n^(1/2-gamma')"
                                             : "ball |lambda| <= (log n)^rn_power");
    for (int n : c.n_schedule) {
      std::size_t size = 0;
      try {
        size = critical_region(spec, km, n).size();
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyRegion) throw;
      }
      csv += fmt::format("{},{},\"{}\",{},{},{}\n", cli::p_label(p), n, rule, p > 2 ? num(0) : num(spec.gamma),
                         num(region_radius(spec, n)), size);
    }
  }
  out.write("regions.csv", csv);
  out.write_json("regions.json", {{"metadata", metadata(c, "regions", Json::object())}});
  fmt::print("wrote {} and {}\n", out.path("regions.csv").string(), out.path("regions.json").string());
  return kExitPass;
}

RadialFunction datum_profile(const RunConfig& c) {
  if (c.datum.type == "random") return random_profile(c.rs, c.q, c.datum.radius, c.datum.nonneg, c.seed);
  RadialFunction f;
  f.rank = c.rs.rank;
  for (const auto& [l, v] : c.datum.values) f = combine(1, f, 1, delta_profile(c.rs, c.q, l, v));
  return f;
}

int cmd_caloric(const RunConfig& c) {
  Output out(c.out);
  auto table = cached_table(c, out);
  auto f = datum_profile(c);
  VolumeTable vt(c.rs, c.q);
  SphericalCache sph(c.rs, c.q);
  auto k = heat_recursive_at(table, c.walk, c.n_schedule);
  auto u = evolve(table, c.walk, f, c.n_schedule, c.datum.type);
  std::string csv = "p,n,err,mass\n";
  Json summary = Json::object();
  const auto [lo, hi] = window(c);
  for (double p : c.p_list) {
    const double m = mass(sph, f, p);
    auto err = convergence_error(u, k, m, p, vt);
    std::vector<double> x, y;
    for (const auto& [n, e] : err) {
      csv += fmt::format("{},{},{},{}\n", cli::p_label(p), n, num(e), num(m));
      if (n >= lo && n <= hi && n > 0 && e > 0) {
        x.push_back(std::log(n));
        y.push_back(std::log(e));
      }
    }
    Json e = {{"mass", m}, {"formula", "err_n = |u_n - M_p(f) k_n|_p / |k_n|_p"}, {"window", {lo, hi}}};
    if (x.size() >= 2)
      e["slope"] = fit_line(x, y).slope;
    else
      e["slope"] = nullptr;
    summary[cli::p_label(p)] = e;
  }
  out.write("caloric.csv", csv);
  out.write_json("caloric.json", {{"metadata", metadata(c, "caloric", {{"M_p", "sum_lambda N_lambda f(lambda) P_lambda(s_p)"}})},
                                  {"datum_l1", [&] {
                                     double s = 0;
                                     for (const auto& [_, a] : f.mass) s += std::abs(a);
                                     return s;
                                   }()},
                                  {"fits", summary}});
  fmt::print("wrote {} and {}\n", out.path("caloric.csv").string(), out.path("caloric.json").string());
  return kExitPass;
}

int cmd_verify(const RunConfig& c) {
  acceptance::Options opts;
  opts.threads = c.threads;
  opts.precision = c.precision;
  opts.seed = c.seed;
  const std::set<int> only(c.checks.begin(), c.checks.end());
  auto results = acceptance::run(opts, only, [](const acceptance::CheckResult& r) {
    std::cerr << acceptance::summary_line(r) << std::endl;
  });
  Json checks = Json::array();
  bool ok = true, precision_abort = false;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.id << " " << r.name << "\n";
    checks.push_back(acceptance::to_json(r, false));
    ok = ok && r.passed;
    if (r.error_code && exit_code_for(*r.error_code) == kExitPrecision) precision_abort = true;
  }
  Output out(c.out);
  out.write_json("verify.json", {{"metadata", metadata(c, "verify", formula_table())}, {"passed", ok}, {"checks", checks}});
  std::cout << (ok ? "all checks passed" : "some checks failed") << "; report in " << out.path("verify.json").string()
            << "\n";
  if (precision_abort) return kExitPrecision;
  return ok ? kExitPass : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat kernels and caloric functions of random walks on affine buildings"};
  app.require_subcommand(1);

  std::optional<std::string> config_path, out_dir, precision;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--precision", precision, "double or extended")->check(CLI::IsMember({"double", "extended"}));
  app.add_option("--seed", seed, "seed for randomised checks and data");

  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  auto* table = app.add_subcommand("table", "norm table with theoretical rates");
  auto* kernel = app.add_subcommand("kernel", "heat kernel values");
  auto* caloric = app.add_subcommand("caloric", "caloric convergence errors");
  auto* regions = app.add_subcommand("regions", "critical region sizes");
  auto* rootsys = app.add_subcommand("rootsys-info", "root system data");
  for (auto* sub : {verify, table, kernel, caloric, regions, rootsys}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfig;
  }

  RunConfig cfg;
  try {
    cfg = cli::load_config(config_path, {out_dir, threads, precision, seed});
  } catch (const Error& e) {
    std::cerr << "hkb: config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*verify) return cmd_verify(cfg);
    if (*table) return cmd_table(cfg);
    if (*kernel) return cmd_kernel(cfg);
    if (*caloric) return cmd_caloric(cfg);
    if (*regions) return cmd_regions(cfg);
    if (*rootsys) return cmd_rootsys(cfg);
  } catch (const Error& e) {
    std::cerr << "hkb: error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "hkb: error: " << e.what() << "\n";
    return kExitCheckFailure;
  }
  return kExitPass;
}
