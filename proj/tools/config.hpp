#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hkb/numeric.hpp"
#include "hkb/rootsys.hpp"
#include "hkb/walk.hpp"

namespace hkb::cli {

// Initial profile for the caloric runs.
struct Datum {
  std::string type = "delta";                   // delta | profile | random
  std::vector<std::pair<LatticePoint, double>> values;  // per-vertex values on spheres (delta, profile)
  double radius = 4;                            // random
  bool nonneg = true;                           // random
};

struct RunConfig {
  Family family = Family::A1;
  nlohmann::json q_spec = 2;
  QParams q;
  RootSystemData rs;
  WalkSpec walk;
  std::vector<double> p_list = {1, 1.5, 2, 3, std::numeric_limits<double>::infinity()};
  std::vector<int> n_schedule;
  std::map<std::string, double> gamma;  // keyed by p label
  double rn_power = 2;
  int resolution = 0;                   // 0: 64 for rank 1, 32 for rank 2
  Precision precision = Precision::Double;
  std::string out = "hkb-out";
  std::uint64_t seed = 20240917;
  int threads = 1;
  std::string route = "recursive";      // kernel: recursive | spectral
  std::vector<LatticePoint> lambdas;    // kernel: empty means the whole support
  std::optional<std::pair<int, int>> fit_window;
  Datum datum;
  std::vector<int> checks;              // verify: empty means all

  int grid_resolution() const { return resolution > 0 ? resolution : (rs.rank == 1 ? 64 : 32); }
  // Every resolved field, for output metadata.
  nlohmann::json to_json() const;
};

// Overrides from the command line; applied after the file so flags win.
struct Overrides {
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::string> precision;
  std::optional<std::uint64_t> seed;
};

// Parses and validates; throws hkb::Error(InvalidConfig, ...) naming the offending key or line.
RunConfig load_config(const std::optional<std::string>& path, const Overrides& overrides);
RunConfig parse_config(const std::string& text, const Overrides& overrides);

std::string p_label(double p);

}  // namespace hkb::cli
