#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hkb/error.hpp"
#include "hkb/numeric.hpp"

namespace hkb::acceptance {

struct Options {
  int threads = 1;
  Precision precision = Precision::Double;
  std::uint64_t seed = 20240917;
};

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string tolerance;
  nlohmann::json measured;
  std::string error;  // set when the check threw
  std::optional<ErrorCode> error_code;
  double seconds = 0;
};

struct CheckInfo {
  int id;
  std::string name;
};

const std::vector<CheckInfo>& checks();

CheckResult run_check(int id, const Options& opts);

// Runs the selected checks (all when empty) on up to opts.threads workers; results ordered by id.
// `progress` is called once per finished check, from the worker that ran it.
std::vector<CheckResult> run(const Options& opts, const std::set<int>& only = {},
                             const std::function<void(const CheckResult&)>& progress = {});

// One "PASS"/"FAIL" line: "PASS  3 plancherel-integrity  (0.4 s)".
std::string summary_line(const CheckResult& r);

nlohmann::json to_json(const CheckResult& r, bool with_timing = true);

}  // namespace hkb::acceptance
