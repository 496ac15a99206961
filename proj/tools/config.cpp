#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "hkb/error.hpp"

namespace hkb::cli {

namespace {

using Json = nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::InvalidConfig, fmt::format("config key '{}': {}", key, what));
}

void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) fail(where.empty() ? key : where + "." + key, "unknown key");
}

Rational rational_of(const Json& v, const std::string& key) {
  try {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_number()) return parse_rational(v.dump());
  } catch (const std::exception& e) {
    fail(key, e.what());
  }
  fail(key, "expected a number or a rational string such as \"9/10\"");
}

double p_of(const Json& v, const std::string& key) {
  if (v.is_string() && (v == "inf" || v == "infinity")) return std::numeric_limits<double>::infinity();
  double p = 0;
  if (v.is_number()) {
    p = v.get<double>();
  } else if (v.is_string()) {
    p = rational_of(v, key).get_d();
  } else {
    fail(key, "expected a number or \"inf\"");
  }
  if (!(p >= 1)) fail(key, "p must lie in [1, inf]");
  return p;
}

LatticePoint point_of(const Json& v, int rank, const std::string& key) {
  if (!v.is_array() || static_cast<int>(v.size()) != rank)
    fail(key, fmt::format("expected a list of {} integers", rank));
  LatticePoint l;
  for (int i = 0; i < rank; ++i) {
    if (!v[i].is_number_integer()) fail(key, "coordinates must be integers");
    l[i] = v[i].get<int>();
  }
  return l;
}

int int_of(const Json& v, const std::string& key) {
  if (!v.is_number_integer()) fail(key, "expected an integer");
  return v.get<int>();
}

WalkSpec default_walk(const RootSystemData& rs) {
  WalkSpec w;
  w.coeffs[LatticePoint{}] = Rational(1, 10);
  for (int i = 0; i < rs.rank; ++i) w.coeffs[unit_point(i)] = Rational(9, 10 * rs.rank);
  return w;
}

std::vector<int> schedule_of(const Json& v) {
  std::vector<int> out;
  if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(int_of(v[i], fmt::format("n[{}]", i)));
  } else if (v.is_object()) {
    reject_unknown(v, {"from", "to", "step"}, "n");
    const int from = v.contains("from") ? int_of(v.at("from"), "n.from") : 0;
    if (!v.contains("to")) fail("n.to", "missing");
    const int to = int_of(v.at("to"), "n.to");
    const int step = v.contains("step") ? int_of(v.at("step"), "n.step") : 1;
    if (step <= 0) fail("n.step", "must be positive");
    for (int n = from; n <= to; n += step) out.push_back(n);
  } else {
    fail("n", "expected a list or {from, to, step}");
  }
  for (int n : out)
    if (n < 0) fail("n", "times must be nonnegative");
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) fail("n", "schedule is empty");
  return out;
}

Datum datum_of(const Json& v, int rank) {
  Datum d;
  if (!v.is_object()) fail("datum", "expected an object");
  if (!v.contains("type") || !v.at("type").is_string()) fail("datum.type", "missing");
  d.type = v.at("type").get<std::string>();
  if (d.type == "delta") {
    reject_unknown(v, {"type", "lambda", "value"}, "datum");
    if (!v.contains("lambda")) fail("datum.lambda", "missing");
    const double value = v.contains("value") ? v.at("value").get<double>() : 1.0;
    d.values.push_back({point_of(v.at("lambda"), rank, "datum.lambda"), value});
  } else if (d.type == "profile") {
    reject_unknown(v, {"type", "values"}, "datum");
    if (!v.contains("values") || !v.at("values").is_array()) fail("datum.values", "expected a list");
    for (std::size_t i = 0; i < v.at("values").size(); ++i) {
      const auto& e = v.at("values")[i];
      const std::string key = fmt::format("datum.values[{}]", i);
      if (!e.is_object()) fail(key, "expected {lambda, value}");
      reject_unknown(e, {"lambda", "value"}, key);
      if (!e.contains("lambda") || !e.contains("value") || !e.at("value").is_number())
        fail(key, "expected {lambda, value}");
      d.values.push_back({point_of(e.at("lambda"), rank, key + ".lambda"), e.at("value").get<double>()});
    }
  } else if (d.type == "random") {
    reject_unknown(v, {"type", "radius", "nonneg"}, "datum");
    if (v.contains("radius")) d.radius = v.at("radius").get<double>();
    if (v.contains("nonneg")) d.nonneg = v.at("nonneg").get<bool>();
    if (!(d.radius >= 0)) fail("datum.radius", "must be nonnegative");
  } else {
    fail("datum.type", "expected delta, profile or random");
  }
  for (const auto& [l, _] : d.values)
    if (!is_dominant(l, rank)) fail("datum", "lambda must be dominant");
  return d;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + std::min(byte, text.size()), '\n'));
}

}  // namespace

std::string p_label(double p) { return std::isinf(p) ? "inf" : fmt::format("{:g}", p); }

Json RunConfig::to_json() const {
  Json ps = Json::array();
  for (double p : p_list) ps.push_back(std::isinf(p) ? Json("inf") : Json(p));
  Json lams = Json::array();
  for (const auto& l : lambdas) lams.push_back(std::vector<int>(l.c.begin(), l.c.begin() + rs.rank));
  Json q_resolved = Json::object();
  for (const auto& [label, v] : q.q) q_resolved[std::to_string(label)] = to_string(v);
  Json dat = {{"type", datum.type}};
  if (datum.type == "random") {
    dat["radius"] = datum.radius;
    dat["nonneg"] = datum.nonneg;
  } else {
    Json vals = Json::array();
    for (const auto& [l, v] : datum.values)
      vals.push_back({{"lambda", std::vector<int>(l.c.begin(), l.c.begin() + rs.rank)}, {"value", v}});
    dat["values"] = vals;
  }
  Json j = {{"family", family_name(family)},
            {"q", q_resolved},
            {"walk", walk.to_json(rs.rank)},
            {"p", ps},
            {"n", n_schedule},
            {"gamma", gamma},
            {"rn_power", rn_power},
            {"resolution", grid_resolution()},
            {"precision", precision_name(precision)},
            {"out", out},
            {"seed", seed},
            {"threads", threads},
            {"route", route},
            {"lambdas", lams},
            {"datum", dat},
            {"checks", checks}};
  if (fit_window) j["fit_window"] = {fit_window->first, fit_window->second};
  return j;
}

RunConfig parse_config(const std::string& text, const Overrides& overrides) {
  Json j = Json::object();
  if (!text.empty()) {
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorCode::InvalidConfig, fmt::format("config line {}: {}", line_of(text, e.byte), e.what()));
    }
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  reject_unknown(j,
                 {"family", "q", "walk", "p", "n", "gamma", "rn_power", "resolution", "precision", "out", "seed",
                  "threads", "route", "lambdas", "datum", "fit_window", "checks"},
                 "");

  RunConfig c;
  if (j.contains("family")) {
    if (!j.at("family").is_string()) fail("family", "expected a string");
    try {
      c.family = parse_family(j.at("family").get<std::string>());
    } catch (const Error& e) {
      fail("family", e.what());
    }
  }
  c.rs = build_root_system(c.family);

  if (j.contains("q")) c.q_spec = j.at("q");
  if (c.q_spec.is_object()) {
    std::map<int, Rational> m;
    for (const auto& [label, v] : c.q_spec.items()) {
      int k = -1;
      try {
        k = std::stoi(label);
      } catch (const std::exception&) {
        fail("q." + label, "labels are type indices 0..r");
      }
      m[k] = rational_of(v, "q." + label);
    }
    c.q = make_qparams(c.rs, m);
  } else {
    c.q = uniform_qparams(c.rs, rational_of(c.q_spec, "q"));
  }
  if (!c.q.standard)
    throw Error(ErrorCode::ExceptionalCaseUnsupported,
                "the q-parameters put the BC building in the exceptional case, which is not supported");

  if (j.contains("walk")) {
    try {
      c.walk = WalkSpec::from_json(j.at("walk"), c.rs.rank);
    } catch (const std::exception& e) {
      fail("walk", e.what());
    }
  } else {
    c.walk = default_walk(c.rs);
  }
  validate_walk(c.rs, c.walk);

  if (j.contains("p")) {
    if (!j.at("p").is_array() || j.at("p").empty()) fail("p", "expected a nonempty list");
    c.p_list.clear();
    for (std::size_t i = 0; i < j.at("p").size(); ++i) c.p_list.push_back(p_of(j.at("p")[i], fmt::format("p[{}]", i)));
  }
  c.n_schedule = j.contains("n") ? schedule_of(j.at("n")) : schedule_of(Json{{"from", 100}, {"to", 400}, {"step", 50}});
  if (j.contains("gamma")) {
    if (!j.at("gamma").is_object()) fail("gamma", "expected an object keyed by p");
    for (const auto& [key, v] : j.at("gamma").items()) {
      if (!v.is_number()) fail("gamma." + key, "expected a number");
      c.gamma[p_label(p_of(Json(key), "gamma." + key))] = v.get<double>();
    }
  }
  if (j.contains("rn_power")) {
    if (!j.at("rn_power").is_number()) fail("rn_power", "expected a number");
    c.rn_power = j.at("rn_power").get<double>();
  }
  if (j.contains("resolution")) {
    c.resolution = int_of(j.at("resolution"), "resolution");
    if (c.resolution < 16) fail("resolution", "must be at least 16");
  }
  if (j.contains("precision")) {
    if (!j.at("precision").is_string()) fail("precision", "expected \"double\" or \"extended\"");
    try {
      c.precision = parse_precision(j.at("precision").get<std::string>());
    } catch (const std::exception& e) {
      fail("precision", e.what());
    }
  }
  if (j.contains("out")) {
    if (!j.at("out").is_string()) fail("out", "expected a path");
    c.out = j.at("out").get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail("seed", "expected an unsigned integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("threads")) c.threads = int_of(j.at("threads"), "threads");
  if (j.contains("route")) {
    if (!j.at("route").is_string()) fail("route", "expected \"recursive\" or \"spectral\"");
    c.route = j.at("route").get<std::string>();
    if (c.route != "recursive" && c.route != "spectral") fail("route", "expected \"recursive\" or \"spectral\"");
  }
  if (j.contains("lambdas")) {
    if (!j.at("lambdas").is_array()) fail("lambdas", "expected a list of points");
    for (std::size_t i = 0; i < j.at("lambdas").size(); ++i) {
      auto l = point_of(j.at("lambdas")[i], c.rs.rank, fmt::format("lambdas[{}]", i));
      if (!is_dominant(l, c.rs.rank)) fail(fmt::format("lambdas[{}]", i), "must be dominant");
      c.lambdas.push_back(l);
    }
  }
  if (j.contains("datum")) {
    c.datum = datum_of(j.at("datum"), c.rs.rank);
  } else {
    c.datum.values.push_back({2 * unit_point(0), 1.0});
  }
  if (j.contains("fit_window")) {
    const auto& w = j.at("fit_window");
    if (!w.is_array() || w.size() != 2) fail("fit_window", "expected [n_lo, n_hi]");
    c.fit_window = std::make_pair(int_of(w[0], "fit_window[0]"), int_of(w[1], "fit_window[1]"));
    if (c.fit_window->first >= c.fit_window->second) fail("fit_window", "n_lo must be below n_hi");
  }
  if (j.contains("checks")) {
    if (!j.at("checks").is_array()) fail("checks", "expected a list of check ids");
    for (std::size_t i = 0; i < j.at("checks").size(); ++i)
      c.checks.push_back(int_of(j.at("checks")[i], fmt::format("checks[{}]", i)));
  }

  if (overrides.out) c.out = *overrides.out;
  if (overrides.threads) c.threads = *overrides.threads;
  if (overrides.precision) {
    try {
      c.precision = parse_precision(*overrides.precision);
    } catch (const std::exception& e) {
      fail("--precision", e.what());
    }
  }
  if (overrides.seed) c.seed = *overrides.seed;
  if (c.threads < 1) fail("threads", "must be at least 1");
  return c;
}

RunConfig load_config(const std::optional<std::string>& path, const Overrides& overrides) {
  std::string text;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error(ErrorCode::InvalidConfig, "cannot read config file " + *path);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_config(text, overrides);
}

}  // namespace hkb::cli
