#pragma once
// JSON run configuration. Rates are given in Hz (value / 2pi), temperature
// in kelvin and times in seconds. A configuration is built in layers
// (defaults, file, overrides) and resolved into a Scenario plus simulation
// settings.

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "optomag/core.hpp"
#include "optomag/errors.hpp"
#include "optomag/filters.hpp"
#include "optomag/spectrum.hpp"
#include "optomag/sweep.hpp"
#include "optomag/timesim.hpp"

namespace optomag {

using Json = nlohmann::ordered_json;

struct RunConfig {
  Json raw;  // fully merged layer, printed by --print-config
  Scenario scenario;
  SimSettings sim;
};

namespace config_detail {

inline const std::set<std::string>& top_keys() {
  static const std::set<std::string> keys{
      "omega_m_hz",  "omega_a2_hz",     "omega_b1_hz",    "kappa_m_hz",     "kappa_a2_hz",
      "kappa_b1_hz", "kappa_a1_hz",     "kappa_b2_hz",    "G_a_hz",         "G_b_hz",
      "pump_a",      "pump_b",          "T_kelvin",       "tau_s",          "tau_a2_s",
      "tau_b1_s",    "detuning_a2_hz",  "detuning_b1_hz", "delay_s",        "filter_shape",
      "filter_tau_convention",          "mode_pair",      "quadrature",     "oracle"};
  return keys;
}

inline const std::set<std::string> kPumpKeys{"power_w", "omega_p_hz", "g_hz", "kappa_drive_hz"};
inline const std::set<std::string> kQuadKeys{"rel_tol", "abs_tol", "max_panels", "window_hz"};
inline const std::set<std::string> kOracleKeys{"n_traj", "dt_s", "t_relax_s", "seed", "integrator"};

inline void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw UsageError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get(const Json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw UsageError(where + ": key '" + key + "' is missing or has the wrong type");
  }
}

inline PumpSpec parse_pump(const Json& j, const std::string& where) {
  check_keys(j, kPumpKeys, where);
  PumpSpec p;
  p.power = get<double>(j, "power_w", where);
  p.omega_p = angular(get<double>(j, "omega_p_hz", where));
  p.g = angular(get<double>(j, "g_hz", where));
  p.kappa_drive = angular(get<double>(j, "kappa_drive_hz", where));
  return p;
}

}  // namespace config_detail

/// Configuration matching SystemParams::baseline() with 1 us square filters.
inline Json default_config() {
  Json j;
  j["omega_m_hz"] = 6.8e9;
  j["omega_a2_hz"] = 193067.9e9;
  j["omega_b1_hz"] = 193123.2e9;
  j["kappa_m_hz"] = 1e6;
  j["kappa_a2_hz"] = 100e6;
  j["kappa_b1_hz"] = 100e6;
  j["kappa_a1_hz"] = 100e6;
  j["kappa_b2_hz"] = 100e6;
  j["G_a_hz"] = 10e6;
  j["G_b_hz"] = 6.5e6;
  j["T_kelvin"] = 0.1;
  j["tau_s"] = 1e-6;
  j["detuning_a2_hz"] = 0.0;
  j["detuning_b1_hz"] = 0.0;
  j["delay_s"] = 0.0;
  j["filter_shape"] = "square";
  j["filter_tau_convention"] = "si";
  j["mode_pair"] = "a2-b1";
  j["quadrature"] = {{"rel_tol", 1e-8}, {"abs_tol", 1e-12}, {"max_panels", 100000}, {"window_hz", 0.0}};
  j["oracle"] = {{"n_traj", 2000}, {"dt_s", 5e-11}, {"t_relax_s", 0.0}, {"seed", 1}, {"integrator", "euler"}};
  return j;
}

/// Parses JSON text; syntax errors carry the parser's line and column.
inline Json parse_json_text(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::string msg = e.what();
    // the library reports "... at line L, column C: ..." when it can
    throw UsageError(where + ": " + msg);
  }
}

inline Json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_json_text(ss.str(), path);
}

/// Applies `layer` on top of `base`. Nested objects merge key by key. A pump
/// block replaces the matching coupling key and vice versa.
inline void merge_layer(Json& base, const Json& layer, const std::string& where) {
  config_detail::check_keys(layer, config_detail::top_keys(), where);
  for (const auto& [pump, coupling] : {std::pair{"pump_a", "G_a_hz"}, std::pair{"pump_b", "G_b_hz"}}) {
    if (layer.contains(pump) && layer.contains(coupling))
      throw UsageError(where + ": give either '" + pump + "' or '" + coupling + "', not both");
    if (layer.contains(pump)) base.erase(coupling);
    if (layer.contains(coupling)) base.erase(pump);
  }
  for (auto it = layer.begin(); it != layer.end(); ++it) {
    const bool nested = it.key() == "quadrature" || it.key() == "oracle";
    if (nested && it.value().is_object() && base.contains(it.key())) {
      for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) base[it.key()][jt.key()] = jt.value();
    } else {
      base[it.key()] = it.value();
    }
  }
}

/// Parses a `key=value` override. Dotted keys address nested blocks
/// (quadrature.rel_tol); the value is read as JSON and falls back to a string.
inline Json override_layer(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("--param expects KEY=VALUE, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  Json layer;
  const auto dot = key.find('.');
  if (dot == std::string::npos)
    layer[key] = value;
  else
    layer[key.substr(0, dot)][key.substr(dot + 1)] = value;
  return layer;
}

/// Turns a merged configuration into the objects used by the library.
inline RunConfig resolve_config(const Json& merged) {
  using namespace config_detail;
  const std::string where = "config";
  check_keys(merged, top_keys(), where);
  RunConfig rc;
  rc.raw = merged;
  SystemParams& p = rc.scenario.params;
  p.omega_m = angular(get<double>(merged, "omega_m_hz", where));
  p.omega_a2 = angular(get<double>(merged, "omega_a2_hz", where));
  p.omega_b1 = angular(get<double>(merged, "omega_b1_hz", where));
  p.kappa_m = angular(get<double>(merged, "kappa_m_hz", where));
  p.kappa_a2 = angular(get<double>(merged, "kappa_a2_hz", where));
  p.kappa_b1 = angular(get<double>(merged, "kappa_b1_hz", where));
  p.kappa_a1 = angular(get<double>(merged, "kappa_a1_hz", where));
  p.kappa_b2 = angular(get<double>(merged, "kappa_b2_hz", where));
  p.T = get<double>(merged, "T_kelvin", where);

  p.G_a = merged.contains("pump_a") ? pump_to_coupling(parse_pump(merged["pump_a"], "pump_a"))
                                    : angular(get<double>(merged, "G_a_hz", where));
  p.G_b = merged.contains("pump_b") ? pump_to_coupling(parse_pump(merged["pump_b"], "pump_b"))
                                    : angular(get<double>(merged, "G_b_hz", where));

  const auto violations = validate(p);
  for (const auto& v : violations)
    if (v.severity == Violation::Severity::error) throw UsageError(where + ": " + v.field + " " + v.rule);

  FilterPair& f = rc.scenario.filters;
  const double tau = get<double>(merged, "tau_s", where);
  f.a2.tau = merged.contains("tau_a2_s") ? get<double>(merged, "tau_a2_s", where) : tau;
  f.b1.tau = merged.contains("tau_b1_s") ? get<double>(merged, "tau_b1_s", where) : tau;
  f.a2.detuning = angular(get<double>(merged, "detuning_a2_hz", where));
  f.b1.detuning = angular(get<double>(merged, "detuning_b1_hz", where));
  f.a2.delay = f.b1.delay = get<double>(merged, "delay_s", where);
  f.a2.shape = f.b1.shape = parse_filter_shape(get<std::string>(merged, "filter_shape", where));
  try {
    f.a2.check();
    f.b1.check();
  } catch (const DomainError& e) {
    throw UsageError(where + ": " + e.what());
  }
  rc.scenario.tau_convention = parse_tau_convention(get<std::string>(merged, "filter_tau_convention", where));
  rc.scenario.pair = parse_mode_pair(get<std::string>(merged, "mode_pair", where));

  const Json& q = merged.at("quadrature");
  check_keys(q, kQuadKeys, "quadrature");
  QuadratureSettings& qs = rc.scenario.quadrature;
  qs.rel_tol = get<double>(q, "rel_tol", "quadrature");
  qs.abs_tol = get<double>(q, "abs_tol", "quadrature");
  qs.max_panels = get<std::size_t>(q, "max_panels", "quadrature");
  qs.window_halfwidth = angular(get<double>(q, "window_hz", "quadrature"));
  qs.check();

  const Json& o = merged.at("oracle");
  check_keys(o, kOracleKeys, "oracle");
  rc.sim.n_traj = get<std::size_t>(o, "n_traj", "oracle");
  rc.sim.dt = get<double>(o, "dt_s", "oracle");
  rc.sim.t_relax = get<double>(o, "t_relax_s", "oracle");
  rc.sim.seed = get<std::uint64_t>(o, "seed", "oracle");
  rc.sim.integrator = parse_integrator(get<std::string>(o, "integrator", "oracle"));
  return rc;
}

}  // namespace optomag
