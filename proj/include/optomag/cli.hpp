#pragma once
// Command-line front end. Machine-readable results go to `out`, messages to
// `err`. Exit codes: 0 ok, 1 usage or I/O error, 2 unstable parameters,
// 3 oracle disagreement.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "optomag/config.hpp"
#include "optomag/entanglement.hpp"
#include "optomag/figures.hpp"
#include "optomag/oracle.hpp"
#include "optomag/persist.hpp"
#include "optomag/spectrum.hpp"
#include "optomag/sweep.hpp"

namespace optomag::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kUnstable = 2, kOracleFail = 3 };

inline constexpr const char* kWorkersEnv = "OPTOMAG_WORKERS";

struct Options {
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> traj;
  std::optional<double> dt;
  std::optional<std::string> integrator;
  std::string fig;
  std::vector<std::string> axes;
  std::vector<std::string> params;
  bool print_config = false;
  bool timing = false;
  std::size_t filter_points = 201;
  double filter_span_hz = 0.0;
};

inline AxisSpec parse_axis(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 4 && parts.size() != 5)
    throw UsageError("--axis expects NAME:START:STOP:POINTS[:log], got '" + text + "'");
  AxisSpec a;
  a.name = parts[0];
  try {
    std::size_t used = 0;
    a.start = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("start");
    a.stop = std::stod(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("stop");
    const long n = std::stol(parts[3], &used);
    if (used != parts[3].size() || n < 1) throw std::invalid_argument("points");
    a.points = static_cast<std::size_t>(n);
  } catch (const std::exception&) {
    throw UsageError("--axis '" + text + "': START, STOP and POINTS must be numbers");
  }
  if (parts.size() == 5) {
    if (parts[4] == "log")
      a.scale = AxisScale::log;
    else if (parts[4] != "linear")
      throw UsageError("--axis '" + text + "': scale must be log or linear");
  }
  a.check();
  return a;
}

inline unsigned default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Defaults, then the figure preset, the config file, --param overrides and
/// the dedicated simulation flags, later layers winning.
inline Json merged_config(const Options& o) {
  Json j = default_config();
  if (!o.fig.empty()) merge_layer(j, figure_layer(parse_figure(o.fig)), "--fig " + o.fig);
  if (!o.config_path.empty()) merge_layer(j, load_json_file(o.config_path), o.config_path);
  for (const auto& p : o.params) merge_layer(j, override_layer(p), "--param " + p);
  Json sim;
  if (o.seed) sim["seed"] = *o.seed;
  if (o.traj) sim["n_traj"] = *o.traj;
  if (o.dt) sim["dt_s"] = *o.dt;
  if (o.integrator) sim["integrator"] = *o.integrator;
  if (!sim.empty()) merge_layer(j, Json{{"oracle", sim}}, "flags");
  return j;
}

inline Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(); }

inline int cmd_point(const RunConfig& rc, std::ostream& out) {
  const auto r = evaluate_point(rc.scenario);
  Json j;
  j["stable"] = r.stability.stable;
  j["marginal"] = r.stability.marginal;
  j["abscissa_hz"] = cyclic(r.stability.abscissa);
  j["E_N"] = optional_json(r.E_N);
  if (r.output) {
    j["V4"] = matrix_json(extract_bipartite(r.output->cm, rc.scenario.pair).matrix());
    j["V6"] = matrix_json(r.output->cm.matrix());
    j["physical_margin"] = r.physical->margin;
    const auto& d = r.output->diagnostics;
    j["diagnostics"] = {{"integral_error", d.integral_error}, {"panels", d.panels},
                        {"evaluations", d.evaluations},       {"window_hz", cyclic(d.window)},
                        {"imag_residual", d.imag_residual},   {"converged", d.converged}};
  } else {
    j["V4"] = nullptr;
  }
  out << j.dump() << '\n';
  return r.stability.stable ? kOk : kUnstable;
}

inline int cmd_stability(const RunConfig& rc, std::ostream& out) {
  const auto rep = is_stable(make_model(rc.scenario.params));
  Json ev = Json::array();
  for (const auto& z : rep.eigenvalues) ev.push_back({cyclic(z.real()), cyclic(z.imag())});
  out << Json{{"stable", rep.stable},
              {"marginal", rep.marginal},
              {"abscissa_hz", cyclic(rep.abscissa)},
              {"eigenvalues_hz", ev}}
             .dump()
      << '\n';
  return kOk;
}

inline int cmd_oracle(const RunConfig& rc, unsigned workers, std::ostream& out) {
  const auto model = make_model(rc.scenario.params);
  SimSettings sim = rc.sim;
  sim.workers = workers;
  const auto r = run_oracle(model, rc.scenario.filters_used(), sim, rc.scenario.quadrature);
  Json j;
  j["E_N_spectral"] = r.E_N_spectral;
  j["E_N_mc"] = r.E_N_mc;
  j["sigma"] = r.sigma;
  j["z_score"] = r.z_score;
  j["pass"] = r.pass;
  j["max_entry_z"] = r.max_entry_z;
  j["entries_pass"] = r.entries_pass;
  j["V4_spectral"] = matrix_json(r.V4_spectral);
  j["V4_mc"] = matrix_json(r.V4_mc);
  j["V4_sigma"] = matrix_json(r.V4_sigma);
  j["n_traj"] = r.settings.n_traj;
  j["dt_s"] = r.settings.dt;
  j["t_relax_s"] = r.settings.t_relax;
  j["seed"] = r.settings.seed;
  j["integrator"] = integrator_name(r.settings.integrator);
  out << j.dump() << '\n';
  return r.pass ? kOk : kOracleFail;
}

inline int cmd_filters(const RunConfig& rc, const Options& o, std::ostream& out) {
  const FilterPair f = rc.scenario.filters_used();
  if (o.filter_points < 2) throw UsageError("--points must be >= 2");
  const double span =
      o.filter_span_hz > 0.0 ? angular(o.filter_span_hz) : 10.5 * kTwoPi / std::min(f.a2.tau, f.b1.tau);
  out << "omega_hz,abs2_a2,abs2_b1\n";
  for (std::size_t i = 0; i < o.filter_points; ++i) {
    const double w = -span + 2.0 * span * static_cast<double>(i) / static_cast<double>(o.filter_points - 1);
    out << format_double(cyclic(w)) << ',' << format_double(std::norm(filter_freq(w, f.a2))) << ','
        << format_double(std::norm(filter_freq(w, f.b1))) << '\n';
  }
  return kOk;
}

inline Json summarize(const SweepTable& t) {
  std::size_t stable = 0;
  const SweepRecord* best = nullptr;
  for (const auto& r : t.records) {
    if (!r.stable) continue;
    ++stable;
    if (r.E_N && (!best || *r.E_N > *best->E_N)) best = &r;
  }
  Json j;
  j["points"] = t.records.size();
  j["stable_count"] = stable;
  j["max_E_N"] = best ? Json(*best->E_N) : Json();
  Json arg;
  if (best)
    for (std::size_t a = 0; a < t.axes.size(); ++a) arg[t.axes[a]] = best->values[a];
  j["argmax"] = best ? arg : Json();
  return j;
}

inline void write_table(const SweepTable& t, const Options& o, std::ostream& out, Json& summary) {
  const Format fmt = parse_format(o.format);
  if (o.out_path.empty()) {
    if (fmt == Format::csv)
      write_csv(t, out);
    else
      write_jsonl(t, out);
    return;
  }
  persist(t, o.out_path, fmt);
  summary["out"] = o.out_path;
  if (t.axes.size() == 2 && ((t.axes[0] == "G_a" && t.axes[1] == "G_b") || (t.axes[0] == "G_b" && t.axes[1] == "G_a"))) {
    const std::string dat = std::filesystem::path(o.out_path).replace_extension(".dat").string();
    persist_dat(t, dat);
    summary["dat"] = dat;
  }
}

inline int cmd_sweep(const RunConfig& rc, const Options& o, unsigned workers, std::ostream& out,
                     std::ostream& err) {
  GridSpec grid;
  std::optional<Figure> fig;
  if (!o.fig.empty()) fig = parse_figure(o.fig);
  if (fig && !o.axes.empty()) throw UsageError("--fig and --axis are mutually exclusive");
  if (fig) {
    grid = figure_grid(*fig);
  } else {
    if (o.axes.empty()) throw UsageError("sweep needs --axis or --fig");
    for (const auto& a : o.axes) grid.axes.push_back(parse_axis(a));
  }
  const auto table = sweep_grid(rc.scenario, grid, workers, o.timing);
  Json summary = summarize(table);

  if (fig == Figure::fig2b) {
    Json optima = Json::array();
    for (double km : kFig2bKappaM) {
      Scenario s = rc.scenario;
      s.params.kappa_m = angular(km);
      const auto opt = optimize_Gb(s, 0.0, angular(kFig2GridMaxHz), workers);
      optima.push_back({{"kappa_m", km}, {"G_b", cyclic(opt.G_b)}, {"E_N", opt.E_N}});
    }
    summary["optima"] = optima;
  } else if (fig == Figure::fig3b) {
    Json thresholds = Json::array();
    for (double tau : kFig3bTaus) {
      Scenario s = rc.scenario;
      s.filters.a2.tau = s.filters.b1.tau = tau;
      try {
        thresholds.push_back({{"tau", tau}, {"T_star", temperature_threshold(s).T}});
      } catch (const DomainError& e) {
        err << "threshold for tau = " << tau << ": " << e.what() << '\n';
        thresholds.push_back({{"tau", tau}, {"T_star", nullptr}});
      }
    }
    summary["thresholds"] = thresholds;
  }

  write_table(table, o, out, summary);
  (o.out_path.empty() ? err : out) << summary.dump() << '\n';
  return kOk;
}

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Filtered output entanglement of a three-mode optomagnonic system"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--param", o.params, "override KEY=VALUE (repeatable, dotted keys for nested blocks)");
    sub->add_option("--fig", o.fig, "figure preset: 2a, 2b, 3a or 3b");
    sub->add_option("--workers", o.workers, "worker threads")->envname(kWorkersEnv);
    sub->add_flag("--print-config", o.print_config, "print the resolved configuration and exit");
  };
  auto* point = app.add_subcommand("point", "evaluate E_N and the output covariance at one point");
  auto* sweep = app.add_subcommand("sweep", "sweep one or two parameters, or run a figure preset");
  auto* oracle = app.add_subcommand("oracle", "compare the spectral CM against the stochastic simulation");
  auto* stability = app.add_subcommand("stability", "print the drift spectrum and stability verdict");
  auto* filters = app.add_subcommand("filters", "print |F(w)|^2 for both filters");
  for (auto* sub : {point, sweep, oracle, stability, filters}) common(sub);
  sweep->add_option("--axis", o.axes, "NAME:START:STOP:POINTS[:log], rates in Hz (up to two)");
  sweep->add_option("--out", o.out_path, "output file (records go to stdout when omitted)");
  sweep->add_option("--format", o.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
  sweep->add_flag("--timing", o.timing, "include per-point runtime in the records");
  oracle->add_option("--seed", o.seed, "RNG seed");
  oracle->add_option("--traj", o.traj, "number of trajectories");
  oracle->add_option("--dt", o.dt, "time step in s");
  oracle->add_option("--integrator", o.integrator, "euler or exact");
  filters->add_option("--points", o.filter_points, "number of frequency samples");
  filters->add_option("--span", o.filter_span_hz, "half width of the frequency range in Hz");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (sweep->count("--axis") > 2) {
    err << "error: at most two --axis options\n";
    return kUsage;
  }
  const unsigned workers = o.workers > 0 ? o.workers : default_workers();

  try {
    const Json merged = merged_config(o);
    const RunConfig rc = resolve_config(merged);
    if (o.print_config) {
      out << merged.dump(2) << '\n';
      return kOk;
    }
    if (!o.fig.empty() && !sweep->parsed() && !point->parsed())
      throw UsageError("--fig applies to sweep and point only");
    if (point->parsed()) return cmd_point(rc, out);
    if (sweep->parsed()) return cmd_sweep(rc, o, workers, out, err);
    if (oracle->parsed()) return cmd_oracle(rc, workers, out);
    if (stability->parsed()) return cmd_stability(rc, out);
    return cmd_filters(rc, o, out);
  } catch (const StabilityError& e) {
    err << "unstable: " << e.what() << " (abscissa " << cyclic(e.abscissa()) << " Hz)\n";
    return kUnstable;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace optomag::cli
