#pragma once
// Grid sweeps, the 1-D optimum search over G_b, tau scans and the
// temperature threshold search.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "optomag/core.hpp"
#include "optomag/dynamics.hpp"
#include "optomag/entanglement.hpp"
#include "optomag/errors.hpp"
#include "optomag/filters.hpp"
#include "optomag/spectrum.hpp"

namespace optomag {

/// Everything needed to evaluate one point. Filter durations are nominal and
/// go through `tau_convention` before use.
struct Scenario {
  SystemParams params = SystemParams::baseline();
  FilterPair filters;
  TauConvention tau_convention = TauConvention::si;
  QuadratureSettings quadrature;
  ModePair pair = ModePair::a2_b1;

  FilterPair filters_used() const { return effective_filters(filters, tau_convention); }
};

// ---------------------------------------------------------------- axes

enum class AxisKind { G_a, G_b, kappa_m, T, tau, tau_a2, tau_b1, detuning_a2, detuning_b1 };

struct AxisInfo {
  AxisKind kind;
  const char* name;
  bool frequency;  // values given in Hz, applied as 2pi * value
};

inline constexpr AxisInfo kAxes[] = {
    {AxisKind::G_a, "G_a", true},          {AxisKind::G_b, "G_b", true},
    {AxisKind::kappa_m, "kappa_m", true},  {AxisKind::T, "T", false},
    {AxisKind::tau, "tau", false},         {AxisKind::tau_a2, "tau_a2", false},
    {AxisKind::tau_b1, "tau_b1", false},   {AxisKind::detuning_a2, "detuning_a2", true},
    {AxisKind::detuning_b1, "detuning_b1", true},
};

inline const AxisInfo& axis_info(const std::string& name) {
  for (const auto& a : kAxes)
    if (name == a.name) return a;
  std::string known;
  for (const auto& a : kAxes) known += std::string(known.empty() ? "" : ", ") + a.name;
  throw UsageError("unknown sweep axis '" + name + "' (known: " + known + ")");
}

/// Sets one swept quantity. `value` is in Hz for rates, K for T, s for tau.
inline void apply_axis(Scenario& s, const std::string& name, double value) {
  const auto& info = axis_info(name);
  const double v = info.frequency ? angular(value) : value;
  switch (info.kind) {
    case AxisKind::G_a: s.params.G_a = v; break;
    case AxisKind::G_b: s.params.G_b = v; break;
    case AxisKind::kappa_m: s.params.kappa_m = v; break;
    case AxisKind::T: s.params.T = v; break;
    case AxisKind::tau: s.filters.a2.tau = s.filters.b1.tau = v; break;
    case AxisKind::tau_a2: s.filters.a2.tau = v; break;
    case AxisKind::tau_b1: s.filters.b1.tau = v; break;
    case AxisKind::detuning_a2: s.filters.a2.detuning = v; break;
    case AxisKind::detuning_b1: s.filters.b1.detuning = v; break;
  }
}

enum class AxisScale { linear, log };

struct AxisSpec {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  std::size_t points = 2;
  AxisScale scale = AxisScale::linear;
  std::vector<double> explicit_values;  // overrides start/stop/points when non-empty

  void check() const {
    axis_info(name);
    if (!explicit_values.empty()) return;
    if (points == 1 && start == stop) return;  // degenerate single point
    if (points < 2) throw UsageError("axis " + name + ": points must be >= 2");
    if (!(start < stop)) throw UsageError("axis " + name + ": start must be < stop");
    if (scale == AxisScale::log && !(start > 0.0)) throw UsageError("axis " + name + ": log scale needs start > 0");
  }

  std::vector<double> values() const {
    check();
    if (!explicit_values.empty()) return explicit_values;
    if (points == 1) return {start};
    std::vector<double> v(points);
    const double n = static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
      const double f = static_cast<double>(i) / n;
      if (scale == AxisScale::log)
        v[i] = start * std::pow(stop / start, f);
      else
        v[i] = start + (stop - start) * f;
    }
    // exact end points regardless of roundoff
    v.front() = start;
    v.back() = stop;
    return v;
  }
};

struct GridSpec {
  std::vector<AxisSpec> axes;  // at most 2; the last axis varies fastest

  void check() const {
    if (axes.empty() || axes.size() > 2) throw UsageError("grid needs 1 or 2 axes");
    for (const auto& a : axes) a.check();
    if (axes.size() == 2 && axes[0].name == axes[1].name) throw UsageError("grid axes must differ");
  }
};

// ---------------------------------------------------------------- points

struct PointResult {
  StabilityReport stability;
  std::optional<OutputCM> output;  // absent when unstable
  std::optional<double> E_N;
  std::optional<Physicality> physical;
  bool converged = true;
};

inline PointResult evaluate_point(const Scenario& s) {
  PointResult r;
  const auto model = make_model(s.params);
  r.stability = is_stable(model);
  if (!r.stability.stable) return r;
  OutputCM out;
  try {
    out = output_cm(model, s.filters_used(), s.quadrature);
  } catch (const ConvergenceError& e) {
    out = e.best();
    r.converged = false;
  }
  const CovMat v4 = extract_bipartite(out.cm, s.pair);
  r.E_N = log_negativity(v4);
  r.physical = physicality(v4);
  r.output = std::move(out);
  return r;
}

struct SweepRecord {
  std::vector<double> values;  // one per axis, in axis units
  bool stable = false;
  bool marginal = false;
  std::optional<double> E_N;
  double abscissa_hz = 0.0;    // spectral abscissa / 2pi
  double integral_error = 0.0;
  std::size_t panels = 0;
  bool converged = true;
  std::optional<double> physical_margin;
  std::optional<double> runtime_s;  // only filled when timing is requested

  bool operator==(const SweepRecord&) const = default;
};

struct SweepTable {
  std::vector<std::string> axes;
  std::vector<SweepRecord> records;
  bool timing = false;
};

inline SweepRecord make_record(std::vector<double> values, const Scenario& s, bool timing) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto p = evaluate_point(s);
  SweepRecord rec;
  rec.values = std::move(values);
  rec.stable = p.stability.stable;
  rec.marginal = p.stability.marginal;
  rec.abscissa_hz = cyclic(p.stability.abscissa);
  rec.E_N = p.E_N;
  rec.converged = p.converged;
  if (p.output) {
    rec.integral_error = p.output->diagnostics.integral_error;
    rec.panels = p.output->diagnostics.panels;
  }
  if (p.physical) rec.physical_margin = p.physical->margin;
  if (timing) rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads. Each index is
/// claimed from a shared counter, so the schedule varies but results stored
/// by index do not.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto loop = [&] {
    for (std::size_t i = next++; i < n && !failed; i = next++) {
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline SweepTable sweep_grid(const Scenario& base, const GridSpec& grid, unsigned workers = 1, bool timing = false) {
  grid.check();
  SweepTable table;
  table.timing = timing;
  std::vector<std::vector<double>> vals;
  for (const auto& a : grid.axes) {
    table.axes.push_back(a.name);
    vals.push_back(a.values());
  }
  const std::size_t inner = vals.size() == 2 ? vals[1].size() : 1;
  const std::size_t n = vals[0].size() * inner;
  table.records.resize(n);
  parallel_for(n, workers, [&](std::size_t k) {
    Scenario s = base;
    std::vector<double> point{vals[0][k / inner]};
    if (vals.size() == 2) point.push_back(vals[1][k % inner]);
    for (std::size_t a = 0; a < point.size(); ++a) apply_axis(s, table.axes[a], point[a]);
    table.records[k] = make_record(std::move(point), s, timing);
  });
  return table;
}

// ---------------------------------------------------------------- G_b optimum

struct Optimum {
  double G_b = 0.0;  // rad/s
  double E_N = 0.0;
  std::size_t evaluations = 0;
};

inline constexpr std::size_t kCoarsePoints = 21;
inline constexpr double kGbTolerance = kTwoPi * 1e4;  // 0.01 MHz

/// Maximizes E_N over G_b in [lo, hi] (rad/s) with a coarse scan followed by
/// golden-section refinement. Unstable points count as -inf.
inline Optimum optimize_Gb(const Scenario& base, double lo, double hi, unsigned workers = 1,
                           double tol = kGbTolerance) {
  if (!(lo < hi) || lo < 0.0) throw UsageError("optimize_Gb: need 0 <= lo < hi");
  if (!(tol > 0.0)) throw UsageError("optimize_Gb: tolerance must be > 0");
  constexpr double kUnstable = -std::numeric_limits<double>::infinity();
  auto objective = [&](double gb) {
    Scenario s = base;
    s.params.G_b = gb;
    const auto r = evaluate_point(s);
    return r.E_N ? *r.E_N : kUnstable;
  };

  std::vector<double> xs(kCoarsePoints), fs(kCoarsePoints);
  for (std::size_t i = 0; i < kCoarsePoints; ++i)
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kCoarsePoints - 1);
  parallel_for(kCoarsePoints, workers, [&](std::size_t i) { fs[i] = objective(xs[i]); });

  std::size_t best = kCoarsePoints;
  for (std::size_t i = 0; i < kCoarsePoints; ++i)
    if (fs[i] != kUnstable && (best == kCoarsePoints || fs[i] > fs[best])) best = i;
  if (best == kCoarsePoints) throw DomainError("optimize_Gb: no stable point in bracket");

  Optimum opt{xs[best], fs[best], kCoarsePoints};
  auto consider = [&](double x, double f) {
    if (f > opt.E_N || (f == opt.E_N && x < opt.G_b)) opt = {x, f, opt.evaluations};
  };

  double a = xs[best > 0 ? best - 1 : 0];
  double b = xs[std::min(best + 1, kCoarsePoints - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = objective(c), fd = objective(d);
  opt.evaluations += 2;
  consider(c, fc);
  consider(d, fd);
  while (b - a > tol) {
    if (fc >= fd) {  // ties move toward smaller G_b
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
      consider(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
      consider(d, fd);
    }
    ++opt.evaluations;
  }
  return opt;
}

// ---------------------------------------------------------------- tau scan

inline SweepTable sweep_tau(const Scenario& base, std::vector<double> taus, unsigned workers = 1) {
  for (double t : taus)
    if (!(t > 0.0)) throw UsageError("sweep_tau: tau values must be > 0");
  GridSpec g;
  AxisSpec ax;
  ax.name = "tau";
  ax.explicit_values = std::move(taus);
  g.axes.push_back(ax);
  return sweep_grid(base, g, workers);
}

inline std::vector<double> log_space(double start, double stop, std::size_t n) {
  AxisSpec a{"tau", start, stop, n, AxisScale::log, {}};
  return a.values();
}

// ---------------------------------------------------------------- temperature

/// E_N below this counts as zero for the threshold search.
inline constexpr double kEntanglementFloor = 1e-4;

struct Threshold {
  double T = 0.0;  // K
  std::size_t evaluations = 0;
};

/// Bisection for the temperature where E_N first drops below the floor,
/// starting from the scenario's own temperature.
inline Threshold temperature_threshold(const Scenario& base, double T_max = 1e4, double tol = 1.0) {
  if (!(tol > 0.0)) throw UsageError("temperature_threshold: tolerance must be > 0");
  if (!(T_max > base.params.T)) throw UsageError("temperature_threshold: T_max must exceed the base temperature");
  auto entangled = [&](double T) {
    Scenario s = base;
    s.params.T = T;
    const auto r = evaluate_point(s);
    if (!r.E_N) throw StabilityError("temperature_threshold: unstable parameters", r.stability.abscissa);
    return *r.E_N > kEntanglementFloor;
  };
  Threshold th;
  double lo = base.params.T, hi = T_max;
  th.evaluations = 2;
  if (!entangled(lo)) throw DomainError("temperature_threshold: no entanglement at the base temperature");
  if (entangled(hi)) throw DomainError("temperature_threshold: still entangled at T_max");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (entangled(mid) ? lo : hi) = mid;
    ++th.evaluations;
  }
  th.T = 0.5 * (lo + hi);
  return th;
}

}  // namespace optomag
