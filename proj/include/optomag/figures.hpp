#pragma once
// Parameter presets for the published figures. Each preset is a config layer
// plus the sweep it drives.

#include <string>
#include <vector>

#include "optomag/config.hpp"
#include "optomag/sweep.hpp"

namespace optomag {

enum class Figure { fig2a, fig2b, fig3a, fig3b };

inline Figure parse_figure(const std::string& s) {
  if (s == "2a") return Figure::fig2a;
  if (s == "2b") return Figure::fig2b;
  if (s == "3a") return Figure::fig3a;
  if (s == "3b") return Figure::fig3b;
  throw UsageError("unknown figure '" + s + "' (expected 2a, 2b, 3a or 3b)");
}

inline const char* figure_name(Figure f) {
  switch (f) {
    case Figure::fig2a: return "2a";
    case Figure::fig2b: return "2b";
    case Figure::fig3a: return "3a";
    case Figure::fig3b: return "3b";
  }
  return "?";
}

/// Filter durations in the figures are quoted against cyclic rates, and a
/// 1e-6 relative tolerance is ample for E_N at plotting resolution.
inline Json figure_layer(Figure) {
  Json j;
  j["filter_tau_convention"] = "cyclic";
  j["quadrature"] = {{"rel_tol", 1e-6}};
  return j;
}

inline constexpr double kFig2GridMaxHz = 12e6;
inline constexpr std::size_t kFig2GridPoints = 49;
inline const std::vector<double> kFig2bKappaM{0.5e6, 1e6};
inline const std::vector<double> kFig3bTaus{1e-6, 1e-5};

inline GridSpec figure_grid(Figure f) {
  GridSpec g;
  switch (f) {
    case Figure::fig2a:
      g.axes.push_back({"G_a", 0.0, kFig2GridMaxHz, kFig2GridPoints, AxisScale::linear, {}});
      g.axes.push_back({"G_b", 0.0, kFig2GridMaxHz, kFig2GridPoints, AxisScale::linear, {}});
      break;
    case Figure::fig2b:
      g.axes.push_back({"kappa_m", 0, 0, 0, AxisScale::linear, kFig2bKappaM});
      g.axes.push_back({"G_b", 0.0, kFig2GridMaxHz, 25, AxisScale::linear, {}});
      break;
    case Figure::fig3a:
      g.axes.push_back({"tau", 1e-8, 1e-4, 33, AxisScale::log, {}});
      break;
    case Figure::fig3b:
      g.axes.push_back({"tau", 0, 0, 0, AxisScale::linear, kFig3bTaus});
      g.axes.push_back({"T", 1e-2, 1e4, 49, AxisScale::log, {}});
      break;
  }
  return g;
}

}  // namespace optomag
