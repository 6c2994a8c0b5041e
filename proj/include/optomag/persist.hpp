#pragma once
// CSV, JSON-lines and gnuplot matrix output for sweep tables, plus readers
// for the first two. Floats are written with 17 significant digits so a
// write-read cycle is exact.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "optomag/errors.hpp"
#include "optomag/sweep.hpp"

namespace optomag {

enum class Format { csv, jsonl };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "jsonl") return Format::jsonl;
  throw UsageError("unknown format '" + s + "' (expected csv or jsonl)");
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline const std::vector<std::string>& fixed_columns() {
  static const std::vector<std::string> cols{"stable",         "marginal", "E_N",      "abscissa_hz",
                                             "integral_error", "panels",   "converged", "physical_margin"};
  return cols;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw IoError(where + ": not a number: '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& s, const std::string& where) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw IoError(where + ": expected true or false, got '" + s + "'");
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  return os;
}

inline void finish(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace detail

inline void write_csv(const SweepTable& t, std::ostream& os) {
  std::vector<std::string> header = t.axes;
  for (const auto& c : detail::fixed_columns()) header.push_back(c);
  if (t.timing) header.emplace_back("runtime_s");
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : t.records) {
    for (double v : r.values) os << format_double(v) << ',';
    os << (r.stable ? "true" : "false") << ',' << (r.marginal ? "true" : "false") << ',' << opt(r.E_N) << ','
       << format_double(r.abscissa_hz) << ',' << format_double(r.integral_error) << ',' << r.panels << ','
       << (r.converged ? "true" : "false") << ',' << opt(r.physical_margin);
    if (t.timing) os << ',' << opt(r.runtime_s);
    os << '\n';
  }
}

inline nlohmann::ordered_json record_json(const SweepTable& t, const SweepRecord& r) {
  nlohmann::ordered_json j;
  for (std::size_t a = 0; a < t.axes.size(); ++a) j[t.axes[a]] = r.values[a];
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  j["stable"] = r.stable;
  j["marginal"] = r.marginal;
  j["E_N"] = opt(r.E_N);
  j["abscissa_hz"] = r.abscissa_hz;
  j["integral_error"] = r.integral_error;
  j["panels"] = r.panels;
  j["converged"] = r.converged;
  j["physical_margin"] = opt(r.physical_margin);
  if (t.timing) j["runtime_s"] = opt(r.runtime_s);
  return j;
}

inline void write_jsonl(const SweepTable& t, std::ostream& os) {
  for (const auto& r : t.records) os << record_json(t, r).dump() << '\n';
}

/// Gnuplot "matrix nonuniform" layout: rows follow G_b, columns follow G_a,
/// and unstable points are written as NaN.
inline void write_dat(const SweepTable& t, std::ostream& os) {
  if (t.axes.size() != 2) throw UsageError("write_dat: needs a 2-axis grid");
  int ia = -1, ib = -1;
  for (int k = 0; k < 2; ++k) {
    if (t.axes[static_cast<std::size_t>(k)] == "G_a") ia = k;
    if (t.axes[static_cast<std::size_t>(k)] == "G_b") ib = k;
  }
  if (ia < 0 || ib < 0) throw UsageError("write_dat: grid axes must be G_a and G_b");
  std::vector<double> ga, gb;
  std::map<std::pair<double, double>, std::optional<double>> z;
  auto add_unique = [](std::vector<double>& v, double x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
  };
  for (const auto& r : t.records) {
    add_unique(ga, r.values[static_cast<std::size_t>(ia)]);
    add_unique(gb, r.values[static_cast<std::size_t>(ib)]);
    z[{r.values[static_cast<std::size_t>(ib)], r.values[static_cast<std::size_t>(ia)]}] = r.E_N;
  }
  std::sort(ga.begin(), ga.end());
  std::sort(gb.begin(), gb.end());
  os << "# E_N; rows: G_b (Hz), columns: G_a (Hz)\n" << ga.size();
  for (double x : ga) os << ' ' << format_double(x);
  os << '\n';
  for (double y : gb) {
    os << format_double(y);
    for (double x : ga) {
      const auto it = z.find({y, x});
      os << ' ' << ((it != z.end() && it->second) ? format_double(*it->second) : std::string("nan"));
    }
    os << '\n';
  }
}

inline void persist(const SweepTable& t, const std::string& path, Format f) {
  auto os = detail::open_out(path);
  if (f == Format::csv)
    write_csv(t, os);
  else
    write_jsonl(t, os);
  detail::finish(os, path);
}

inline void persist_dat(const SweepTable& t, const std::string& path) {
  auto os = detail::open_out(path);
  write_dat(t, os);
  detail::finish(os, path);
}

inline SweepTable read_csv(std::istream& is, const std::string& where = "csv") {
  SweepTable t;
  std::string line;
  if (!std::getline(is, line)) throw IoError(where + ": missing header");
  const auto header = detail::split(line, ',');
  const auto& fixed = detail::fixed_columns();
  std::size_t n_axes = 0;
  while (n_axes < header.size() && header[n_axes] != "stable") ++n_axes;
  if (header.size() < n_axes + fixed.size()) throw IoError(where + ": header is missing columns");
  for (std::size_t i = 0; i < fixed.size(); ++i)
    if (header[n_axes + i] != fixed[i]) throw IoError(where + ": unexpected column '" + header[n_axes + i] + "'");
  t.axes.assign(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(n_axes));
  t.timing = header.size() == n_axes + fixed.size() + 1;
  if (t.timing && header.back() != "runtime_s") throw IoError(where + ": unexpected trailing column");

  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string at = where + ":" + std::to_string(lineno);
    const auto cells = detail::split(line, ',');
    if (cells.size() != header.size()) throw IoError(at + ": expected " + std::to_string(header.size()) + " cells");
    auto opt = [&](const std::string& c) {
      return c.empty() ? std::optional<double>() : std::optional<double>(detail::parse_double(c, at));
    };
    SweepRecord r;
    for (std::size_t a = 0; a < n_axes; ++a) r.values.push_back(detail::parse_double(cells[a], at));
    const std::string* c = cells.data() + n_axes;
    r.stable = detail::parse_bool(c[0], at);
    r.marginal = detail::parse_bool(c[1], at);
    r.E_N = opt(c[2]);
    r.abscissa_hz = detail::parse_double(c[3], at);
    r.integral_error = detail::parse_double(c[4], at);
    r.panels = static_cast<std::size_t>(std::stoull(c[5]));
    r.converged = detail::parse_bool(c[6], at);
    r.physical_margin = opt(c[7]);
    if (t.timing) r.runtime_s = opt(c[8]);
    t.records.push_back(std::move(r));
  }
  return t;
}

inline SweepTable read_jsonl(std::istream& is, const std::string& where = "jsonl") {
  SweepTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string at = where + ":" + std::to_string(lineno);
    nlohmann::ordered_json j;
    try {
      j = nlohmann::ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(at + ": " + e.what());
    }
    std::vector<std::string> axes;
    for (auto it = j.begin(); it != j.end() && it.key() != "stable"; ++it) axes.push_back(it.key());
    if (t.records.empty()) {
      t.axes = axes;
      t.timing = j.contains("runtime_s");
    } else if (axes != t.axes) {
      throw IoError(at + ": axis columns differ from the first record");
    }
    auto opt = [&](const char* key) {
      return j.at(key).is_null() ? std::optional<double>() : std::optional<double>(j.at(key).get<double>());
    };
    try {
      SweepRecord r;
      for (const auto& a : axes) r.values.push_back(j.at(a).get<double>());
      r.stable = j.at("stable").get<bool>();
      r.marginal = j.at("marginal").get<bool>();
      r.E_N = opt("E_N");
      r.abscissa_hz = j.at("abscissa_hz").get<double>();
      r.integral_error = j.at("integral_error").get<double>();
      r.panels = j.at("panels").get<std::size_t>();
      r.converged = j.at("converged").get<bool>();
      r.physical_margin = opt("physical_margin");
      if (t.timing) r.runtime_s = opt("runtime_s");
      t.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(at + ": " + e.what());
    }
  }
  return t;
}

inline SweepTable read_table(const std::string& path, Format f) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  return f == Format::csv ? read_csv(is, path) : read_jsonl(is, path);
}

}  // namespace optomag
