#include "stark/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "stark/errors.hpp"
#include "stark/numformat.hpp"

namespace stark {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

double parse_config_double(std::string_view key, std::string_view value) {
  try {
    return parse_double(trim(value));
  } catch (const InvalidArguments&) {
    fail(std::string(key) + ": " + "expected a number, got '" +
         std::string(value) + "'");
  }
}

long long parse_config_int(std::string_view key, std::string_view value) {
  try {
    return parse_int(trim(value));
  } catch (const InvalidArguments&) {
    fail(std::string(key) + ": " + "expected an integer, got '" +
         std::string(value) + "'");
  }
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

} // namespace

int Filling::excitations(int L) const {
  if (num <= 0 || den <= 0) fail("filling: numerator and denominator must be positive");
  const long long prod = num * static_cast<long long>(L);
  if (prod % den != 0)
    fail("filling " + str() + ": n*L = " + format_double(double(prod) / double(den)) +
         " is not an integer for L = " + std::to_string(L));
  return static_cast<int>(prod / den);
}

std::string Filling::str() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

Filling parse_filling(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.empty()) fail("filling: empty value");
  long long num = 0, den = 1;
  const std::size_t slash = s.find('/');
  const std::size_t dot = s.find('.');
  try {
    if (slash != std::string_view::npos) {
      num = parse_int(trim(s.substr(0, slash)));
      den = parse_int(trim(s.substr(slash + 1)));
    } else if (dot != std::string_view::npos) {
      const std::string_view frac = s.substr(dot + 1);
      num = parse_int(std::string(s.substr(0, dot)) + std::string(frac));
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    } else {
      num = parse_int(s);
    }
  } catch (const InvalidArguments&) {
    fail("filling: cannot parse '" + std::string(s) + "'");
  }
  if (num <= 0 || den <= 0)
    fail("filling: must be positive, got '" + std::string(s) + "'");
  const long long g = std::gcd(num, den);
  Filling f{num / g, den / g};
  if (f.num > f.den) fail("filling " + f.str() + ": must be at most 1");
  return f;
}

std::vector<double> parse_eta_list(std::string_view text) {
  std::vector<double> out;
  for (std::string_view part : split(text, ',')) {
    part = trim(part);
    if (part.empty()) fail("eta: empty list entry");
    if (part == "inf") {
      out.push_back(std::numeric_limits<double>::infinity());
    } else {
      out.push_back(parse_config_double("eta", part));
    }
  }
  if (out.empty()) fail("eta: empty list");
  return out;
}

std::vector<int> parse_size_list(std::string_view text) {
  std::vector<int> out;
  for (std::string_view part : split(text, ',')) {
    part = trim(part);
    if (part.empty()) fail("sizes: empty list entry");
    out.push_back(static_cast<int>(parse_config_int("sizes", part)));
  }
  if (out.empty()) fail("sizes: empty list");
  return out;
}

void ExperimentConfig::validate() const {
  if (etas.empty()) fail("eta: empty list");
  for (double e : etas) {
    if (std::isnan(e) || e < 0)
      fail("eta: must be >= 0 or inf, got " + format_double(e));
  }
  {
    std::set<double> seen(etas.begin(), etas.end());
    if (seen.size() != etas.size()) fail("eta: repeated value");
  }
  if (sizes.empty()) fail("sizes: empty list");
  for (int L : sizes) {
    if (L < 2 || L > 32)
      fail("sizes: L must lie in [2, 32], got " + std::to_string(L));
    filling.excitations(L);
  }
  {
    std::set<int> seen(sizes.begin(), sizes.end());
    if (seen.size() != sizes.size()) fail("sizes: repeated value");
  }
  if (!(grid.start > 0)) fail("h_start: must be > 0");
  if (!(grid.stop > grid.start)) fail("h_stop: must exceed h_start");
  if (!std::isfinite(grid.stop)) fail("h_stop: must be finite");
  if (grid.per_decade < 1 || grid.per_decade > 1000)
    fail("h_per_decade: must lie in [1, 1000]");
  if (grid.densify < 1 || grid.densify > 64)
    fail("h_densify: must lie in [1, 64]");
  if (!(tol > 0) || tol > 1e-2) fail("tol: must lie in (0, 1e-2]");
  if (!(delta_h >= 0) || !std::isfinite(delta_h))
    fail("delta_h: must be >= 0 (0 = adaptive)");
  if (workers < 1 || workers > 256) fail("workers: must lie in [1, 256]");
  if (out.empty()) fail("out: empty path");
  if (format != "csv" && format != "json")
    fail("format: must be csv or json, got '" + format + "'");
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::items() const {
  std::vector<std::string> eta_str, size_str;
  for (double e : etas) eta_str.push_back(format_double(e));
  for (int L : sizes) size_str.push_back(std::to_string(L));
  return {
      {"eta", join(eta_str)},
      {"sizes", join(size_str)},
      {"filling", filling.str()},
      {"h_start", format_double(grid.start)},
      {"h_stop", format_double(grid.stop)},
      {"h_per_decade", std::to_string(grid.per_decade)},
      {"h_densify", std::to_string(grid.densify)},
      {"tol", format_double(tol)},
      {"delta_h", format_double(delta_h)},
      {"workers", std::to_string(workers)},
      {"seed", std::to_string(seed)},
      {"out", out},
      {"format", format},
      {"timing", timing ? "on" : "off"},
  };
}

void apply_override(ExperimentConfig& cfg, std::string_view key,
                    std::string_view value) {
  const std::string_view k = trim(key);
  const std::string_view v = trim(value);
  if (k == "eta") {
    cfg.etas = parse_eta_list(v);
  } else if (k == "sizes") {
    cfg.sizes = parse_size_list(v);
  } else if (k == "filling") {
    cfg.filling = parse_filling(v);
  } else if (k == "h_start") {
    cfg.grid.start = parse_config_double(k, v);
  } else if (k == "h_stop") {
    cfg.grid.stop = parse_config_double(k, v);
  } else if (k == "h_per_decade") {
    cfg.grid.per_decade = static_cast<int>(parse_config_int(k, v));
  } else if (k == "h_densify") {
    cfg.grid.densify = static_cast<int>(parse_config_int(k, v));
  } else if (k == "h_grid") {
    const auto parts = split(v, ':');
    if (parts.size() != 3 && parts.size() != 4)
      fail("h_grid: expected start:stop:per_decade[:densify], got '" +
           std::string(v) + "'");
    cfg.grid.start = parse_config_double("h_grid start", parts[0]);
    cfg.grid.stop = parse_config_double("h_grid stop", parts[1]);
    cfg.grid.per_decade =
        static_cast<int>(parse_config_int("h_grid per_decade", parts[2]));
    if (parts.size() == 4)
      cfg.grid.densify =
          static_cast<int>(parse_config_int("h_grid densify", parts[3]));
  } else if (k == "tol") {
    cfg.tol = parse_config_double(k, v);
  } else if (k == "delta_h") {
    cfg.delta_h = parse_config_double(k, v);
  } else if (k == "workers") {
    cfg.workers = static_cast<int>(parse_config_int(k, v));
  } else if (k == "seed") {
    const long long s = parse_config_int(k, v);
    if (s < 0) fail("seed: must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(s);
  } else if (k == "out") {
    if (v.empty()) fail("out: empty path");
    cfg.out = std::string(v);
  } else if (k == "format") {
    cfg.format = std::string(v);
  } else if (k == "timing") {
    if (v == "on" || v == "true" || v == "1") {
      cfg.timing = true;
    } else if (v == "off" || v == "false" || v == "0") {
      cfg.timing = false;
    } else {
      fail("timing: expected on/off, got '" + std::string(v) + "'");
    }
  } else {
    fail("unknown config key '" + std::string(k) + "'");
  }
}

ExperimentConfig parse_config(std::string_view text, const std::string& origin) {
  ExperimentConfig cfg;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(origin + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      apply_override(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      fail(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

} // namespace stark
