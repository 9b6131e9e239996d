#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace stark {

// Reduced rational filling n = num / den, 0 < n <= 1.
struct Filling {
  long long num = 1;
  long long den = 2;

  // n * L; throws ConfigError when that is not an integer.
  int excitations(int L) const;
  std::string str() const; // "1/2"
};

// Accepts "num/den", a bare integer, or a plain decimal ("0.25").
Filling parse_filling(std::string_view text);

// Logarithmic field grid: the base pass walks h = 10^(j / per_decade) over
// all integers j with start <= h <= stop; the refinement pass adds the
// densify-times-finer lattice within one decade of each curve's maximum.
struct HGridSpec {
  double start = 1e-5;
  double stop = 1.0;
  int per_decade = 25;
  int densify = 4;
};

// One batch run. A flat key = value file with the keys named in items(),
// '#' comments allowed; every key has an equivalent command-line override.
struct ExperimentConfig {
  std::vector<double> etas{0.0};
  std::vector<int> sizes{8, 10, 12};
  Filling filling{1, 2};
  HGridSpec grid;
  double tol = 1e-10;     // eigensolver residual target
  double delta_h = 0.0;   // QFI stencil step; 0 = adaptive per point
  int workers = 1;
  std::uint64_t seed = 20240901;
  std::string out = "out";
  std::string format = "csv"; // csv | json
  bool timing = false;        // fill wall_time (breaks byte determinism)

  void validate() const; // throws ConfigError

  // Resolved schema-ordered key/value pairs, for provenance embedding and
  // the sweep sidecar. Serializing and re-parsing reproduces the config.
  std::vector<std::pair<std::string, std::string>> items() const;
};

ExperimentConfig parse_config(std::string_view text,
                              const std::string& origin = "<config>");
ExperimentConfig load_config(const std::string& path);

// Set one field from its schema key. The extra key "h_grid" takes the
// combined "start:stop:per_decade[:densify]" form used by --h-grid.
void apply_override(ExperimentConfig& cfg, std::string_view key,
                    std::string_view value);

// Comma-separated lists; eta accepts "inf" entries.
std::vector<double> parse_eta_list(std::string_view text);
std::vector<int> parse_size_list(std::string_view text);

} // namespace stark
