#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "stark/csv.hpp"
#include "stark/errors.hpp"
#include "stark/sweep.hpp"

using namespace stark;

namespace {

// Two-site half-filled probe: H restricted to the sector is a 2x2 matrix
// with splitting 2 sqrt(4 J^2 + h^2), so everything has a closed form.
double two_site_qfi(double h, double J = 1.0) {
  const double s = 4.0 * J * J + h * h;
  return 4.0 * J * J / (s * s);
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.etas = {0.0};
  cfg.sizes = {2};
  cfg.filling = {1, 2};
  cfg.grid = {1e-2, 1.0, 5, 2};
  cfg.tol = 1e-11;
  return cfg;
}

std::string to_csv(const std::vector<SweepRecord>& rows) {
  std::ostringstream out;
  write_sweep_csv(out, rows);
  return out.str();
}

} // namespace

TEST_CASE("base grid is the exact per-decade lattice") {
  const std::vector<double> grid = sweep_base_grid({1e-5, 1.0, 25, 4});
  CHECK(grid.size() == 126);
  CHECK(grid.front() == doctest::Approx(1e-5).epsilon(1e-14));
  CHECK(grid.back() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(std::adjacent_find(grid.begin(), grid.end()) == grid.end());
  for (double h : grid) {
    CHECK(h >= 1e-5 * (1 - 1e-12));
    CHECK(h <= 1.0 * (1 + 1e-12));
  }

  // same lattice: a sub-range run shares every grid value bit for bit
  const std::vector<double> sub = sweep_base_grid({1e-3, 1.0, 25, 4});
  CHECK(sub.size() == 76);
  CHECK(std::includes(grid.begin(), grid.end(), sub.begin(), sub.end()));
}

TEST_CASE("grids that trap no lattice point are rejected") {
  CHECK_THROWS_AS(sweep_base_grid({2.0, 3.0, 1, 1}), ConfigError);
  CHECK_THROWS_AS(sweep_base_grid({0.0, 1.0, 25, 1}), ConfigError);
  CHECK_THROWS_AS(sweep_base_grid({1.0, 0.5, 25, 1}), ConfigError);
  CHECK_THROWS_AS(sweep_base_grid({1e-5, 1.0, 0, 1}), ConfigError);
  CHECK_THROWS_AS(sweep_base_grid({1e-5, 1.0, 25, 0}), ConfigError);
}

TEST_CASE("densified pass fills one decade around the maximum") {
  const HGridSpec grid{1e-5, 1.0, 25, 4};
  const std::vector<double> base = sweep_base_grid(grid);
  const std::vector<double> extra = sweep_densify_grid(grid, 1e-2);

  CHECK(extra.size() == 150); // 201 fine points minus 51 base points
  CHECK(std::is_sorted(extra.begin(), extra.end()));
  CHECK(extra.front() >= 1e-3 * (1 - 1e-12));
  CHECK(extra.back() <= 1e-1 * (1 + 1e-12));
  for (double h : extra)
    CHECK_FALSE(std::binary_search(base.begin(), base.end(), h));

  // window clipped at the sweep boundaries
  const std::vector<double> at_start = sweep_densify_grid(grid, 1e-5);
  CHECK(at_start.front() >= 1e-5 * (1 - 1e-12));
  CHECK(at_start.back() <= 1e-4 * (1 + 1e-12));
  CHECK(at_start.size() == 75);

  CHECK(sweep_densify_grid({1e-5, 1.0, 25, 1}, 1e-2).empty());
  CHECK_THROWS_AS(sweep_densify_grid(grid, 0.0), InvalidArguments);
}

TEST_CASE("sweep covers base plus densified points with closed-form values") {
  const ExperimentConfig cfg = tiny_config();
  const std::vector<SweepRecord> rows = run_sweep(cfg);

  // 11 base points, then 5 refinement points around the left-edge maximum
  REQUIRE(rows.size() == 16);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i - 1].h < rows[i].h);

  for (const SweepRecord& r : rows) {
    CHECK(r.eta == 0.0);
    CHECK(r.L == 2);
    CHECK(r.N == 1);
    CHECK(r.valid);
    CHECK(r.qfi == doctest::Approx(two_site_qfi(r.h)).epsilon(1e-6));
    REQUIRE(r.cfi.has_value());
    CHECK(*r.cfi == doctest::Approx(r.qfi).epsilon(1e-4));
    CHECK(r.gap == doctest::Approx(2.0 * std::sqrt(4.0 + r.h * r.h)).epsilon(1e-9));
    CHECK(r.energy0 ==
          doctest::Approx(-1.0 - std::sqrt(4.0 + r.h * r.h)).epsilon(1e-9));
    CHECK(r.delta_h > 0);
    CHECK(r.wall_time == 0.0);
    CHECK(r.residual >= 0);
  }
}

TEST_CASE("sweep output is identical across runs and worker counts") {
  ExperimentConfig cfg = tiny_config();
  const std::string once = to_csv(run_sweep(cfg));
  const std::string twice = to_csv(run_sweep(cfg));
  CHECK(once == twice);

  cfg.workers = 4;
  CHECK(to_csv(run_sweep(cfg)) == once);
  cfg.workers = 3;
  CHECK(to_csv(run_sweep(cfg)) == once);
}

TEST_CASE("progress reports every computed point exactly once") {
  const ExperimentConfig cfg = tiny_config();
  std::size_t calls = 0, last_done = 0, last_total = 0;
  run_sweep(cfg, {}, [&](std::size_t done, std::size_t total) {
    ++calls;
    last_done = done;
    last_total = total;
  });
  CHECK(calls == 16);
  CHECK(last_done == 16);
  CHECK(last_total == 16);
}

TEST_CASE("matching rows are reused instead of recomputed") {
  const ExperimentConfig cfg = tiny_config();
  const std::vector<SweepRecord> rows = run_sweep(cfg);
  const std::string fresh = to_csv(rows);

  std::size_t computed = 0;
  const auto count = [&](std::size_t, std::size_t) { ++computed; };

  CHECK(to_csv(run_sweep(cfg, rows, count)) == fresh);
  CHECK(computed == 0);

  std::vector<SweepRecord> partial;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (i % 3 != 0) partial.push_back(rows[i]);
  computed = 0;
  CHECK(to_csv(run_sweep(cfg, partial, count)) == fresh);
  CHECK(computed == rows.size() - partial.size());

  // a cached row from a different sector is ignored, not trusted
  std::vector<SweepRecord> alien = rows;
  alien[4].N = 2;
  alien[4].qfi = 1e9;
  computed = 0;
  CHECK(to_csv(run_sweep(cfg, alien, count)) == fresh);
  CHECK(computed == 1);
}

TEST_CASE("timing flag fills wall_time") {
  ExperimentConfig cfg = tiny_config();
  cfg.grid = {1e-2, 1.0, 2, 1};
  cfg.timing = true;
  const std::vector<SweepRecord> rows = run_sweep(cfg);
  REQUIRE(!rows.empty());
  double total = 0;
  for (const SweepRecord& r : rows) {
    CHECK(r.wall_time >= 0);
    total += r.wall_time;
  }
  CHECK(total > 0);
}

TEST_CASE("sweep rejects configs with fractional excitation counts") {
  ExperimentConfig cfg = tiny_config();
  cfg.sizes = {10};
  cfg.filling = {1, 4};
  CHECK_THROWS_AS(run_sweep(cfg), ConfigError);
}
