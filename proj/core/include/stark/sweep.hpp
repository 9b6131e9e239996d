#pragma once

#include <functional>
#include <vector>

#include "stark/config.hpp"
#include "stark/criticality.hpp"

namespace stark {

// Base pass of the field grid: h = 10^(j / per_decade) for every integer j
// with start <= h <= stop, ascending. The lattice is anchored at h = 1, so
// runs with overlapping ranges and equal per_decade share exact grid values.
std::vector<double> sweep_base_grid(const HGridSpec& grid);

// Refinement pass centred on h_center (normally the base-pass maximum of one
// curve): the per_decade * densify lattice restricted to one decade on each
// side of h_center and to [start, stop], minus the base-lattice points.
// Empty when densify == 1.
std::vector<double> sweep_densify_grid(const HGridSpec& grid, double h_center);

using SweepProgressFn =
    std::function<void(std::size_t done, std::size_t total)>;

// Runs the full (eta, L, h) grid: one base pass, then one densified pass
// around each curve's maximum. Work is striped across cfg.workers threads in
// a fixed pattern and results land in preallocated slots, so the output is
// identical for any worker count. Rows from `reuse` whose (eta, L, N, h)
// exactly match a requested point are copied through instead of recomputed;
// callers gate `reuse` on matching run parameters (seed, tol, delta_h).
// Failed points become valid = false rows carrying the failure diagnostics.
// Rows return sorted by (eta, L, h).
std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg,
                                   const std::vector<SweepRecord>& reuse = {},
                                   const SweepProgressFn& progress = {});

} // namespace stark
