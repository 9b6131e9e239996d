#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stark/config.hpp"
#include "stark/criticality.hpp"
#include "stark/csv.hpp"
#include "stark/sweep.hpp"

namespace stark {

// Analysis of one interaction range. Stages that could not run carry no
// value and leave a "stage: reason" entry in errors instead; later stages
// that depend on them degrade the same way rather than aborting the eta.
struct EtaAnalysis {
  double eta = 0;
  std::vector<PeakRow> peaks; // grid maxima, one per size, ascending L
  std::optional<FitResult> beta_peak;       // F_Q(h_max) vs L
  std::optional<FitResult> beta_smallfield; // F_Q at fixed small h vs L
  double smallfield_h = 0;
  std::optional<FitResult> z_extended;   // gap vs L at smallfield_h
  std::optional<FitResult> z_transition; // gap vs L at each size's own h_max
  std::optional<FitResult> z_localized;  // gap vs L at the top grid field
  double localized_h = 0;
  std::optional<CollapseResult> collapse_fit;
  std::optional<FitResult> alpha_fit; // decay exponent past the peak
  double alpha_anchor = 0;            // critical-point estimate used for it
  std::optional<ScalingRelationReport> scaling_relation;
  std::optional<ExponentEstimate> normalized_exponent; // beta - z
  std::vector<std::string> errors;
};

struct PipelineResult {
  ExperimentConfig config;
  std::vector<SweepRecord> rows;
  std::size_t invalid_rows = 0;
  std::vector<EtaAnalysis> etas;
  std::vector<std::string> outputs; // files written, relative to cfg.out
};

// Grid maximum of one already-measured curve (rows of a single (eta, L),
// ascending h, invalid rows ignored): the refinement-pass resolution is
// taken as good enough, no further solves. at_edge is set when an end value
// comes within 1e-5 relative of the maximum (monotone curve or plateau).
// Throws InsufficientWindow with fewer than 3 valid points.
PeakResult grid_peak(const std::vector<SweepRecord>& curve);

// Fields measured with a valid result for every size present in the rows
// (one eta's rows expected), ascending. Empty when any size has no data.
std::vector<double> common_fields(const std::vector<SweepRecord>& eta_rows);

// All analysis stages on existing rows; no solver work. One entry per
// configured eta in ascending order.
std::vector<EtaAnalysis> analyze(const ExperimentConfig& cfg,
                                 const std::vector<SweepRecord>& rows);

// Resume-aware sweep: when <out>/sweep.meta matches the run parameters that
// shape the numbers (seed, tol, delta_h), rows already in <out>/sweep.csv
// are reused and only missing grid points are computed. Results and the
// sidecar are written back. Unreadable caches are ignored with a warning.
std::vector<SweepRecord> sweep_with_cache(const ExperimentConfig& cfg,
                                          const SweepProgressFn& progress = {});

// sweep_with_cache + analyze + report.json + peaks.csv + SVG plots.
PipelineResult run_pipeline(const ExperimentConfig& cfg,
                            const SweepProgressFn& progress = {});

} // namespace stark
