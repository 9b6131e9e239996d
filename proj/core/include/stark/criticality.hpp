#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "stark/metrology.hpp"

namespace stark {

// One h-point of a sweep, as serialized to CSV. `valid` is false when the
// QFI evaluation failed (degeneracy, solver failure, step underflow); such
// rows keep their diagnostics but are excluded from fits.
struct SweepRecord {
  double eta = 0;
  int L = 0;
  int N = 0;
  double h = 0;
  double qfi = 0;
  std::optional<double> cfi;
  double gap = 0;
  double energy0 = 0;
  double delta_h = 0;
  double richardson_err = 0;
  double residual = 0;
  bool valid = false;
  double wall_time = 0;
};

struct PeakResult {
  double h_max = 0;   // best field found
  double qfi_max = 0; // QFI there
  double bracket_lo = 0, bracket_hi = 0;
  double grid_resolution = 0; // final bracket width relative to h_max
  bool at_edge = false;       // maximum indistinguishable from a window edge
};

// Least-squares power-law fit on log-log axes.
struct FitResult {
  double exponent = 0;
  double amplitude = 0;  // prefactor exp(intercept)
  double stderr_ = 0;    // standard error of the exponent
  double r_squared = 0;
  double window_lo = 0, window_hi = 0; // abscissa range used
  int points = 0;
};

struct ExponentEstimate {
  double value = 0;
  double stderr_ = 0;
};

struct CollapseInit {
  double h_c = 0;
  double alpha = 4.0;
  double nu = 1.0;
};

struct CollapseOptions {
  int restarts = 8;        // seeded Nelder-Mead restarts (first one unperturbed)
  int max_iterations = 500; // per restart
  std::uint64_t seed = 20240901;
  double rel_sigma_floor = 1e-3; // minimum relative spread assumed per point
};

struct CollapseResult {
  double h_c = 0;
  double alpha = 0;
  double nu = 0;
  double quality = 0; // mean squared normalized deviation from the master curve
  long iterations = 0;
  // Half-ranges over the restarts that ended within 25% of the best quality.
  double unc_h_c = 0, unc_alpha = 0, unc_nu = 0;
};

struct ScalingRelationReport {
  double alpha_over_nu = 0;
  double alpha_over_nu_err = 0;
  double beta = 0;
  double beta_err = 0;
  double deviation = 0;  // |alpha/nu - beta|
  double tolerance = 0;
  bool pass = false;
};

struct SizeValue {
  int L = 0;
  double value = 0;
};

enum class Phase { extended, transition, localized };

struct PeakSearchOptions {
  double h_lo = 1e-5;
  double h_hi = 1.0;
  int per_decade = 25;       // coarse scan density
  double rel_width = 1e-4;   // golden-section stop: bracket width / h_max
  // Edge handling: the maximum counts as sitting on a window edge when the
  // edge value comes within edge_rel_tol of the best value (covers both a
  // monotone curve and a plateau running into the edge, where the argmax
  // position is numerical noise). With allow_edge the coarse maximum is
  // returned unrefined and flagged instead of throwing.
  double edge_rel_tol = 1e-5;
  bool allow_edge = false;
};

// Locates the QFI maximum over a logarithmic field scan: coarse grid, then
// golden-section refinement in log h. Throws PeakAtBoundary when the
// maximum is indistinguishable from a window edge (see PeakSearchOptions),
// unless allow_edge is set.
PeakResult find_peak(ProbeWorkspace& ws, const PeakSearchOptions& opts = {});
PeakResult find_peak(const ProbeParams& family,
                     const PeakSearchOptions& opts = {});

// Localized-phase decay exponent: log F_Q against log(h - h_max) on the
// window h in [3 h_max, 1]. Only h-points present for every supplied size
// where successive sizes agree within 3% survive (size independence screen);
// the largest size's curve is fitted. Requires >= 2 sizes
// (InsufficientSizes) and >= 6 surviving points (InsufficientWindow).
// Records must all share one eta.
FitResult fit_alpha(const std::vector<SweepRecord>& records, double h_max);

// Peak growth exponent beta: log F_Q(L) against log L, >= 4 sizes.
FitResult fit_beta(const std::vector<SizeValue>& qfi_by_size);

// Dynamical exponent z: gap(L) ~ L^-z, so z = -slope; >= 4 sizes with
// positive gaps. The phase label only documents which field rule produced
// the gaps; the fit is identical.
FitResult fit_z(const std::vector<SizeValue>& gap_by_size, Phase phase);

// Finite-size scaling collapse of F_Q = L^{alpha/nu} g(L^{1/nu} (h - h_c)).
// Quality is the Houdayer-Hartmann measure: every point is compared against
// the linear interpolation of the other sizes' points in scaled coordinates,
// normalized by the pointwise uncertainty max(richardson_err,
// rel_sigma_floor * qfi). Requires >= 3 sizes and >= 15 valid points per
// size, with no curve strictly rising into a window edge, i.e. a truncated
// peak (InvalidArguments otherwise; a flat plateau touching an edge is
// fine); throws DegenerateCollapse when no parameter choice makes at least
// 3 points per size overlap in scaled coordinates.
CollapseResult collapse(const std::vector<SweepRecord>& records,
                        const CollapseInit& init,
                        const CollapseOptions& opts = {});

// The raw objective at fixed parameters (+inf when overlap is insufficient).
double collapse_quality(const std::vector<SweepRecord>& records, double h_c,
                        double alpha, double nu,
                        double rel_sigma_floor = 1e-3);

// |alpha/nu - beta| against the pinned tolerance 0.35, with first-order
// error propagation for alpha/nu.
ScalingRelationReport check_scaling_relation(const ExponentEstimate& alpha,
                                             const ExponentEstimate& nu,
                                             const ExponentEstimate& beta,
                                             double tolerance = 0.35);

// Exponent of the gap-normalized QFI, beta - z, errors added in quadrature.
ExponentEstimate normalized_qfi_exponent(const FitResult& beta,
                                         const FitResult& z);

} // namespace stark
