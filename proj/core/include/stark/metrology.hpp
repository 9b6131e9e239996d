#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>

#include "stark/eigensolve.hpp"
#include "stark/hamiltonian.hpp"

namespace stark {

// One Fisher-information evaluation at fixed parameters. When the ground
// state is degenerate at a stencil point, or the step adaptation fails, the
// point is flagged invalid instead of reporting a number differentiated
// across a level crossing; `failure` then carries the reason.
struct FisherPoint {
  ProbeParams params;
  double qfi = 0;
  std::optional<double> cfi;
  double delta_h = 0;        // accepted step of the final estimate
  double richardson_err = 0; // | 4 chi(dh) - 4 chi(dh/2) | of the last halving
  bool valid = false;
  std::string failure;
};

enum class ChiVariant {
  forward,  // overlap of |psi(h)> and |psi(h+dh)>
  centered, // overlap of |psi(h-dh/2)> and |psi(h+dh/2)>
};

// Per-sector scratch space: shared Hamiltonian terms plus a small cache of
// ground solutions keyed by field value, so scans over h and the stencil
// evaluations reuse solves. Not thread safe; give each worker its own.
class ProbeWorkspace {
public:
  // family.h is ignored; every query names its own field value.
  explicit ProbeWorkspace(const ProbeParams& family, SolveOptions solver = {});

  const ProbeParams& family() const { return family_; }
  const SolveOptions& solver_options() const { return solver_; }
  const SectorBasis& basis() const { return base_.basis(); }

  // Cached ground solve at field h (gap always requested).
  const GroundSolution& ground(double h);

  // Fidelity susceptibility 2 (1 - |<psi|psi'>|) / dh^2, evaluated through
  // the algebraically equal but cancellation-free form |psi - psi'|^2 / dh^2
  // (sign-aligned real states). Throws DegenerateGroundState when a stencil
  // point sits on a crossing, InvalidArguments for dh <= 0 or a centered
  // stencil reaching below h = 0.
  double chi(double h, double delta_h, ChiVariant variant = ChiVariant::forward);

  // Adaptive QFI: start from dh = max(1e-6, 1e-4 max(h, 1e-3)), halve until
  // two successive chi estimates agree to 1e-3 relative, then report the
  // Richardson combination 4 (2 chi(dh/2) - chi(dh)). Degeneracy, solver
  // failure and step underflow (dh < 1e-12) yield valid = false.
  FisherPoint qfi_point(double h);

  // Same estimate at a caller-pinned step: no halving loop, one Richardson
  // combination of chi(fixed_delta) and chi(fixed_delta / 2).
  FisherPoint qfi_point(double h, double fixed_delta);

  // Classical Fisher information of the computational-basis distribution,
  // with d p / d h from a centered stencil (one-sided second-order stencil
  // when h < delta_h keeps fields nonnegative). Probabilities below 1e-14
  // are dropped. Throws like chi().
  double cfi(double h, double delta_h);

  void clear_cache();

private:
  ProbeParams family_;
  SolveOptions solver_;
  SectorOperator base_;
  std::unordered_map<double, GroundSolution> cache_;
  std::deque<double> order_;
  std::size_t cache_cap_ = 24;
};

// One-shot conveniences built on a temporary workspace.
double fidelity_susceptibility(const ProbeParams& params, double delta_h,
                               ChiVariant variant = ChiVariant::forward);
FisherPoint qfi(const ProbeParams& params);
double cfi_computational(const ProbeParams& params, double delta_h);

} // namespace stark
