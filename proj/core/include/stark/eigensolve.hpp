#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "stark/hamiltonian.hpp"

namespace stark {

struct SolveOptions {
  // Convergence: the ground state is accepted when the explicit residual
  // ||H x - E0 x|| is at most tol * max(1, |E0|).
  double tol = 1e-10;
  // Also converge the first excited energy so the gap and the degeneracy
  // flag are meaningful.
  bool want_gap = true;
  // Seed of the pseudo-random start vector; fixed by default so repeated
  // solves are bit-for-bit reproducible.
  std::uint64_t seed = 123456789;
  // Hard cap on matrix applications before NoConvergence is thrown.
  long max_matvecs = 30000;
  // Sectors up to this dimension are solved densely; larger ones go through
  // thick-restart Lanczos with full reorthogonalization.
  std::size_t dense_threshold = 600;
  // Lanczos basis size and the number of Ritz vectors kept at a restart.
  int subspace = 64;
  int keep = 16;
};

struct GroundSolution {
  double energy0 = 0;
  // Present when want_gap was set and the sector has at least 2 states.
  std::optional<double> energy1;
  Eigen::VectorXd vector0;
  // Explicit ||H x - E0 x|| of the returned pair.
  double residual = 0;
  // Number of operator applications spent (0 for the dense path).
  long iterations = 0;
  // energy1 - energy0 below 1e-10 * max(1, |energy0|); always false when
  // energy1 was not requested.
  bool degenerate = false;
  std::uint64_t seed = 0;

  double gap_value() const { return energy1 ? *energy1 - energy0 : 0.0; }
};

// Lowest eigenpair of the sector Hamiltonian. The eigenvector is normalized
// and its sign fixed so the largest-magnitude component is positive.
GroundSolution ground_state(const SectorOperator& op, const SolveOptions& opts = {});
GroundSolution ground_state(const SectorOperator& op, double tol, bool want_gap);

// E1 - E0. Throws InvalidArguments for one-dimensional sectors.
double gap(const SectorOperator& op, const SolveOptions& opts = {});

} // namespace stark
