#pragma once

#include <vector>

#include <Eigen/Core>

#include "stark/hamiltonian.hpp"

namespace stark {

// Slow reference implementations used to validate the production path. The
// full Hamiltonian is assembled from explicit 2x2 Pauli matrices with
// Kronecker products in complex arithmetic; no bitmask shortcuts. Terms are
// accumulated in the same documented order as the sector build (hopping
// bonds left to right, then zz pairs (i, j>i) lexicographically, then the
// gradient part as h times an integer-valued matrix), which makes the sector
// blocks of the two constructions agree exactly, not just to rounding.
struct DenseReference {
  int L = 0;
  double eta = 0;
  double J = 1;
  double h = 0;
  Eigen::MatrixXd matrix; // real part, 2^L x 2^L
  double max_imag = 0;    // largest |imaginary part| seen when realifying

  // Block of rows/columns whose full-space index has popcount N, in
  // increasing index order.
  Eigen::MatrixXd sector_block(int N) const;

  // max_ij |[H, Sz]_ij| with Sz = (1/2) sum_i sz_i.
  double sz_commutator_max() const;
};

// Builds the reference. Requires L <= 12 (the matrix is dense in the full
// Hilbert space); throws TooLarge beyond that. params.N is ignored.
DenseReference dense_full_hamiltonian(const ProbeParams& params);

// Full-space indices that belong to the N-excitation sector, ascending.
std::vector<std::size_t> sector_indices(int L, int N);

// Quantum Fisher information from explicit differentiation of the dense
// sector ground state: F = 4 (<dpsi|dpsi> - <psi|dpsi>^2), the derivative
// taken by central differences of sign-aligned eigenvectors (one-sided
// second-order stencil when h < delta_h keeps all fields nonnegative).
// Requires L <= 12 and a unique ground state at all stencil points.
double qfi_by_differentiation(const ProbeParams& params, double delta_h);

} // namespace stark
