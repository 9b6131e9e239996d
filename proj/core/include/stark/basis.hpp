#pragma once

#include <cstdint>
#include <vector>

#include "stark/errors.hpp"

namespace stark {

// Computational basis states are bitmasks: bit b set means site b+1 carries an
// excitation (sigma^z = +1), so sites are numbered 1..L left to right.
using Mask = std::uint64_t;

// Exact binomial coefficient for 0 <= k <= n <= 64 (table backed).
std::uint64_t binomial(int n, int k);

// All L-site states with exactly N excitations, sorted by increasing integer
// value of the mask. Immutable after construction; cheap to share by
// reference or shared_ptr between operators built in the same sector.
class SectorBasis {
public:
  // Enumerates the sector. Requires 2 <= L <= 32 and 0 <= N <= L.
  SectorBasis(int sites, int excitations);

  int sites() const { return L_; }
  int excitations() const { return N_; }
  double filling() const { return static_cast<double>(N_) / L_; }
  std::size_t dim() const { return states_.size(); }

  Mask state(std::size_t index) const { return states_[index]; }
  const std::vector<Mask>& states() const { return states_; }

  // Combinadic rank of a mask within the sector, O(N) with no search.
  // Throws NotInSector if the mask has the wrong excitation count or uses
  // sites beyond L.
  std::size_t rank(Mask m) const;

private:
  int L_;
  int N_;
  std::vector<Mask> states_;
};

inline SectorBasis build_basis(int sites, int excitations) {
  return SectorBasis(sites, excitations);
}

} // namespace stark
