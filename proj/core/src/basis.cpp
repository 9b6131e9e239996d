#include "stark/basis.hpp"

#include <array>
#include <bit>
#include <string>

namespace stark {

namespace {

struct BinomialTable {
  std::array<std::array<std::uint64_t, 65>, 65> c{};
  constexpr BinomialTable() {
    for (int n = 0; n <= 64; ++n) {
      c[n][0] = 1;
      for (int k = 1; k <= n; ++k)
        c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0);
    }
  }
};

constexpr BinomialTable kBinomial{};

// Next larger integer with the same popcount (Gosper's hack).
inline Mask next_same_popcount(Mask v) {
  Mask t = v | (v - 1);
  return (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
}

} // namespace

std::uint64_t binomial(int n, int k) {
  if (n < 0 || n > 64 || k < 0 || k > n)
    throw InvalidArguments("binomial: need 0 <= k <= n <= 64, got n=" +
                           std::to_string(n) + " k=" + std::to_string(k));
  return kBinomial.c[n][k];
}

SectorBasis::SectorBasis(int sites, int excitations)
    : L_(sites), N_(excitations) {
  if (L_ < 2 || L_ > 32)
    throw InvalidArguments("SectorBasis: sites must be in [2,32], got " +
                           std::to_string(L_));
  if (N_ < 0 || N_ > L_)
    throw InvalidArguments("SectorBasis: excitations must be in [0,sites], got " +
                           std::to_string(N_));

  const std::uint64_t d = binomial(L_, N_);
  states_.reserve(d);
  if (N_ == 0) {
    states_.push_back(0);
    return;
  }
  const Mask limit = (L_ == 64) ? ~Mask{0} : (Mask{1} << L_);
  Mask m = (Mask{1} << N_) - 1;
  while (m < limit) {
    states_.push_back(m);
    if (m == (limit - 1) || N_ == L_)
      break;
    m = next_same_popcount(m);
  }
}

std::size_t SectorBasis::rank(Mask m) const {
  if (std::popcount(m) != N_ || (L_ < 64 && (m >> L_) != 0))
    throw NotInSector("rank: mask " + std::to_string(m) +
                      " is not a state of the (" + std::to_string(L_) + "," +
                      std::to_string(N_) + ") sector");
  // Colexicographic rank over set-bit positions equals the position in the
  // increasing-integer ordering.
  std::size_t r = 0;
  int j = 1;
  Mask rest = m;
  while (rest) {
    const int pos = std::countr_zero(rest);
    r += kBinomial.c[pos][j];
    ++j;
    rest &= rest - 1;
  }
  return r;
}

} // namespace stark
