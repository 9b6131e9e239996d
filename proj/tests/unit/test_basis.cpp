#include <doctest.h>

#include <bit>
#include <cstdint>
#include <vector>

#include "stark/basis.hpp"

using stark::Mask;
using stark::SectorBasis;

namespace {

// Independent dimension oracle: plain Pascal recurrence computed on demand.
std::uint64_t pascal(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::vector<std::uint64_t> row(static_cast<std::size_t>(n) + 1, 0);
  row[0] = 1;
  for (int i = 1; i <= n; ++i)
    for (int j = i; j >= 1; --j)
      row[j] += row[j - 1];
  return row[k];
}

// Independent enumeration oracle: filter all 2^L integers by popcount.
std::vector<Mask> enumerate_naive(int L, int N) {
  std::vector<Mask> out;
  for (Mask m = 0; m < (Mask{1} << L); ++m)
    if (std::popcount(m) == N) out.push_back(m);
  return out;
}

} // namespace

TEST_CASE("binomial matches Pascal recurrence") {
  for (int n = 0; n <= 64; n += (n < 20 ? 1 : 11))
    for (int k = 0; k <= n; ++k)
      CHECK(stark::binomial(n, k) == pascal(n, k));
  CHECK(stark::binomial(30, 15) == 155117520ull);
  CHECK_THROWS_AS(stark::binomial(65, 1), stark::InvalidArguments);
  CHECK_THROWS_AS(stark::binomial(10, -1), stark::InvalidArguments);
  CHECK_THROWS_AS(stark::binomial(10, 11), stark::InvalidArguments);
}

TEST_CASE("sector enumeration matches naive filter and is sorted") {
  for (int L = 2; L <= 12; ++L) {
    for (int N = 0; N <= L; ++N) {
      SectorBasis b(L, N);
      const auto ref = enumerate_naive(L, N);
      REQUIRE(b.dim() == ref.size());
      for (std::size_t k = 0; k < ref.size(); ++k)
        CHECK(b.state(k) == ref[k]);
    }
  }
}

TEST_CASE("sector dimensions are binomial coefficients and sum to 2^L") {
  for (int L : {4, 8, 12, 16, 20}) {
    std::uint64_t total = 0;
    for (int N = 0; N <= L; ++N) {
      SectorBasis b(L, N);
      CHECK(b.dim() == pascal(L, N));
      total += b.dim();
    }
    CHECK(total == (std::uint64_t{1} << L));
  }
}

TEST_CASE("known sector contents at L=4, N=2") {
  SectorBasis b(4, 2);
  const std::vector<Mask> expected{3, 5, 6, 9, 10, 12};
  REQUIRE(b.dim() == 6);
  for (std::size_t k = 0; k < expected.size(); ++k)
    CHECK(b.state(k) == expected[k]);
}

TEST_CASE("rank is the inverse of state") {
  for (int L : {2, 5, 8, 11}) {
    for (int N = 0; N <= L; ++N) {
      SectorBasis b(L, N);
      for (std::size_t k = 0; k < b.dim(); ++k)
        CHECK(b.rank(b.state(k)) == k);
    }
  }
  SectorBasis big(20, 10);
  REQUIRE(big.dim() == 184756);
  for (std::size_t k = 0; k < big.dim(); k += 97)
    CHECK(big.rank(big.state(k)) == k);
}

TEST_CASE("rank rejects masks outside the sector") {
  SectorBasis b(8, 4);
  CHECK_THROWS_AS(b.rank(Mask{1}), stark::NotInSector);
  CHECK_THROWS_AS(b.rank(Mask{0xFF}), stark::NotInSector);
  CHECK_THROWS_AS(b.rank(Mask{0xF} << 8), stark::NotInSector);
}

TEST_CASE("constructor rejects bad arguments") {
  CHECK_THROWS_AS(SectorBasis(1, 0), stark::InvalidArguments);
  CHECK_THROWS_AS(SectorBasis(33, 1), stark::InvalidArguments);
  CHECK_THROWS_AS(SectorBasis(8, 9), stark::InvalidArguments);
  CHECK_THROWS_AS(SectorBasis(8, -1), stark::InvalidArguments);
}

TEST_CASE("edge sectors have a single state") {
  SectorBasis empty(6, 0);
  REQUIRE(empty.dim() == 1);
  CHECK(empty.state(0) == 0);
  CHECK(empty.rank(0) == 0);

  SectorBasis full(6, 6);
  REQUIRE(full.dim() == 1);
  CHECK(full.state(0) == 0x3F);
  CHECK(full.rank(0x3F) == 0);
}

TEST_CASE("half filling at L=30 enumerates the full sector" * doctest::skip(false)) {
  SectorBasis b(30, 15);
  REQUIRE(b.dim() == 155117520);
  CHECK(b.state(0) == (Mask{1} << 15) - 1);
  CHECK(b.state(b.dim() - 1) == ((Mask{1} << 15) - 1) << 15);
  CHECK(b.rank(b.state(77777777)) == 77777777);
}
