#include <doctest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <vector>

#include "stark/oracle.hpp"

using stark::ProbeParams;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double coupling_local(double eta, int d) {
  if (std::isinf(eta)) return d == 1 ? 1.0 : 0.0;
  if (eta == 0) return 1.0;
  return 1.0 / std::pow(static_cast<double>(d), eta);
}

// Third, loop-based evaluation of the diagonal for cross-checking.
double diag_local(int L, double eta, double h, std::size_t s) {
  double zz = 0.0;
  double field = 0.0;
  for (int i = 1; i <= L; ++i) {
    const double zi = ((s >> (i - 1)) & 1) ? 1.0 : -1.0;
    field += i * zi;
    for (int j = i + 1; j <= L; ++j) {
      const double zj = ((s >> (j - 1)) & 1) ? 1.0 : -1.0;
      zz += coupling_local(eta, j - i) * zi * zj;
    }
  }
  return zz + h * field;
}

} // namespace

TEST_CASE("dense reference is real and symmetric with zero Sz commutator") {
  for (double eta : {0.0, 0.5, 1.0, 2.0, kInf}) {
    for (double h : {0.0, 0.3}) {
      ProbeParams p{.L = 5, .N = 2, .eta = eta, .J = 1.0, .h = h};
      const auto ref = stark::dense_full_hamiltonian(p);
      CHECK(ref.max_imag == 0.0);
      CHECK((ref.matrix - ref.matrix.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(ref.sz_commutator_max() == 0.0);
    }
  }
}

TEST_CASE("dense reference diagonal matches loop evaluation") {
  const int L = 5;
  for (double eta : {0.0, 0.5, 2.0, kInf}) {
    ProbeParams p{.L = L, .N = 0, .eta = eta, .J = 1.0, .h = 0.3};
    const auto ref = stark::dense_full_hamiltonian(p);
    for (std::size_t s = 0; s < (std::size_t{1} << L); ++s)
      CHECK(ref.matrix(static_cast<Eigen::Index>(s),
                       static_cast<Eigen::Index>(s)) ==
            doctest::Approx(diag_local(L, eta, 0.3, s)).epsilon(1e-14));
  }
}

TEST_CASE("dense reference off-diagonals hop only between neighbour flips") {
  const int L = 4;
  ProbeParams p{.L = L, .N = 0, .eta = 1.0, .J = 0.7, .h = 0.2};
  const auto ref = stark::dense_full_hamiltonian(p);
  for (std::size_t r = 0; r < (std::size_t{1} << L); ++r) {
    for (std::size_t c = 0; c < (std::size_t{1} << L); ++c) {
      if (r == c) continue;
      const std::size_t x = r ^ c;
      const bool adjacent_pair =
          std::popcount(x) == 2 && (x & (x >> 1)) != 0 &&
          std::popcount(r & x) == 1; // anti-aligned on the bond
      const double expect = adjacent_pair ? 2.0 * p.J : 0.0;
      CHECK(ref.matrix(static_cast<Eigen::Index>(r),
                       static_cast<Eigen::Index>(c)) == expect);
    }
  }
}

TEST_CASE("two level sector block has the closed form") {
  for (double h : {0.0, 0.25, 1.5}) {
    ProbeParams p{.L = 2, .N = 1, .eta = 1.0, .J = 1.0, .h = h};
    const auto block = stark::dense_full_hamiltonian(p).sector_block(1);
    REQUIRE(block.rows() == 2);
    CHECK(block(0, 0) == -1.0 - h);
    CHECK(block(1, 1) == -1.0 + h);
    CHECK(block(0, 1) == 2.0);
    CHECK(block(1, 0) == 2.0);
  }
}

TEST_CASE("sector indices enumerate ascending popcount-filtered masks") {
  const auto idx = stark::sector_indices(4, 2);
  const std::vector<std::size_t> expect{3, 5, 6, 9, 10, 12};
  CHECK(idx == expect);
  CHECK(stark::sector_indices(10, 5).size() == 252);
}

TEST_CASE("differentiation QFI reproduces the two level closed form") {
  for (double h : {0.0, 0.2, 0.5, 2.0}) {
    ProbeParams p{.L = 2, .N = 1, .eta = 1.0, .J = 1.0, .h = h};
    const double expect = 4.0 / ((4.0 + h * h) * (4.0 + h * h));
    const double got = stark::qfi_by_differentiation(p, 1e-4);
    CHECK(got == doctest::Approx(expect).epsilon(1e-6));
  }
}

TEST_CASE("differentiation QFI scales as J^-2 at h=0 for two levels") {
  // F(h=0) = 1/(4 J^2)
  for (double J : {0.5, 1.0, 3.0}) {
    ProbeParams p{.L = 2, .N = 1, .eta = 1.0, .J = J, .h = 0.0};
    CHECK(stark::qfi_by_differentiation(p, 1e-4) ==
          doctest::Approx(1.0 / (4.0 * J * J)).epsilon(1e-6));
  }
}

TEST_CASE("dense reference rejects oversized chains") {
  ProbeParams p{.L = 13, .N = 6, .eta = 1.0, .J = 1.0, .h = 0.1};
  CHECK_THROWS_AS(stark::dense_full_hamiltonian(p), stark::TooLarge);
}
