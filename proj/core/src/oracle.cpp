#include "stark/oracle.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "stark/errors.hpp"

namespace stark {

namespace {

using CMat = Eigen::MatrixXcd;
using Cplx = std::complex<double>;

// Single-site operators in the (down, up) ordering used by the basis
// convention: state index bit b is the occupation of site b+1.
CMat pauli_x() {
  CMat m(2, 2);
  m << Cplx(0, 0), Cplx(1, 0), Cplx(1, 0), Cplx(0, 0);
  return m;
}

CMat pauli_y() {
  CMat m(2, 2);
  m << Cplx(0, 0), Cplx(0, 1), Cplx(0, -1), Cplx(0, 0);
  return m;
}

CMat pauli_z() {
  CMat m(2, 2);
  m << Cplx(-1, 0), Cplx(0, 0), Cplx(0, 0), Cplx(1, 0);
  return m;
}

CMat identity2() { return CMat::Identity(2, 2); }

CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Chain operator with `op` on the listed sites (1-based) and identity
// elsewhere. Site 1 ends up on the lowest index bit.
CMat site_operator(int L, std::initializer_list<std::pair<int, const CMat*>> ops) {
  CMat m = CMat::Identity(1, 1);
  for (int site = L; site >= 1; --site) {
    const CMat* factor = nullptr;
    for (const auto& [s, op] : ops)
      if (s == site) factor = op;
    m = kron(m, factor ? *factor : identity2());
  }
  return m;
}

double coupling_reference(double eta, int d) {
  if (std::isinf(eta)) return d == 1 ? 1.0 : 0.0;
  if (eta == 0) return 1.0;
  return 1.0 / std::pow(static_cast<double>(d), eta);
}

} // namespace

DenseReference dense_full_hamiltonian(const ProbeParams& params) {
  if (params.L < 2 || params.L > 12)
    throw TooLarge("dense_full_hamiltonian: L must be in [2,12], got " +
                   std::to_string(params.L));
  if (std::isnan(params.eta) || params.eta < 0)
    throw InvalidArguments("dense_full_hamiltonian: eta must be >= 0 or inf");
  if (!(params.J > 0) || std::isinf(params.J))
    throw InvalidArguments("dense_full_hamiltonian: J must be finite and > 0");
  if (std::isnan(params.h) || std::isinf(params.h))
    throw InvalidArguments("dense_full_hamiltonian: h must be finite");

  const int L = params.L;
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << L);
  const CMat sx = pauli_x(), sy = pauli_y(), sz = pauli_z();

  CMat H = CMat::Zero(dim, dim);
  for (int i = 1; i < L; ++i) {
    H += params.J * site_operator(L, {{i, &sx}, {i + 1, &sx}});
    H += params.J * site_operator(L, {{i, &sy}, {i + 1, &sy}});
  }
  for (int i = 1; i <= L; ++i)
    for (int j = i + 1; j <= L; ++j)
      H += coupling_reference(params.eta, j - i) *
           site_operator(L, {{i, &sz}, {j, &sz}});

  CMat S = CMat::Zero(dim, dim);
  for (int i = 1; i <= L; ++i)
    S += static_cast<double>(i) * site_operator(L, {{i, &sz}});
  H += params.h * S;

  DenseReference ref;
  ref.L = L;
  ref.eta = params.eta;
  ref.J = params.J;
  ref.h = params.h;
  ref.max_imag = H.imag().cwiseAbs().maxCoeff();
  ref.matrix = H.real();
  return ref;
}

std::vector<std::size_t> sector_indices(int L, int N) {
  std::vector<std::size_t> idx;
  for (std::size_t m = 0; m < (std::size_t{1} << L); ++m)
    if (std::popcount(m) == N) idx.push_back(m);
  return idx;
}

Eigen::MatrixXd DenseReference::sector_block(int N) const {
  const auto idx = sector_indices(L, N);
  const auto d = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd block(d, d);
  for (Eigen::Index r = 0; r < d; ++r)
    for (Eigen::Index c = 0; c < d; ++c)
      block(r, c) = matrix(static_cast<Eigen::Index>(idx[r]),
                           static_cast<Eigen::Index>(idx[c]));
  return block;
}

double DenseReference::sz_commutator_max() const {
  const auto dim = matrix.rows();
  Eigen::VectorXd sz_diag(dim);
  for (Eigen::Index s = 0; s < dim; ++s) {
    const int ones = std::popcount(static_cast<std::uint64_t>(s));
    sz_diag[s] = 0.5 * (2 * ones - L);
  }
  // Sz is diagonal, so [H, Sz]_ij = H_ij (sz_j - sz_i).
  double worst = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j)
      worst = std::max(worst,
                       std::abs(matrix(i, j) * (sz_diag[j] - sz_diag[i])));
  return worst;
}

namespace {

Eigen::VectorXd dense_sector_ground(const ProbeParams& params, double h) {
  ProbeParams p = params;
  p.h = h;
  const DenseReference ref = dense_full_hamiltonian(p);
  const Eigen::MatrixXd block = ref.sector_block(params.N);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
  const auto& ev = es.eigenvalues();
  if (ev.size() > 1 &&
      ev[1] - ev[0] < 1e-12 * std::max(1.0, std::abs(ev[0])))
    throw DegenerateGroundState(
        "qfi_by_differentiation: ground state degenerate at h=" +
        std::to_string(h));
  return es.eigenvectors().col(0);
}

void align_sign(const Eigen::VectorXd& anchor, Eigen::VectorXd& v) {
  if (anchor.dot(v) < 0) v = -v;
}

} // namespace

double qfi_by_differentiation(const ProbeParams& params, double delta_h) {
  params.validate();
  if (!(delta_h > 0))
    throw InvalidArguments("qfi_by_differentiation: delta_h must be > 0");

  const Eigen::VectorXd psi = dense_sector_ground(params, params.h);
  Eigen::VectorXd dpsi;
  if (params.h >= delta_h) {
    Eigen::VectorXd lo = dense_sector_ground(params, params.h - delta_h);
    Eigen::VectorXd hi = dense_sector_ground(params, params.h + delta_h);
    align_sign(psi, lo);
    align_sign(psi, hi);
    dpsi = (hi - lo) / (2.0 * delta_h);
  } else {
    Eigen::VectorXd p1 = dense_sector_ground(params, params.h + delta_h);
    Eigen::VectorXd p2 = dense_sector_ground(params, params.h + 2.0 * delta_h);
    align_sign(psi, p1);
    align_sign(psi, p2);
    dpsi = (-3.0 * psi + 4.0 * p1 - p2) / (2.0 * delta_h);
  }
  const double overlap = psi.dot(dpsi);
  return 4.0 * (dpsi.squaredNorm() - overlap * overlap);
}

} // namespace stark
