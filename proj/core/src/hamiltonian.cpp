#include "stark/hamiltonian.hpp"

#include <bit>
#include <string>

namespace stark {

void ProbeParams::validate() const {
  if (L < 2 || L > 32)
    throw InvalidArguments("ProbeParams: L must be in [2,32], got " +
                           std::to_string(L));
  if (N < 0 || N > L)
    throw InvalidArguments("ProbeParams: N must be in [0,L], got " +
                           std::to_string(N));
  if (std::isnan(eta) || eta < 0)
    throw InvalidArguments("ProbeParams: eta must be >= 0 or inf");
  if (!(J > 0) || std::isinf(J))
    throw InvalidArguments("ProbeParams: J must be finite and > 0");
  if (std::isnan(h) || std::isinf(h) || h < 0)
    throw InvalidArguments("ProbeParams: h must be finite and >= 0");
}

double coupling(double eta, int distance) {
  if (distance < 1)
    throw InvalidArguments("coupling: distance must be >= 1, got " +
                           std::to_string(distance));
  if (std::isnan(eta) || eta < 0)
    throw InvalidArguments("coupling: eta must be >= 0 or inf");
  if (std::isinf(eta)) return distance == 1 ? 1.0 : 0.0;
  if (eta == 0) return 1.0;
  return 1.0 / std::pow(static_cast<double>(distance), eta);
}

SectorOperator::SectorOperator(const ProbeParams& params,
                               std::shared_ptr<const SectorBasis> basis)
    : params_(params) {
  params_.validate();
  if (!basis)
    throw InvalidArguments("SectorOperator: null basis");
  if (basis->sites() != params_.L || basis->excitations() != params_.N)
    throw InvalidArguments("SectorOperator: basis sector (" +
                           std::to_string(basis->sites()) + "," +
                           std::to_string(basis->excitations()) +
                           ") does not match params");

  const int L = params_.L;
  const std::size_t dim = basis->dim();

  auto terms = std::make_shared<Terms>();
  terms->basis = std::move(basis);
  terms->eta = params_.eta;
  terms->zz_diag.resize(dim);
  terms->field_diag.resize(dim);
  terms->hop_offsets.resize(dim + 1);
  terms->hop_targets.reserve(dim * static_cast<std::size_t>(L) / 2);

  std::vector<double> c(static_cast<std::size_t>(L), 0.0);
  for (int d = 1; d < L; ++d) c[d] = coupling(params_.eta, d);

  const SectorBasis& b = *terms->basis;
  for (std::size_t k = 0; k < dim; ++k) {
    const Mask m = b.state(k);

    // Site i holds z_i = +1 when bit i-1 is set. Accumulation runs over
    // ordered pairs (i, j > i) so partial sums are reproducible.
    double zz = 0.0;
    long field = 0;
    for (int i = 1; i <= L; ++i) {
      const bool zi = (m >> (i - 1)) & 1;
      field += zi ? i : -i;
      for (int j = i + 1; j <= L; ++j) {
        const bool zj = (m >> (j - 1)) & 1;
        const double cij = c[j - i];
        zz += (zi == zj) ? cij : -cij;
      }
    }
    terms->zz_diag[k] = zz;
    terms->field_diag[k] = static_cast<double>(field);

    terms->hop_offsets[k] = static_cast<std::uint32_t>(terms->hop_targets.size());
    for (int bit = 0; bit + 1 < L; ++bit) {
      const Mask pair = Mask{3} << bit;
      const Mask sel = m & pair;
      if (sel == 0 || sel == pair) continue; // aligned pair, no hop
      terms->hop_targets.push_back(static_cast<std::uint32_t>(b.rank(m ^ pair)));
    }
  }
  terms->hop_offsets[dim] = static_cast<std::uint32_t>(terms->hop_targets.size());

  terms_ = std::move(terms);
  diag_ = terms_->zz_diag + params_.h * terms_->field_diag;
}

SectorOperator::SectorOperator(std::shared_ptr<const Terms> terms,
                               const ProbeParams& params)
    : terms_(std::move(terms)), params_(params) {
  params_.validate();
  diag_ = terms_->zz_diag + params_.h * terms_->field_diag;
}

SectorOperator SectorOperator::with_field_amplitude(double h) const {
  ProbeParams p = params_;
  p.h = h;
  return SectorOperator(terms_, p);
}

void SectorOperator::apply(const Eigen::Ref<const Eigen::VectorXd>& v,
                           Eigen::Ref<Eigen::VectorXd> out) const {
  const std::size_t dim = this->dim();
  if (static_cast<std::size_t>(v.size()) != dim ||
      static_cast<std::size_t>(out.size()) != dim)
    throw DimensionMismatch("apply: vector length " + std::to_string(v.size()) +
                            " / " + std::to_string(out.size()) +
                            " vs sector dimension " + std::to_string(dim));
  const double twoJ = 2.0 * params_.J;
  const auto& off = terms_->hop_offsets;
  const auto& tgt = terms_->hop_targets;
  for (std::size_t k = 0; k < dim; ++k) {
    double s = 0.0;
    for (std::uint32_t idx = off[k]; idx < off[k + 1]; ++idx)
      s += v[tgt[idx]];
    out[static_cast<Eigen::Index>(k)] =
        diag_[static_cast<Eigen::Index>(k)] * v[static_cast<Eigen::Index>(k)] +
        twoJ * s;
  }
}

Eigen::VectorXd SectorOperator::apply(
    const Eigen::Ref<const Eigen::VectorXd>& v) const {
  Eigen::VectorXd out(v.size());
  apply(v, out);
  return out;
}

Eigen::MatrixXd SectorOperator::dense_matrix() const {
  const std::size_t dim = this->dim();
  if (dim > 4096)
    throw TooLarge("dense_matrix: sector dimension " + std::to_string(dim) +
                   " exceeds the dense cap 4096");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim),
                                            static_cast<Eigen::Index>(dim));
  const double twoJ = 2.0 * params_.J;
  for (std::size_t k = 0; k < dim; ++k) {
    const auto ek = static_cast<Eigen::Index>(k);
    M(ek, ek) = diag_[ek];
    for (std::uint32_t idx = terms_->hop_offsets[k];
         idx < terms_->hop_offsets[k + 1]; ++idx)
      M(ek, static_cast<Eigen::Index>(terms_->hop_targets[idx])) = twoJ;
  }
  return M;
}

SectorOperator build_operator(const ProbeParams& params,
                              std::shared_ptr<const SectorBasis> basis) {
  return SectorOperator(params, std::move(basis));
}

SectorOperator build_operator(const ProbeParams& params) {
  params.validate();
  return SectorOperator(params,
                        std::make_shared<SectorBasis>(params.L, params.N));
}

} // namespace stark
