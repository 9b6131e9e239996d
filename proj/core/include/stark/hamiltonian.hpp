#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "stark/basis.hpp"
#include "stark/errors.hpp"

namespace stark {

// Parameters of the probe chain
//
//   H = J sum_{i=1..L-1} (sx_i sx_{i+1} + sy_i sy_{i+1})
//     + sum_{i<j} |i-j|^{-eta} sz_i sz_j
//     + h sum_{i=1..L} i sz_i
//
// restricted to the sector with N excitations. Open boundaries; the gradient
// field counts sites from 1 at the left edge. eta = +inf selects
// nearest-neighbour sz sz coupling only; eta = 0 makes it all-to-all.
struct ProbeParams {
  int L = 0;
  int N = 0;
  double eta = 1.0;
  double J = 1.0;
  double h = 0.0;

  // Throws InvalidArguments on violation of the documented domain.
  void validate() const;

  bool nearest_neighbour_only() const { return std::isinf(eta); }
};

// Distance-d coupling strength 1/d^eta for d >= 1. eta = 0 gives 1 for every
// distance, eta = +inf gives 1 at d = 1 and 0 beyond.
double coupling(double eta, int distance);

// The Hamiltonian restricted to one excitation sector, stored matrix free:
// a diagonal (zz part plus h times the gradient part) and a CSR table of the
// hopping connectivity. The h-independent pieces are shared between
// operators derived via with_field_amplitude, so scanning h is cheap.
class SectorOperator {
public:
  SectorOperator(const ProbeParams& params,
                 std::shared_ptr<const SectorBasis> basis);

  const ProbeParams& params() const { return params_; }
  const SectorBasis& basis() const { return *terms_->basis; }
  std::shared_ptr<const SectorBasis> basis_ptr() const { return terms_->basis; }
  std::size_t dim() const { return diag_.size(); }

  // Same chain and sector, different field amplitude. Shares the heavy
  // connectivity tables with *this.
  SectorOperator with_field_amplitude(double h) const;

  // out = H v. Throws DimensionMismatch unless both sizes equal dim().
  void apply(const Eigen::Ref<const Eigen::VectorXd>& v,
             Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& v) const;

  // Dense symmetric matrix in basis order. Throws TooLarge above dim 4096.
  Eigen::MatrixXd dense_matrix() const;

  const Eigen::VectorXd& diagonal() const { return diag_; }

private:
  struct Terms {
    std::shared_ptr<const SectorBasis> basis;
    double eta;
    Eigen::VectorXd zz_diag;    // sum_{i<j} |i-j|^-eta z_i z_j per state
    Eigen::VectorXd field_diag; // sum_i i z_i per state (integer valued)
    std::vector<std::uint32_t> hop_offsets; // CSR offsets, dim+1 entries
    std::vector<std::uint32_t> hop_targets; // ranks reached by one hop
  };

  SectorOperator(std::shared_ptr<const Terms> terms, const ProbeParams& params);

  std::shared_ptr<const Terms> terms_;
  ProbeParams params_;
  Eigen::VectorXd diag_;
};

// Convenience constructor matching the two-argument form; builds the basis
// when the caller does not hold one already.
SectorOperator build_operator(const ProbeParams& params,
                              std::shared_ptr<const SectorBasis> basis);
SectorOperator build_operator(const ProbeParams& params);

inline Eigen::VectorXd apply_h(const SectorOperator& op,
                               const Eigen::Ref<const Eigen::VectorXd>& v) {
  return op.apply(v);
}

} // namespace stark
