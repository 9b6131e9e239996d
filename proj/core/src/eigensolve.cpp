#include "stark/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "stark/errors.hpp"

namespace stark {

namespace {

void canonical_sign(Eigen::VectorXd& x) {
  Eigen::Index imax = 0;
  x.cwiseAbs().maxCoeff(&imax);
  if (x[imax] < 0) x = -x;
}

bool degenerate_pair(double e0, double e1) {
  return e1 - e0 < 1e-10 * std::max(1.0, std::abs(e0));
}

Eigen::VectorXd seeded_unit_vector(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
  v.normalize();
  return v;
}

GroundSolution solve_dense(const SectorOperator& op, const SolveOptions& opts) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.dense_matrix());
  GroundSolution sol;
  sol.energy0 = es.eigenvalues()[0];
  sol.vector0 = es.eigenvectors().col(0);
  canonical_sign(sol.vector0);
  sol.vector0.normalize();
  if (opts.want_gap && op.dim() > 1) {
    sol.energy1 = es.eigenvalues()[1];
    sol.degenerate = degenerate_pair(sol.energy0, *sol.energy1);
  }
  sol.residual = (op.apply(sol.vector0) - sol.energy0 * sol.vector0).norm();
  sol.iterations = 0;
  sol.seed = opts.seed;
  return sol;
}

// Thick-restart Lanczos for the lowest nev eigenpairs (Wu & Simon style).
// The projected matrix is an arrowhead-plus-tridiagonal: locked Ritz values
// on the diagonal, their residual couplings in the row/column of the first
// free index, and the usual three-term recurrence beyond it.
GroundSolution solve_lanczos(const SectorOperator& op, const SolveOptions& opts) {
  const auto dim = static_cast<Eigen::Index>(op.dim());
  const int nev = opts.want_gap ? 2 : 1;
  const int m_cap = static_cast<int>(
      std::min<std::size_t>(std::max(opts.subspace, nev + 6), op.dim()));
  const int keep = std::max(std::min(opts.keep, m_cap - 2), nev);

  Eigen::MatrixXd V(dim, m_cap + 1);
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m_cap);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(m_cap);
  Eigen::VectorXd locked_theta = Eigen::VectorXd::Zero(m_cap);
  Eigen::VectorXd locked_b = Eigen::VectorXd::Zero(m_cap);

  V.col(0) = seeded_unit_vector(op.dim(), opts.seed);
  int l = 0; // number of locked Ritz vectors at the front of V
  long matvecs = 0;
  std::uint64_t refresh = 1;

  Eigen::VectorXd w(dim);
  while (true) {
    // Expand the basis from column l towards m_cap, stopping early if the
    // application budget runs out mid-cycle.
    int m = l;
    for (int j = l; j < m_cap; ++j) {
      op.apply(V.col(j), w);
      ++matvecs;
      if (j == l && l > 0)
        w.noalias() -= V.leftCols(l) * locked_b.head(l);
      alpha[j] = V.col(j).dot(w);
      w.noalias() -= alpha[j] * V.col(j);
      if (j > l) w.noalias() -= beta[j - 1] * V.col(j - 1);
      // Full reorthogonalization, two passes.
      for (int pass = 0; pass < 2; ++pass)
        w.noalias() -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * w);
      beta[j] = w.norm();
      if (beta[j] > 1e-14 * std::max(1.0, std::abs(alpha[j]))) {
        V.col(j + 1) = w / beta[j];
      } else {
        // Invariant subspace: continue the recurrence with a fresh direction
        // orthogonal to everything found so far (the zero coupling beta[j]
        // keeps the projected matrix consistent).
        beta[j] = 0.0;
        if (static_cast<std::size_t>(j + 1) == op.dim()) {
          V.col(j + 1).setZero(); // Krylov space is the whole sector
        } else {
          bool refreshed = false;
          for (int attempt = 1; attempt <= 4 && !refreshed; ++attempt) {
            Eigen::VectorXd f = seeded_unit_vector(
                op.dim(), opts.seed + 1000003u * (j + 1) + refresh + attempt);
            for (int pass = 0; pass < 2; ++pass)
              f -= V.leftCols(j + 1) * (V.leftCols(j + 1).transpose() * f);
            const double n = f.norm();
            if (n > 1e-8) {
              V.col(j + 1) = f / n;
              refreshed = true;
            }
          }
          refresh += 4;
          if (!refreshed)
            throw NoConvergence(
                "ground_state: could not refresh the basis after an invariant "
                "subspace breakdown",
                0.0, matvecs);
        }
      }
      m = j + 1;
      if (matvecs >= opts.max_matvecs) break;
    }

    // Projected eigenproblem on the m columns built so far.
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < l; ++i) {
      T(i, i) = locked_theta[i];
      T(i, l) = T(l, i) = locked_b[i];
    }
    for (int j = l; j < m; ++j) {
      T(j, j) = alpha[j];
      if (j + 1 < m) T(j, j + 1) = T(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::VectorXd& theta = es.eigenvalues();
    const Eigen::MatrixXd& S = es.eigenvectors();

    const double beta_last = beta[m - 1];
    const double tol_eff = opts.tol * std::max(1.0, std::abs(theta[0]));
    bool converged = m >= nev;
    for (int i = 0; i < nev && i < m; ++i)
      converged = converged && std::abs(beta_last * S(m - 1, i)) <= tol_eff;

    const bool exhausted = matvecs >= opts.max_matvecs;
    const bool full_space = static_cast<std::size_t>(m) == op.dim();
    if (converged || exhausted || full_space) {
      GroundSolution sol;
      sol.energy0 = theta[0];
      sol.vector0.noalias() = V.leftCols(m) * S.col(0);
      sol.vector0.normalize();
      canonical_sign(sol.vector0);
      sol.residual = (op.apply(sol.vector0) - sol.energy0 * sol.vector0).norm();
      ++matvecs;
      sol.iterations = matvecs;
      sol.seed = opts.seed;
      if (opts.want_gap && m > 1) {
        sol.energy1 = theta[1];
        sol.degenerate = degenerate_pair(sol.energy0, *sol.energy1);
      }
      const bool residual_ok =
          sol.residual <= opts.tol * std::max(1.0, std::abs(sol.energy0)) &&
          (!opts.want_gap || sol.energy1.has_value());
      if (residual_ok || full_space) return sol;
      if (exhausted)
        throw NoConvergence("ground_state: no convergence after " +
                                std::to_string(matvecs) + " applications",
                            sol.residual, matvecs);
      // Otherwise fall through to a restart and keep iterating.
    }

    // Thick restart: keep the lowest Ritz pairs plus the trailing residual
    // direction, then continue the recurrence.
    const int k = std::min(keep, m - 2);
    Eigen::MatrixXd Y(dim, k);
    Y.noalias() = V.leftCols(m) * S.leftCols(k);
    for (int i = 0; i < k; ++i) {
      locked_theta[i] = theta[i];
      locked_b[i] = beta_last * S(m - 1, i);
    }
    V.leftCols(k) = Y;
    V.col(k) = V.col(m);
    l = k;
  }
}

} // namespace

GroundSolution ground_state(const SectorOperator& op, const SolveOptions& opts) {
  if (!(opts.tol > 0))
    throw InvalidArguments("ground_state: tol must be > 0");
  if (opts.max_matvecs < 1)
    throw InvalidArguments("ground_state: max_matvecs must be >= 1");
  if (op.dim() <= opts.dense_threshold || op.dim() <= 4)
    return solve_dense(op, opts);
  return solve_lanczos(op, opts);
}

GroundSolution ground_state(const SectorOperator& op, double tol, bool want_gap) {
  SolveOptions opts;
  opts.tol = tol;
  opts.want_gap = want_gap;
  return ground_state(op, opts);
}

double gap(const SectorOperator& op, const SolveOptions& opts) {
  if (op.dim() < 2)
    throw InvalidArguments("gap: sector has a single state");
  SolveOptions o = opts;
  o.want_gap = true;
  const GroundSolution sol = ground_state(op, o);
  return *sol.energy1 - sol.energy0;
}

} // namespace stark
