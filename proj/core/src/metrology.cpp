#include "stark/metrology.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "stark/errors.hpp"

namespace stark {

namespace {
constexpr double kChiAgreeRel = 1e-3;
constexpr double kStepFloor = 1e-12;
constexpr double kProbFloor = 1e-14;
} // namespace

ProbeWorkspace::ProbeWorkspace(const ProbeParams& family, SolveOptions solver)
    : family_(family),
      solver_(solver),
      base_(family, std::make_shared<SectorBasis>(family.L, family.N)) {
  solver_.want_gap = true; // degeneracy detection is not optional here
}

const GroundSolution& ProbeWorkspace::ground(double h) {
  auto it = cache_.find(h);
  if (it != cache_.end()) return it->second;
  const GroundSolution sol =
      ground_state(base_.with_field_amplitude(h), solver_);
  while (order_.size() >= cache_cap_) {
    cache_.erase(order_.front());
    order_.pop_front();
  }
  order_.push_back(h);
  return cache_.emplace(h, std::move(sol)).first->second;
}

void ProbeWorkspace::clear_cache() {
  cache_.clear();
  order_.clear();
}

double ProbeWorkspace::chi(double h, double delta_h, ChiVariant variant) {
  if (!(delta_h > 0))
    throw InvalidArguments("chi: delta_h must be > 0");
  if (h < 0) throw InvalidArguments("chi: h must be >= 0");

  double lo = h, hi = h + delta_h;
  if (variant == ChiVariant::centered) {
    lo = h - 0.5 * delta_h;
    hi = h + 0.5 * delta_h;
    if (lo < 0)
      throw InvalidArguments("chi: centered stencil reaches below h = 0");
  }

  // Copy the endpoint states out of the cache before the second solve can
  // evict the first.
  Eigen::VectorXd u, v;
  {
    const GroundSolution& su = ground(lo);
    if (su.degenerate)
      throw DegenerateGroundState("chi: degenerate ground state at h=" +
                                  std::to_string(lo));
    u = su.vector0;
  }
  {
    const GroundSolution& sv = ground(hi);
    if (sv.degenerate)
      throw DegenerateGroundState("chi: degenerate ground state at h=" +
                                  std::to_string(hi));
    v = sv.vector0;
  }
  if (u.dot(v) < 0) v = -v;
  return (u - v).squaredNorm() / (delta_h * delta_h);
}

FisherPoint ProbeWorkspace::qfi_point(double h) {
  FisherPoint pt;
  pt.params = family_;
  pt.params.h = h;

  try {
    double dh = std::max(1e-6, 1e-4 * std::max(h, 1e-3));
    double chi_coarse = chi(h, dh);
    while (true) {
      const double chi_fine = chi(h, 0.5 * dh);
      const double diff = std::abs(chi_coarse - chi_fine);
      if (diff <= kChiAgreeRel * std::abs(chi_fine) ||
          (chi_coarse == 0.0 && chi_fine == 0.0)) {
        pt.qfi = 4.0 * (2.0 * chi_fine - chi_coarse);
        pt.delta_h = 0.5 * dh;
        pt.richardson_err = 4.0 * diff;
        pt.valid = true;
        return pt;
      }
      dh *= 0.5;
      if (0.5 * dh < kStepFloor)
        throw StepUnderflow(
            "qfi: chi estimates never stabilized, last step " +
            std::to_string(dh));
      chi_coarse = chi_fine;
    }
  } catch (const DegenerateGroundState& e) {
    pt.failure = e.what();
  } catch (const StepUnderflow& e) {
    pt.failure = e.what();
  } catch (const NoConvergence& e) {
    pt.failure = e.what();
  }
  pt.valid = false;
  return pt;
}

FisherPoint ProbeWorkspace::qfi_point(double h, double fixed_delta) {
  if (!(fixed_delta > 0))
    throw InvalidArguments("qfi: fixed_delta must be > 0");
  FisherPoint pt;
  pt.params = family_;
  pt.params.h = h;

  try {
    const double chi_coarse = chi(h, fixed_delta);
    const double chi_fine = chi(h, 0.5 * fixed_delta);
    pt.qfi = 4.0 * (2.0 * chi_fine - chi_coarse);
    pt.delta_h = 0.5 * fixed_delta;
    pt.richardson_err = 4.0 * std::abs(chi_coarse - chi_fine);
    pt.valid = true;
    return pt;
  } catch (const DegenerateGroundState& e) {
    pt.failure = e.what();
  } catch (const NoConvergence& e) {
    pt.failure = e.what();
  }
  pt.valid = false;
  return pt;
}

double ProbeWorkspace::cfi(double h, double delta_h) {
  if (!(delta_h > 0))
    throw InvalidArguments("cfi: delta_h must be > 0");
  if (h < 0) throw InvalidArguments("cfi: h must be >= 0");

  auto probs = [this](double field) {
    const GroundSolution& s = ground(field);
    if (s.degenerate)
      throw DegenerateGroundState("cfi: degenerate ground state at h=" +
                                  std::to_string(field));
    return Eigen::VectorXd(s.vector0.array().square());
  };

  const Eigen::VectorXd p0 = probs(h);
  Eigen::VectorXd dp;
  if (h >= delta_h) {
    dp = (probs(h + delta_h) - probs(h - delta_h)) / (2.0 * delta_h);
  } else {
    dp = (-3.0 * p0 + 4.0 * probs(h + delta_h) - probs(h + 2.0 * delta_h)) /
         (2.0 * delta_h);
  }

  double f = 0.0;
  for (Eigen::Index i = 0; i < p0.size(); ++i)
    if (p0[i] > kProbFloor) f += dp[i] * dp[i] / p0[i];
  return f;
}

double fidelity_susceptibility(const ProbeParams& params, double delta_h,
                               ChiVariant variant) {
  params.validate();
  ProbeWorkspace ws(params);
  return ws.chi(params.h, delta_h, variant);
}

FisherPoint qfi(const ProbeParams& params) {
  params.validate();
  ProbeWorkspace ws(params);
  return ws.qfi_point(params.h);
}

double cfi_computational(const ProbeParams& params, double delta_h) {
  params.validate();
  ProbeWorkspace ws(params);
  return ws.cfi(params.h, delta_h);
}

} // namespace stark
