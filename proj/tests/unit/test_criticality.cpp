#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "stark/criticality.hpp"
#include "stark/errors.hpp"
#include "stark/metrology.hpp"

using namespace stark;

namespace {

SweepRecord make_record(double eta, int L, double h, double qfi) {
  SweepRecord r;
  r.eta = eta;
  r.L = L;
  r.N = L / 2;
  r.h = h;
  r.qfi = qfi;
  r.gap = 1.0;
  r.energy0 = -1.0;
  r.delta_h = 1e-6;
  r.richardson_err = 0.0;
  r.residual = 1e-12;
  r.valid = true;
  return r;
}

// Rows following F = A (h - h0)^(-4) exactly, identical for every size.
std::vector<SweepRecord> power_law_records(const std::vector<int>& sizes,
                                           double h0, double amp,
                                           double scale_top = 1.0) {
  std::vector<SweepRecord> recs;
  for (int j = 0; j <= 20; ++j) {
    const double h = 0.2 * std::pow(5.0, j / 20.0); // [0.2, 1.0] log-spaced
    const double f = amp * std::pow(h - h0, -4.0);
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      const bool top = s + 1 == sizes.size();
      recs.push_back(make_record(0.0, sizes[s], h, top ? scale_top * f : f));
    }
  }
  return recs;
}

} // namespace

TEST_CASE("power-law fits recover their generators exactly") {
  std::vector<SizeValue> qfi, gap, flat;
  for (int L : {8, 10, 12, 14, 16}) {
    qfi.push_back({L, 2.5 * std::pow(L, 3.6)});
    gap.push_back({L, 7.0 * std::pow(L, -1.04)});
    flat.push_back({L, 0.318});
  }

  const FitResult beta = fit_beta(qfi);
  CHECK(beta.exponent == doctest::Approx(3.6).epsilon(1e-12));
  CHECK(beta.amplitude == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(beta.stderr_ == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(beta.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(beta.points == 5);
  CHECK(beta.window_lo == 8.0);
  CHECK(beta.window_hi == 16.0);

  const FitResult z = fit_z(gap, Phase::transition);
  CHECK(z.exponent == doctest::Approx(1.04).epsilon(1e-12));
  CHECK(z.amplitude == doctest::Approx(7.0).epsilon(1e-10));

  // A size-independent gap is the localized-phase signature: z = 0.
  const FitResult z0 = fit_z(flat, Phase::localized);
  CHECK(std::abs(z0.exponent) < 1e-12);
}

TEST_CASE("size fits reject bad input") {
  std::vector<SizeValue> three = {{8, 1.0}, {10, 2.0}, {12, 3.0}};
  CHECK_THROWS_AS(fit_beta(three), InsufficientSizes);
  CHECK_THROWS_AS(fit_z(three, Phase::extended), InsufficientSizes);

  // Duplicate sizes collapse to one point each.
  std::vector<SizeValue> dup = {{8, 1.0}, {8, 1.0}, {10, 2.0}, {10, 2.0},
                                {12, 3.0}, {12, 3.0}};
  CHECK_THROWS_AS(fit_beta(dup), InsufficientSizes);

  std::vector<SizeValue> bad = {{8, 1.0}, {10, -2.0}, {12, 3.0}, {14, 4.0}};
  CHECK_THROWS_AS(fit_beta(bad), InvalidArguments);
  bad[1].value = 0.0;
  CHECK_THROWS_AS(fit_beta(bad), InvalidArguments);
  std::vector<SizeValue> tiny = {{1, 1.0}, {10, 2.0}, {12, 3.0}, {14, 4.0}};
  CHECK_THROWS_AS(fit_beta(tiny), InvalidArguments);
}

TEST_CASE("fit_alpha recovers an exact generator through the anchor") {
  const auto recs = power_law_records({14, 16}, 0.05, 3.0);
  const FitResult fit = fit_alpha(recs, 0.05);
  CHECK(fit.exponent == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(fit.amplitude == doctest::Approx(3.0).epsilon(1e-8));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.points >= 6);
  CHECK(fit.window_lo >= 3 * 0.05);
  CHECK(fit.window_hi <= 1.0);
}

TEST_CASE("fit_alpha applies the window rule and the 3% screen") {
  // 10% disagreement between the sizes kills every shared point.
  const auto split = power_law_records({14, 16}, 0.05, 3.0, 1.10);
  CHECK_THROWS_AS(fit_alpha(split, 0.05), InsufficientWindow);

  // 2% disagreement survives the screen and fits the larger size's curve.
  const auto close = power_law_records({14, 16}, 0.05, 3.0, 1.02);
  const FitResult fit = fit_alpha(close, 0.05);
  CHECK(fit.exponent == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(fit.amplitude == doctest::Approx(3.0 * 1.02).epsilon(1e-8));

  // A large anchor empties the window h in [3 h_max, 1].
  CHECK_THROWS_AS(fit_alpha(power_law_records({14, 16}, 0.05, 3.0), 0.32),
                  InsufficientWindow);

  // One size only.
  CHECK_THROWS_AS(fit_alpha(power_law_records({16}, 0.05, 3.0), 0.05),
                  InsufficientSizes);

  // Invalid rows are excluded; dropping enough of them starves the fit.
  auto sparse = power_law_records({14, 16}, 0.05, 3.0);
  for (std::size_t i = 0; i < sparse.size(); ++i)
    if (sparse[i].h > 0.28) sparse[i].valid = false;
  CHECK_THROWS_AS(fit_alpha(sparse, 0.05), InsufficientWindow);

  // Mixed eta values are a caller bug.
  auto mixed = power_law_records({14, 16}, 0.05, 3.0);
  mixed.front().eta = 1.0;
  CHECK_THROWS_AS(fit_alpha(mixed, 0.05), InvalidArguments);

  CHECK_THROWS_AS(fit_alpha(mixed, 0.0), InvalidArguments);
  CHECK_THROWS_AS(fit_alpha(std::vector<SweepRecord>{}, 0.05),
                  InvalidArguments);
}

namespace {

// Synthetic finite-size-scaling family F = L^(a/v) g(L^(1/v) (h - hc)) with
// the Lorentzian master curve g(x) = 1/(1+x^2).
std::vector<SweepRecord> collapse_family(double h_c, double a, double v,
                                         const std::vector<int>& sizes,
                                         int points = 41, double span = 0.35) {
  std::vector<SweepRecord> recs;
  for (int L : sizes) {
    for (int j = 0; j < points; ++j) {
      const double h = h_c - span + 2.0 * span * j / (points - 1);
      const double x = std::pow(L, 1.0 / v) * (h - h_c);
      const double f = std::pow(L, a / v) / (1.0 + x * x);
      recs.push_back(make_record(0.0, L, h, f));
    }
  }
  return recs;
}

} // namespace

TEST_CASE("collapse recovers the generating exponents") {
  const double h_c = 1e-3;
  const auto recs = collapse_family(h_c, 4.0, 1.0, {10, 12, 14, 16});

  CollapseInit init;
  init.h_c = 0.02;
  init.alpha = 3.0;
  init.nu = 1.4;
  const CollapseResult res = collapse(recs, init);

  CHECK(res.alpha == doctest::Approx(4.0).epsilon(0.02));
  CHECK(res.nu == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(res.h_c - h_c) < 2e-3);
  CHECK(res.quality < collapse_quality(recs, h_c, 4.5, 1.0));
  CHECK(res.quality < collapse_quality(recs, h_c, 4.0, 1.2));
  CHECK(res.quality < collapse_quality(recs, 10 * h_c, 4.0, 1.0));
  CHECK(res.iterations > 0);
  CHECK(res.unc_alpha >= 0);
  CHECK(res.unc_nu >= 0);
  CHECK(res.unc_h_c >= 0);

  // Deterministic under a fixed seed.
  const CollapseResult again = collapse(recs, init);
  CHECK(again.h_c == res.h_c);
  CHECK(again.alpha == res.alpha);
  CHECK(again.nu == res.nu);
  CHECK(again.quality == res.quality);

  // More restarts can only improve the best quality.
  CollapseOptions one;
  one.restarts = 1;
  const CollapseResult single = collapse(recs, init, one);
  CHECK(res.quality <= single.quality + 1e-15);
}

TEST_CASE("collapse objective is a local minimum at the truth") {
  const auto recs = collapse_family(0.0, 4.0, 1.0, {10, 12, 14, 16});
  const double at_truth = collapse_quality(recs, 0.0, 4.0, 1.0);
  for (double da : {-0.5, 0.5})
    CHECK(at_truth < collapse_quality(recs, 0.0, 4.0 + da, 1.0));
  for (double dv : {-0.2, 0.2})
    CHECK(at_truth < collapse_quality(recs, 0.0, 4.0, 1.0 + dv));
  CHECK(at_truth < collapse_quality(recs, 0.01, 4.0, 1.0));
}

TEST_CASE("collapse rejects undersized or unbracketed input") {
  CHECK_THROWS_AS(collapse(collapse_family(0.0, 4.0, 1.0, {10, 12}), {}),
                  InvalidArguments);

  // 14 points per size is one short of the contract.
  CHECK_THROWS_AS(
      collapse(collapse_family(0.0, 4.0, 1.0, {10, 12, 14}, 14), {}),
      InvalidArguments);

  // Monotone data never brackets its maximum.
  std::vector<SweepRecord> mono;
  for (int L : {10, 12, 14})
    for (int j = 0; j < 20; ++j)
      mono.push_back(make_record(0.0, L, 0.1 + j * 0.01, 1.0 + j));
  CHECK_THROWS_AS(collapse(mono, {}), InvalidArguments);

  CollapseOptions zero;
  zero.restarts = 0;
  CHECK_THROWS_AS(collapse(collapse_family(0.0, 4.0, 1.0, {10, 12, 14}), {},
                           zero),
                  InvalidArguments);
}

TEST_CASE("collapse accepts plateau curves touching the window edge") {
  // Critical point at h = 0: every curve is flat into the left edge of a
  // positive log grid, argmax position is meaningless there, and the decay
  // side still pins the exponents.
  const double alpha = 3.3, nu = 1.0;
  std::vector<SweepRecord> recs;
  for (int L : {10, 12, 14}) {
    for (int j = 0; j <= 100; ++j) {
      const double h = std::pow(10.0, -5.0 + 0.05 * j);
      const double x = std::pow(L, 1.0 / nu) * h;
      recs.push_back(
          make_record(0.0, L, h, std::pow(L, alpha / nu) / (1.0 + x * x)));
    }
  }
  const CollapseResult res = collapse(recs, {0.0, 3.0, 1.3});
  CHECK(std::abs(res.h_c) < 1e-4);
  CHECK(res.alpha == doctest::Approx(alpha).epsilon(0.05));
  CHECK(res.nu == doctest::Approx(nu).epsilon(0.05));
}

TEST_CASE("collapse reports degeneracy when sizes can never overlap") {
  // Three bumps in h-windows separated by four decades each: no in-bounds
  // (h_c, alpha, nu) can bring three scaled points of every size into the
  // others' range.
  std::vector<SweepRecord> recs;
  const double offsets[3] = {0.0, 1e4, 1e8};
  const int sizes[3] = {10, 12, 14};
  for (int s = 0; s < 3; ++s)
    for (int j = 0; j < 21; ++j) {
      const double t = j / 20.0;
      const double f = 1.0 / (1.0 + 30.0 * (t - 0.5) * (t - 0.5));
      recs.push_back(make_record(0.0, sizes[s], offsets[s] + t, f));
    }
  CHECK_THROWS_AS(collapse(recs, {}), DegenerateCollapse);
}

TEST_CASE("find_peak brackets the half-filled peak") {
  ProbeParams fam{.L = 8, .N = 4, .eta = 0.0, .J = 1.0, .h = 0.0};
  ProbeWorkspace ws(fam);
  const PeakResult pk = find_peak(ws);

  CHECK(pk.h_max == doctest::Approx(0.34952).epsilon(0.01));
  CHECK(pk.qfi_max == doctest::Approx(29.6334).epsilon(3e-3));
  CHECK(pk.bracket_lo <= pk.h_max);
  CHECK(pk.bracket_hi >= pk.h_max);
  CHECK(pk.bracket_hi / pk.bracket_lo <= 1.0 + 3e-4);
  CHECK(pk.grid_resolution <= 3e-4);
  CHECK(pk.qfi_max >= ws.qfi_point(pk.bracket_lo).qfi);
  CHECK(pk.qfi_max >= ws.qfi_point(pk.bracket_hi).qfi);
  CHECK_FALSE(pk.at_edge);

  // Determinism.
  const PeakResult again = find_peak(fam);
  CHECK(again.h_max == pk.h_max);
  CHECK(again.qfi_max == pk.qfi_max);

  // Refinement invariance: a twice-finer coarse grid moves the located
  // peak by far less than the grid step.
  PeakSearchOptions fine;
  fine.per_decade = 50;
  const PeakResult pk2 = find_peak(ws, fine);
  CHECK(std::abs(pk2.h_max - pk.h_max) / pk.h_max < 1e-3);
}

TEST_CASE("find_peak treats a plateau running into the edge as a boundary") {
  // Long-range case: the curve is flat from the window edge to ~1e-3, so
  // the argmax position is numerical noise. By default that is a boundary
  // error; with allow_edge the plateau height is reported and flagged.
  ProbeParams fam{.L = 8, .N = 4, .eta = 1.0, .J = 1.0, .h = 0.0};
  ProbeWorkspace ws(fam);
  CHECK_THROWS_AS(find_peak(ws), PeakAtBoundary);

  PeakSearchOptions opts;
  opts.allow_edge = true;
  const PeakResult pk = find_peak(ws, opts);
  CHECK(pk.at_edge);
  CHECK(pk.h_max < 2e-3);
  CHECK(pk.qfi_max == doctest::Approx(ws.qfi_point(1e-5).qfi).epsilon(5e-3));
  CHECK(pk.qfi_max >= ws.qfi_point(pk.bracket_lo).qfi);
  CHECK(pk.qfi_max >= ws.qfi_point(pk.bracket_hi).qfi);
}

TEST_CASE("find_peak raises on a boundary maximum") {
  // Two sites: F_Q = 4/(4+h^2)^2 is monotone decreasing, so the maximum
  // sits on the lower window edge.
  ProbeParams fam{.L = 2, .N = 1, .eta = 0.0, .J = 1.0, .h = 0.0};
  CHECK_THROWS_AS(find_peak(fam), PeakAtBoundary);
}

TEST_CASE("find_peak validates its options") {
  ProbeParams fam{.L = 8, .N = 4, .eta = 0.0, .J = 1.0, .h = 0.0};
  ProbeWorkspace ws(fam);
  PeakSearchOptions o;
  o.h_lo = 0.0;
  CHECK_THROWS_AS(find_peak(ws, o), InvalidArguments);
  o = {};
  o.h_hi = o.h_lo;
  CHECK_THROWS_AS(find_peak(ws, o), InvalidArguments);
  o = {};
  o.per_decade = 1;
  CHECK_THROWS_AS(find_peak(ws, o), InvalidArguments);
  o = {};
  o.rel_width = 0.0;
  CHECK_THROWS_AS(find_peak(ws, o), InvalidArguments);
  o = {};
  o.edge_rel_tol = -1.0;
  CHECK_THROWS_AS(find_peak(ws, o), InvalidArguments);
}

TEST_CASE("scaling relation report") {
  const ScalingRelationReport r1 = check_scaling_relation(
      {4.00, 0.0}, {1.01, 0.0}, {4.20, 0.0});
  CHECK(r1.alpha_over_nu == doctest::Approx(3.9604).epsilon(1e-4));
  CHECK(r1.deviation == doctest::Approx(0.2396).epsilon(1e-3));
  CHECK(r1.pass);

  const ScalingRelationReport r2 = check_scaling_relation(
      {4.94, 0.0}, {1.39, 0.0}, {3.60, 0.0});
  CHECK(r2.deviation < 0.06);
  CHECK(r2.pass);

  const ScalingRelationReport r3 =
      check_scaling_relation({4.0, 0.0}, {1.0, 0.0}, {4.0, 0.0});
  CHECK(r3.deviation == 0.0);
  CHECK(r3.pass);

  // Short-range column: 3.97 vs 4.34 misses the 0.35 gate.
  const ScalingRelationReport r4 = check_scaling_relation(
      {3.97, 0.0}, {1.00, 0.0}, {4.34, 0.0});
  CHECK(r4.deviation == doctest::Approx(0.37).epsilon(1e-6));
  CHECK_FALSE(r4.pass);

  // First-order error propagation for alpha/nu.
  const ScalingRelationReport r5 = check_scaling_relation(
      {4.0, 0.1}, {1.0, 0.05}, {4.0, 0.02});
  CHECK(r5.alpha_over_nu_err ==
        doctest::Approx(std::sqrt(0.1 * 0.1 + 0.2 * 0.2)).epsilon(1e-12));
  CHECK(r5.beta_err == 0.02);

  CHECK_THROWS_AS(check_scaling_relation({4.0, 0.0}, {0.0, 0.0}, {4.0, 0.0}),
                  InvalidArguments);
}

TEST_CASE("normalized qfi exponent") {
  FitResult beta;
  beta.exponent = 4.20;
  beta.stderr_ = 0.1;
  FitResult z;
  z.exponent = 1.04;
  z.stderr_ = 0.2;
  const ExponentEstimate e = normalized_qfi_exponent(beta, z);
  CHECK(e.value == doctest::Approx(3.16).epsilon(1e-12));
  CHECK(e.stderr_ == doctest::Approx(std::hypot(0.1, 0.2)).epsilon(1e-12));

  z.exponent = 0.0;
  z.stderr_ = 0.0;
  CHECK(normalized_qfi_exponent(beta, z).value == beta.exponent);
}
