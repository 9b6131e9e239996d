#include "stark/criticality.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>

#include "stark/errors.hpp"

namespace stark {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LineFit {
  double slope = 0, intercept = 0, slope_err = 0, r2 = 0;
};

LineFit least_squares(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n)
    throw InvalidArguments("least_squares: need >= 2 paired points");
  double xm = 0, ym = 0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += x[i];
    ym += y[i];
  }
  xm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
    syy += (y[i] - ym) * (y[i] - ym);
  }
  if (sxx <= 0)
    throw InvalidArguments("least_squares: abscissa has no spread");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = ym - f.slope * xm;
  double ssr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  f.slope_err = n > 2 ? std::sqrt(ssr / (static_cast<double>(n) - 2) / sxx) : 0.0;
  f.r2 = syy > 0 ? 1.0 - ssr / syy : 1.0;
  return f;
}

} // namespace

PeakResult find_peak(ProbeWorkspace& ws, const PeakSearchOptions& opts) {
  if (!(opts.h_lo > 0) || !(opts.h_hi > opts.h_lo))
    throw InvalidArguments("find_peak: need 0 < h_lo < h_hi");
  if (opts.per_decade < 2)
    throw InvalidArguments("find_peak: per_decade must be >= 2");
  if (!(opts.rel_width > 0))
    throw InvalidArguments("find_peak: rel_width must be > 0");
  if (!(opts.edge_rel_tol >= 0))
    throw InvalidArguments("find_peak: edge_rel_tol must be >= 0");

  const double e_lo = std::log10(opts.h_lo);
  const double e_hi = std::log10(opts.h_hi);
  const int n =
      std::max(3, static_cast<int>(std::lround((e_hi - e_lo) * opts.per_decade)) + 1);

  double best_h = 0, best_q = -kInf;
  auto eval = [&](double e) {
    const double h = std::pow(10.0, e);
    const FisherPoint pt = ws.qfi_point(h);
    const double q = pt.valid ? pt.qfi : -kInf;
    if (q > best_q) {
      best_q = q;
      best_h = h;
    }
    return q;
  };

  std::vector<double> qs(n);
  int imax = 0;
  for (int j = 0; j < n; ++j) {
    const double e = e_lo + (e_hi - e_lo) * j / (n - 1);
    qs[j] = eval(e);
    if (qs[j] > qs[imax]) imax = j;
  }
  auto grid_h = [&](int j) {
    return std::pow(10.0, e_lo + (e_hi - e_lo) * j / (n - 1));
  };
  const bool edge_like =
      imax == 0 || imax == n - 1 ||
      qs[imax] <= qs[0] * (1.0 + opts.edge_rel_tol) ||
      qs[imax] <= qs[n - 1] * (1.0 + opts.edge_rel_tol);
  if (edge_like) {
    if (!opts.allow_edge)
      throw PeakAtBoundary("find_peak: maximum at the scan edge h=" +
                           std::to_string(grid_h(imax)));
    if (!std::isfinite(qs[imax]) || qs[imax] < 0)
      throw PeakAtBoundary("find_peak: no valid evaluation inside the window");
    PeakResult res;
    res.h_max = grid_h(imax);
    res.qfi_max = qs[imax];
    res.bracket_lo = grid_h(std::max(imax - 1, 0));
    res.bracket_hi = grid_h(std::min(imax + 1, n - 1));
    res.grid_resolution = (res.bracket_hi - res.bracket_lo) / res.h_max;
    res.at_edge = true;
    return res;
  }

  // Golden-section refinement on the log axis.
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = e_lo + (e_hi - e_lo) * (imax - 1) / (n - 1);
  double b = e_lo + (e_hi - e_lo) * (imax + 1) / (n - 1);
  const double stop = std::log10(1.0 + opts.rel_width);
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = eval(x1);
  double f2 = eval(x2);
  while (b - a > stop) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = eval(x2);
    }
  }

  if (!std::isfinite(best_q) || best_q < 0)
    throw PeakAtBoundary("find_peak: no valid evaluation inside the window");

  PeakResult res;
  res.h_max = best_h;
  res.qfi_max = best_q;
  res.bracket_lo = std::pow(10.0, a);
  res.bracket_hi = std::pow(10.0, b);
  res.grid_resolution = (res.bracket_hi - res.bracket_lo) / res.h_max;
  return res;
}

PeakResult find_peak(const ProbeParams& family, const PeakSearchOptions& opts) {
  ProbeWorkspace ws(family);
  return find_peak(ws, opts);
}

FitResult fit_alpha(const std::vector<SweepRecord>& records, double h_max) {
  if (records.empty())
    throw InvalidArguments("fit_alpha: no records");
  if (!(h_max > 0) || !std::isfinite(h_max))
    throw InvalidArguments("fit_alpha: h_max must be positive and finite");
  const double eta = records.front().eta;
  for (const auto& r : records)
    if (r.eta != eta)
      throw InvalidArguments("fit_alpha: records mix eta values");

  const double lo = 3.0 * h_max, hi = 1.0;
  std::set<int> sizes;
  std::map<double, std::map<int, double>> by_h; // h -> L -> qfi
  for (const auto& r : records) {
    if (!r.valid || r.qfi <= 0) continue;
    if (r.h < lo || r.h > hi) continue;
    sizes.insert(r.L);
    by_h[r.h][r.L] = r.qfi;
  }
  if (sizes.size() < 2)
    throw InsufficientSizes("fit_alpha: need >= 2 sizes inside the window, got " +
                            std::to_string(sizes.size()));

  const int l_top = *sizes.rbegin();
  std::vector<double> xs, ys, hs;
  for (const auto& [h, per_size] : by_h) {
    if (per_size.size() != sizes.size()) continue;
    bool independent = true;
    for (auto it = std::next(per_size.begin()); it != per_size.end(); ++it) {
      const double prev = std::prev(it)->second;
      if (std::abs(it->second - prev) > 0.03 * std::abs(prev)) {
        independent = false;
        break;
      }
    }
    if (!independent) continue;
    xs.push_back(std::log(h - h_max));
    ys.push_back(std::log(per_size.at(l_top)));
    hs.push_back(h);
  }
  if (xs.size() < 6)
    throw InsufficientWindow(
        "fit_alpha: only " + std::to_string(xs.size()) +
        " size-independent points in [3 h_max, 1]; need >= 6");

  const LineFit lf = least_squares(xs, ys);
  FitResult fr;
  fr.exponent = -lf.slope;
  fr.amplitude = std::exp(lf.intercept);
  fr.stderr_ = lf.slope_err;
  fr.r_squared = lf.r2;
  fr.window_lo = hs.front();
  fr.window_hi = hs.back();
  fr.points = static_cast<int>(xs.size());
  return fr;
}

namespace {

FitResult fit_loglog_sizes(const std::vector<SizeValue>& pts, double sign,
                           const char* who) {
  std::map<int, double> by_size;
  for (const auto& p : pts) {
    if (p.L < 2)
      throw InvalidArguments(std::string(who) + ": sizes must be >= 2");
    if (!(p.value > 0) || !std::isfinite(p.value))
      throw InvalidArguments(std::string(who) +
                             ": values must be positive and finite");
    by_size[p.L] = p.value;
  }
  if (by_size.size() < 4)
    throw InsufficientSizes(std::string(who) + ": need >= 4 distinct sizes, got " +
                            std::to_string(by_size.size()));
  std::vector<double> xs, ys;
  for (const auto& [L, v] : by_size) {
    xs.push_back(std::log(static_cast<double>(L)));
    ys.push_back(std::log(v));
  }
  const LineFit lf = least_squares(xs, ys);
  FitResult fr;
  fr.exponent = sign * lf.slope;
  fr.amplitude = std::exp(lf.intercept);
  fr.stderr_ = lf.slope_err;
  fr.r_squared = lf.r2;
  fr.window_lo = static_cast<double>(by_size.begin()->first);
  fr.window_hi = static_cast<double>(by_size.rbegin()->first);
  fr.points = static_cast<int>(by_size.size());
  return fr;
}

} // namespace

FitResult fit_beta(const std::vector<SizeValue>& qfi_by_size) {
  return fit_loglog_sizes(qfi_by_size, +1.0, "fit_beta");
}

FitResult fit_z(const std::vector<SizeValue>& gap_by_size, Phase) {
  return fit_loglog_sizes(gap_by_size, -1.0, "fit_z");
}

namespace {

struct CollapseData {
  struct Point {
    double h, y, sigma;
  };
  std::vector<int> sizes;
  std::vector<std::vector<Point>> per_size; // sorted by h
  double h_span = 0;
  double h_abs_max = 0;
};

CollapseData prepare_collapse(const std::vector<SweepRecord>& records,
                              double rel_sigma_floor) {
  std::map<int, std::vector<CollapseData::Point>> groups;
  for (const auto& r : records) {
    if (!r.valid || !(r.qfi > 0)) continue;
    const double sigma =
        std::max(r.richardson_err, rel_sigma_floor * r.qfi);
    groups[r.L].push_back({r.h, r.qfi, sigma});
  }
  if (groups.size() < 3)
    throw InvalidArguments("collapse: need >= 3 sizes with valid data, got " +
                           std::to_string(groups.size()));
  CollapseData data;
  double h_min = kInf, h_max = -kInf;
  for (auto& [L, pts] : groups) {
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
      return a.h < b.h || (a.h == b.h && a.y < b.y);
    });
    if (pts.size() < 15)
      throw InvalidArguments("collapse: size L=" + std::to_string(L) +
                             " has only " + std::to_string(pts.size()) +
                             " valid points; need >= 15");
    std::size_t iarg = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (pts[i].y > pts[iarg].y) iarg = i;
    // A maximum strictly rising into a window edge means the peak region was
    // cut off. A flat run into the edge (argmax position is noise on a
    // plateau) still carries usable scaling data and is kept.
    constexpr double kEdgeRise = 1e-5;
    if ((iarg == 0 && pts[0].y > pts[1].y * (1.0 + kEdgeRise)) ||
        (iarg + 1 == pts.size() &&
         pts[iarg].y > pts[iarg - 1].y * (1.0 + kEdgeRise)))
      throw InvalidArguments("collapse: size L=" + std::to_string(L) +
                             " has its maximum rising into the window edge");
    h_min = std::min(h_min, pts.front().h);
    h_max = std::max(h_max, pts.back().h);
    data.sizes.push_back(L);
    data.per_size.push_back(std::move(pts));
  }
  data.h_span = h_max - h_min;
  data.h_abs_max = std::max(std::abs(h_min), std::abs(h_max));
  return data;
}

double collapse_objective(const CollapseData& data, double h_c, double alpha,
                          double nu) {
  if (!(nu >= 0.05 && nu <= 20.0)) return kInf;
  if (!(alpha >= -5.0 && alpha <= 30.0)) return kInf;
  if (!(std::abs(h_c) <= 10.0 * std::max(data.h_abs_max, 1.0))) return kInf;

  struct Scaled {
    double x, y, sigma;
  };
  const std::size_t ns = data.sizes.size();
  std::vector<std::vector<Scaled>> scaled(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    const double Lf = static_cast<double>(data.sizes[s]);
    const double xf = std::pow(Lf, 1.0 / nu);
    const double yf = std::pow(Lf, -alpha / nu);
    if (!std::isfinite(xf) || !std::isfinite(yf) || yf == 0) return kInf;
    scaled[s].reserve(data.per_size[s].size());
    for (const auto& p : data.per_size[s])
      scaled[s].push_back({xf * (p.h - h_c), yf * p.y, yf * p.sigma});
  }

  // Master list per excluded size: all other sizes' points sorted by x.
  double total = 0;
  long count = 0;
  std::vector<Scaled> master;
  for (std::size_t s = 0; s < ns; ++s) {
    master.clear();
    for (std::size_t t = 0; t < ns; ++t) {
      if (t == s) continue;
      master.insert(master.end(), scaled[t].begin(), scaled[t].end());
    }
    std::sort(master.begin(), master.end(), [](const auto& a, const auto& b) {
      return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    long mine = 0;
    for (const auto& p : scaled[s]) {
      if (p.x < master.front().x || p.x > master.back().x) continue;
      auto it = std::lower_bound(
          master.begin(), master.end(), p.x,
          [](const Scaled& m, double x) { return m.x < x; });
      const Scaled& hi = *it;
      const Scaled& lo = it == master.begin() ? *it : *std::prev(it);
      double yhat, vhat;
      const double dx = hi.x - lo.x;
      if (dx > 0) {
        const double w = (p.x - lo.x) / dx;
        yhat = lo.y + w * (hi.y - lo.y);
        vhat = (1 - w) * (1 - w) * lo.sigma * lo.sigma +
               w * w * hi.sigma * hi.sigma;
      } else {
        yhat = hi.y;
        vhat = hi.sigma * hi.sigma;
      }
      const double d = p.y - yhat;
      total += d * d / (p.sigma * p.sigma + vhat);
      ++mine;
    }
    if (mine < 3) return kInf;
    count += mine;
  }
  return total / static_cast<double>(count);
}

struct NelderMead {
  long iterations = 0;

  // Deterministic Nelder-Mead on 3 parameters.
  std::pair<Eigen::Vector3d, double> minimize(
      const std::function<double(const Eigen::Vector3d&)>& f,
      const Eigen::Vector3d& start, const Eigen::Vector3d& steps,
      int max_iterations) {
    std::array<Eigen::Vector3d, 4> xs;
    std::array<double, 4> fs;
    xs[0] = start;
    for (int i = 0; i < 3; ++i) {
      xs[i + 1] = start;
      xs[i + 1][i] += steps[i];
    }
    for (int i = 0; i < 4; ++i) fs[i] = f(xs[i]);

    auto order = [&] {
      std::array<int, 4> idx{0, 1, 2, 3};
      std::sort(idx.begin(), idx.end(),
                [&](int a, int b) { return fs[a] < fs[b]; });
      std::array<Eigen::Vector3d, 4> x2;
      std::array<double, 4> f2;
      for (int i = 0; i < 4; ++i) {
        x2[i] = xs[idx[i]];
        f2[i] = fs[idx[i]];
      }
      xs = x2;
      fs = f2;
    };

    for (int it = 0; it < max_iterations; ++it) {
      ++iterations;
      order();
      if (std::isfinite(fs[3]) &&
          fs[3] - fs[0] <= 1e-12 * (1.0 + std::abs(fs[0])))
        break;
      const Eigen::Vector3d centroid = (xs[0] + xs[1] + xs[2]) / 3.0;
      const Eigen::Vector3d refl = centroid + (centroid - xs[3]);
      const double fr = f(refl);
      if (fr < fs[0]) {
        const Eigen::Vector3d exp_ = centroid + 2.0 * (centroid - xs[3]);
        const double fe = f(exp_);
        if (fe < fr) {
          xs[3] = exp_;
          fs[3] = fe;
        } else {
          xs[3] = refl;
          fs[3] = fr;
        }
      } else if (fr < fs[2]) {
        xs[3] = refl;
        fs[3] = fr;
      } else {
        const bool outside = fr < fs[3];
        Eigen::Vector3d contr;
        if (outside)
          contr = centroid + 0.5 * (refl - centroid);
        else
          contr = centroid - 0.5 * (centroid - xs[3]);
        const double fc = f(contr);
        if (fc < std::min(fr, fs[3])) {
          xs[3] = contr;
          fs[3] = fc;
        } else {
          for (int i = 1; i < 4; ++i) {
            xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
            fs[i] = f(xs[i]);
          }
        }
      }
    }
    order();
    return {xs[0], fs[0]};
  }
};

} // namespace

double collapse_quality(const std::vector<SweepRecord>& records, double h_c,
                        double alpha, double nu, double rel_sigma_floor) {
  const CollapseData data = prepare_collapse(records, rel_sigma_floor);
  return collapse_objective(data, h_c, alpha, nu);
}

CollapseResult collapse(const std::vector<SweepRecord>& records,
                        const CollapseInit& init, const CollapseOptions& opts) {
  if (opts.restarts < 1)
    throw InvalidArguments("collapse: restarts must be >= 1");
  const CollapseData data = prepare_collapse(records, opts.rel_sigma_floor);

  // Characteristic h scale for the simplex and the restart spread: distance
  // of the data from the initial critical point estimate.
  std::vector<double> dists;
  for (const auto& pts : data.per_size)
    for (const auto& p : pts) dists.push_back(std::abs(p.h - init.h_c));
  std::sort(dists.begin(), dists.end());
  const double h_med = dists[dists.size() / 2];
  const double dhc =
      std::max({0.5 * std::abs(init.h_c), 0.05 * h_med, 1e-12});

  auto objective = [&](const Eigen::Vector3d& t) {
    return collapse_objective(data, t[0], t[1], t[2]);
  };

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  CollapseResult best;
  best.quality = kInf;
  long total_iters = 0;
  std::vector<Eigen::Vector3d> finals;
  std::vector<double> final_q;
  for (int r = 0; r < opts.restarts; ++r) {
    Eigen::Vector3d start(init.h_c, init.alpha, init.nu);
    if (r > 0) {
      start[0] += 2.0 * dhc * u(rng);
      start[1] += 0.5 * u(rng);
      start[2] += 0.2 * u(rng);
    }
    NelderMead nm;
    const auto [x, q] =
        nm.minimize(objective, start, Eigen::Vector3d(dhc, 0.3, 0.12),
                    opts.max_iterations);
    total_iters += nm.iterations;
    finals.push_back(x);
    final_q.push_back(q);
    if (q < best.quality) {
      best.quality = q;
      best.h_c = x[0];
      best.alpha = x[1];
      best.nu = x[2];
    }
  }
  best.iterations = total_iters;
  if (!std::isfinite(best.quality))
    throw DegenerateCollapse(
        "collapse: no overlap between sizes for any restart");

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(kInf);
  Eigen::Vector3d hi = Eigen::Vector3d::Constant(-kInf);
  for (std::size_t i = 0; i < finals.size(); ++i) {
    if (final_q[i] > best.quality * 1.25 + 1e-12) continue;
    lo = lo.cwiseMin(finals[i]);
    hi = hi.cwiseMax(finals[i]);
  }
  best.unc_h_c = 0.5 * (hi[0] - lo[0]);
  best.unc_alpha = 0.5 * (hi[1] - lo[1]);
  best.unc_nu = 0.5 * (hi[2] - lo[2]);
  return best;
}

ScalingRelationReport check_scaling_relation(const ExponentEstimate& alpha,
                                             const ExponentEstimate& nu,
                                             const ExponentEstimate& beta,
                                             double tolerance) {
  if (nu.value == 0)
    throw InvalidArguments("check_scaling_relation: nu must be nonzero");
  ScalingRelationReport rep;
  rep.alpha_over_nu = alpha.value / nu.value;
  rep.alpha_over_nu_err =
      std::sqrt(std::pow(alpha.stderr_ / nu.value, 2) +
                std::pow(alpha.value * nu.stderr_ / (nu.value * nu.value), 2));
  rep.beta = beta.value;
  rep.beta_err = beta.stderr_;
  rep.deviation = std::abs(rep.alpha_over_nu - rep.beta);
  rep.tolerance = tolerance;
  rep.pass = rep.deviation <= tolerance;
  return rep;
}

ExponentEstimate normalized_qfi_exponent(const FitResult& beta,
                                         const FitResult& z) {
  ExponentEstimate e;
  e.value = beta.exponent - z.exponent;
  e.stderr_ = std::hypot(beta.stderr_, z.stderr_);
  return e;
}

} // namespace stark
