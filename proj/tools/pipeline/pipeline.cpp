#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>

#include "report.hpp"
#include "stark/errors.hpp"
#include "stark/numformat.hpp"
#include "svg.hpp"

namespace stark {

namespace fs = std::filesystem;

namespace {

constexpr double kEdgeRelTol = 1e-5;

// valid rows of one (eta, L), ascending h
using Curve = std::vector<SweepRecord>;

std::map<double, std::map<int, Curve>> group_curves(
    const std::vector<SweepRecord>& rows) {
  std::map<double, std::map<int, Curve>> out;
  for (const SweepRecord& r : rows) {
    if (!r.valid || !std::isfinite(r.qfi)) continue;
    out[r.eta][r.L].push_back(r);
  }
  for (auto& [eta, curves] : out)
    for (auto& [L, curve] : curves)
      std::sort(curve.begin(), curve.end(),
                [](const SweepRecord& a, const SweepRecord& b) { return a.h < b.h; });
  return out;
}

const SweepRecord* row_at(const Curve& curve, double h) {
  for (const SweepRecord& r : curve)
    if (r.h == h) return &r;
  return nullptr;
}

std::string stage_error(const std::string& stage, const std::exception& e) {
  return stage + ": " + e.what();
}

} // namespace

std::vector<double> common_fields(const std::vector<SweepRecord>& eta_rows) {
  std::map<int, std::set<double>> per_size;
  for (const SweepRecord& r : eta_rows)
    if (r.valid && std::isfinite(r.qfi)) per_size[r.L].insert(r.h);
  std::vector<double> out;
  bool first = true;
  for (const auto& [L, mine] : per_size) {
    if (first) {
      out.assign(mine.begin(), mine.end());
      first = false;
      continue;
    }
    std::vector<double> kept;
    std::set_intersection(out.begin(), out.end(), mine.begin(), mine.end(),
                          std::back_inserter(kept));
    out = std::move(kept);
  }
  return out;
}

PeakResult grid_peak(const std::vector<SweepRecord>& curve) {
  std::vector<const SweepRecord*> pts;
  for (const SweepRecord& r : curve)
    if (r.valid && std::isfinite(r.qfi)) pts.push_back(&r);
  if (pts.size() < 3)
    throw InsufficientWindow("grid_peak: need >= 3 valid points, got " +
                             std::to_string(pts.size()));
  std::sort(pts.begin(), pts.end(),
            [](const SweepRecord* a, const SweepRecord* b) { return a->h < b->h; });

  std::size_t imax = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i]->qfi > pts[imax]->qfi) imax = i;

  PeakResult peak;
  peak.h_max = pts[imax]->h;
  peak.qfi_max = pts[imax]->qfi;
  peak.bracket_lo = pts[imax > 0 ? imax - 1 : 0]->h;
  peak.bracket_hi = pts[std::min(imax + 1, pts.size() - 1)]->h;
  peak.grid_resolution = (peak.bracket_hi - peak.bracket_lo) / peak.h_max;
  peak.at_edge = pts[imax]->qfi <= pts.front()->qfi * (1.0 + kEdgeRelTol) ||
                 pts[imax]->qfi <= pts.back()->qfi * (1.0 + kEdgeRelTol);
  return peak;
}

std::vector<EtaAnalysis> analyze(const ExperimentConfig& cfg,
                                 const std::vector<SweepRecord>& rows) {
  std::vector<EtaAnalysis> out;
  const auto grouped = group_curves(rows);
  std::vector<double> etas = cfg.etas;
  std::sort(etas.begin(), etas.end());

  for (double eta : etas) {
    EtaAnalysis a;
    a.eta = eta;
    const auto git = grouped.find(eta);
    if (git == grouped.end()) {
      a.errors.push_back("no valid rows for this eta");
      out.push_back(std::move(a));
      continue;
    }
    const auto& curves = git->second;

    std::vector<SweepRecord> eta_rows;
    for (const SweepRecord& r : rows)
      if (r.eta == eta) eta_rows.push_back(r);

    for (const auto& [L, curve] : curves) {
      try {
        a.peaks.push_back({eta, L, curve.front().N, grid_peak(curve)});
      } catch (const Error& e) {
        a.errors.push_back(stage_error("peak L=" + std::to_string(L), e));
      }
    }

    try {
      std::vector<SizeValue> qfi_at_peak;
      for (const PeakRow& p : a.peaks)
        qfi_at_peak.push_back({p.L, p.peak.qfi_max});
      a.beta_peak = fit_beta(qfi_at_peak);
    } catch (const Error& e) {
      a.errors.push_back(stage_error("beta(peak)", e));
    }

    // Fields every size has measured, for the fixed-field stages.
    const std::vector<double> common = common_fields(eta_rows);

    if (common.empty()) {
      a.errors.push_back("fixed-field stages: no field measured for every size");
    } else {
      const double target = 1e-4;
      a.smallfield_h = common.front();
      for (double h : common)
        if (std::abs(std::log(h / target)) <
            std::abs(std::log(a.smallfield_h / target)))
          a.smallfield_h = h;
      a.localized_h = common.back();

      try {
        std::vector<SizeValue> qfi_small;
        for (const auto& [L, curve] : curves)
          qfi_small.push_back({L, row_at(curve, a.smallfield_h)->qfi});
        a.beta_smallfield = fit_beta(qfi_small);
      } catch (const Error& e) {
        a.errors.push_back(stage_error("beta(small field)", e));
      }

      try {
        std::vector<SizeValue> gaps;
        for (const auto& [L, curve] : curves)
          gaps.push_back({L, row_at(curve, a.smallfield_h)->gap});
        a.z_extended = fit_z(gaps, Phase::extended);
      } catch (const Error& e) {
        a.errors.push_back(stage_error("z(extended)", e));
      }

      try {
        std::vector<SizeValue> gaps;
        for (const auto& [L, curve] : curves)
          gaps.push_back({L, row_at(curve, a.localized_h)->gap});
        a.z_localized = fit_z(gaps, Phase::localized);
      } catch (const Error& e) {
        a.errors.push_back(stage_error("z(localized)", e));
      }
    }

    try {
      std::vector<SizeValue> gaps;
      for (const PeakRow& p : a.peaks) {
        const SweepRecord* r = row_at(curves.at(p.L), p.peak.h_max);
        if (r) gaps.push_back({p.L, r->gap});
      }
      a.z_transition = fit_z(gaps, Phase::transition);
    } catch (const Error& e) {
      a.errors.push_back(stage_error("z(transition)", e));
    }

    try {
      CollapseInit init;
      init.h_c = a.peaks.empty() ? cfg.grid.start : a.peaks.back().peak.h_max;
      CollapseOptions opts;
      opts.seed = cfg.seed;
      a.collapse_fit = collapse(eta_rows, init, opts);
    } catch (const Error& e) {
      a.errors.push_back(stage_error("collapse", e));
    }

    a.alpha_anchor = cfg.grid.start;
    if (a.collapse_fit)
      a.alpha_anchor = std::max(a.collapse_fit->h_c, cfg.grid.start);
    try {
      a.alpha_fit = fit_alpha(eta_rows, a.alpha_anchor);
    } catch (const Error& e) {
      a.errors.push_back(stage_error("alpha", e));
    }

    if (a.collapse_fit && a.beta_peak) {
      try {
        a.scaling_relation = check_scaling_relation(
            {a.collapse_fit->alpha, a.collapse_fit->unc_alpha},
            {a.collapse_fit->nu, a.collapse_fit->unc_nu},
            {a.beta_peak->exponent, a.beta_peak->stderr_});
      } catch (const Error& e) {
        a.errors.push_back(stage_error("scaling relation", e));
      }
    } else {
      a.errors.push_back("scaling relation: skipped, needs collapse and beta");
    }

    if (a.beta_peak && a.z_transition)
      a.normalized_exponent = normalized_qfi_exponent(*a.beta_peak, *a.z_transition);

    out.push_back(std::move(a));
  }
  return out;
}

std::vector<SweepRecord> sweep_with_cache(const ExperimentConfig& cfg,
                                          const SweepProgressFn& progress) {
  cfg.validate();
  fs::create_directories(cfg.out);
  const std::string csv_path = (fs::path(cfg.out) / "sweep.csv").string();
  const std::string meta_path = (fs::path(cfg.out) / "sweep.meta").string();

  std::vector<SweepRecord> reuse;
  if (fs::exists(csv_path) && fs::exists(meta_path)) {
    try {
      const ExperimentConfig old = load_config(meta_path);
      if (old.seed == cfg.seed && old.tol == cfg.tol &&
          old.delta_h == cfg.delta_h) {
        reuse = read_sweep_csv_file(csv_path);
      }
    } catch (const Error& e) {
      std::cerr << "warning: ignoring sweep cache: " << e.what() << "\n";
    }
  }

  std::vector<SweepRecord> rows = run_sweep(cfg, reuse, progress);

  write_sweep_csv_file(csv_path, rows);
  std::ofstream meta(meta_path, std::ios::binary);
  if (!meta) throw Error("cannot open '" + meta_path + "' for writing");
  for (const auto& [key, value] : cfg.items())
    meta << key << " = " << value << "\n";
  meta.flush();
  if (!meta) throw Error("write to '" + meta_path + "' failed");
  return rows;
}

PipelineResult run_pipeline(const ExperimentConfig& cfg,
                            const SweepProgressFn& progress) {
  PipelineResult result;
  result.config = cfg;
  result.rows = sweep_with_cache(cfg, progress);
  for (const SweepRecord& r : result.rows)
    if (!r.valid) ++result.invalid_rows;
  result.outputs.push_back("sweep.csv");
  result.outputs.push_back("sweep.meta");

  result.etas = analyze(cfg, result.rows);

  std::vector<PeakRow> all_peaks;
  for (const EtaAnalysis& a : result.etas)
    all_peaks.insert(all_peaks.end(), a.peaks.begin(), a.peaks.end());
  write_peaks_csv_file((fs::path(cfg.out) / "peaks.csv").string(), all_peaks);
  result.outputs.push_back("peaks.csv");

  for (const EtaAnalysis& a : result.etas)
    for (const std::string& name : write_eta_plots(cfg, result.rows, a))
      result.outputs.push_back(name);

  const std::string report_path = (fs::path(cfg.out) / "report.json").string();
  result.outputs.push_back("report.json");
  std::ofstream rep(report_path, std::ios::binary);
  if (!rep) throw Error("cannot open '" + report_path + "' for writing");
  rep << render_report(result);
  rep.flush();
  if (!rep) throw Error("write to '" + report_path + "' failed");
  return result;
}

} // namespace stark
