#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pipeline.hpp"

namespace stark {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool line = true;
  bool markers = false;
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  std::vector<PlotSeries> series;
};

// Self-contained 640x480 SVG: frame, decade ticks on log axes, fixed
// palette, legend from series labels. Points that cannot live on the
// requested axes (non-finite, or nonpositive on a log axis) are skipped.
std::string render_svg(const PlotSpec& spec);

// The pipeline's standard figures for one eta: QFI vs field per size,
// peak/small-field QFI vs size, collapsed master curves (when the collapse
// ran), gap vs size in the three phases. Files land in cfg.out; returns the
// file names written.
std::vector<std::string> write_eta_plots(const ExperimentConfig& cfg,
                                         const std::vector<SweepRecord>& rows,
                                         const EtaAnalysis& a);

} // namespace stark
