#include "svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include "stark/errors.hpp"
#include "stark/numformat.hpp"

namespace stark {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 72, kRight = 24, kTop = 36, kBottom = 48;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

// pixel coordinates at fixed precision keep the output small and stable
std::string px(double v) {
  char buf[32];
  const auto res =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

struct Axis {
  double lo = 0, hi = 1; // transformed coordinates
  bool log = false;

  double transform(double v) const { return log ? std::log10(v) : v; }
  bool admits(double v) const {
    return std::isfinite(v) && (!log || v > 0);
  }
  double to_px(double v, double p0, double p1) const {
    return p0 + (transform(v) - lo) / (hi - lo) * (p1 - p0);
  }
};

Axis fit_axis(const std::vector<PlotSeries>& series, bool log, bool is_x) {
  Axis ax;
  ax.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const PlotSeries& s : series) {
    for (const auto& [x, y] : s.points) {
      const double v = is_x ? x : y;
      const double w = is_x ? y : x;
      if (!ax.admits(v) || !std::isfinite(w)) continue;
      lo = std::min(lo, ax.transform(v));
      hi = std::max(hi, ax.transform(v));
    }
  }
  if (!(lo <= hi)) {
    lo = log ? 0 : 0;
    hi = log ? 1 : 1;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.04 * (hi - lo);
  ax.lo = lo - pad;
  ax.hi = hi + pad;
  return ax;
}

std::vector<double> axis_ticks(const Axis& ax) {
  std::vector<double> ticks; // transformed positions
  if (ax.log) {
    for (double d = std::ceil(ax.lo); d <= std::floor(ax.hi) + 1e-9; d += 1.0)
      ticks.push_back(d);
    if (ticks.size() > 12) {
      std::vector<double> thin;
      const std::size_t step = (ticks.size() + 11) / 12;
      for (std::size_t i = 0; i < ticks.size(); i += step)
        thin.push_back(ticks[i]);
      ticks = thin;
    }
    return ticks;
  }
  const double span = ax.hi - ax.lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag * (1 + 1e-12)) {
      step = m * mag;
      break;
    }
  for (double t = std::ceil(ax.lo / step) * step; t <= ax.hi + 1e-12 * span;
       t += step)
    ticks.push_back(t);
  return ticks;
}

std::string tick_label(const Axis& ax, double t) {
  if (ax.log) {
    return format_double(std::pow(10.0, t));
  }
  // snap near-zero accumulation noise
  if (std::abs(t) < 1e-12) t = 0;
  return format_double(t);
}

} // namespace

std::string render_svg(const PlotSpec& spec) {
  const Axis xa = fit_axis(spec.series, spec.logx, true);
  const Axis ya = fit_axis(spec.series, spec.logy, false);
  const double x0 = kLeft, x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom, y1 = kTop; // y grows downward

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"480\" viewBox=\"0 0 640 480\">\n";
  svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  svg += "<text x=\"" + px(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">" +
         escape(spec.title) + "</text>\n";

  for (double t : axis_ticks(xa)) {
    const double p = x0 + (t - xa.lo) / (xa.hi - xa.lo) * (x1 - x0);
    if (p < x0 - 0.5 || p > x1 + 0.5) continue;
    svg += "<line x1=\"" + px(p) + "\" y1=\"" + px(y0) + "\" x2=\"" + px(p) +
           "\" y2=\"" + px(y1) + "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + px(p) + "\" y=\"" + px(y0 + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"10\">" +
           escape(tick_label(xa, t)) + "</text>\n";
  }
  for (double t : axis_ticks(ya)) {
    const double p = y0 + (t - ya.lo) / (ya.hi - ya.lo) * (y1 - y0);
    if (p > y0 + 0.5 || p < y1 - 0.5) continue;
    svg += "<line x1=\"" + px(x0) + "\" y1=\"" + px(p) + "\" x2=\"" + px(x1) +
           "\" y2=\"" + px(p) + "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + px(x0 - 6) + "\" y=\"" + px(p + 3) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"10\">" +
           escape(tick_label(ya, t)) + "</text>\n";
  }

  svg += "<rect x=\"" + px(x0) + "\" y=\"" + px(y1) + "\" width=\"" +
         px(x1 - x0) + "\" height=\"" + px(y0 - y1) +
         "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + px((x0 + x1) / 2) + "\" y=\"" + px(kHeight - 10) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">" +
         escape(spec.xlabel) + "</text>\n";
  svg += "<text x=\"16\" y=\"" + px((y0 + y1) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 16 " + px((y0 + y1) / 2) +
         ")\">" + escape(spec.ylabel) + "</text>\n";

  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const PlotSeries& s = spec.series[si];
    const char* color = kPalette[si % kPaletteSize];
    std::string pts;
    std::vector<std::pair<double, double>> kept;
    for (const auto& [x, y] : s.points) {
      if (!xa.admits(x) || !ya.admits(y)) continue;
      kept.emplace_back(xa.to_px(x, x0, x1), ya.to_px(y, y0, y1));
    }
    if (s.line && kept.size() > 1) {
      for (const auto& [X, Y] : kept) {
        if (!pts.empty()) pts += ' ';
        pts += px(X) + "," + px(Y);
      }
      svg += "<polyline fill=\"none\" stroke=\"";
      svg += color;
      svg += "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    }
    if (s.markers || kept.size() <= 1) {
      for (const auto& [X, Y] : kept) {
        svg += "<circle cx=\"" + px(X) + "\" cy=\"" + px(Y) +
               "\" r=\"3\" fill=\"";
        svg += color;
        svg += "\"/>\n";
      }
    }
    const double ly = y1 + 14 + 14 * static_cast<double>(si);
    svg += "<line x1=\"" + px(x1 - 120) + "\" y1=\"" + px(ly - 4) +
           "\" x2=\"" + px(x1 - 100) + "\" y2=\"" + px(ly - 4) +
           "\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + px(x1 - 94) + "\" y=\"" + px(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" +
           escape(s.label) + "</text>\n";
  }

  svg += "</svg>\n";
  return svg;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

} // namespace

std::vector<std::string> write_eta_plots(const ExperimentConfig& cfg,
                                         const std::vector<SweepRecord>& rows,
                                         const EtaAnalysis& a) {
  namespace fs = std::filesystem;
  const std::string tag = "eta" + format_double(a.eta);
  std::vector<std::string> written;

  std::map<int, PlotSeries> by_size;
  for (const SweepRecord& r : rows) {
    if (r.eta != a.eta || !r.valid || !std::isfinite(r.qfi)) continue;
    PlotSeries& s = by_size[r.L];
    s.label = "L=" + std::to_string(r.L);
    s.points.emplace_back(r.h, r.qfi);
  }

  {
    PlotSpec spec;
    spec.title = "QFI vs field, " + tag;
    spec.xlabel = "h/J";
    spec.ylabel = "F_Q";
    spec.logx = spec.logy = true;
    for (auto& [L, s] : by_size) {
      std::sort(s.points.begin(), s.points.end());
      spec.series.push_back(s);
    }
    const std::string name = "qfi_vs_h_" + tag + ".svg";
    write_text(fs::path(cfg.out) / name, render_svg(spec));
    written.push_back(name);
  }

  if (!a.peaks.empty()) {
    PlotSpec spec;
    spec.title = "QFI growth with size, " + tag;
    spec.xlabel = "L";
    spec.ylabel = "F_Q";
    spec.logx = spec.logy = true;
    PlotSeries at_peak;
    at_peak.label = "at h_max";
    at_peak.markers = true;
    for (const PeakRow& p : a.peaks)
      at_peak.points.emplace_back(p.L, p.peak.qfi_max);
    spec.series.push_back(at_peak);
    PlotSeries small;
    small.label = "at h=" + format_double(a.smallfield_h);
    small.markers = true;
    for (const SweepRecord& r : rows)
      if (r.eta == a.eta && r.valid && r.h == a.smallfield_h)
        small.points.emplace_back(r.L, r.qfi);
    if (!small.points.empty()) spec.series.push_back(small);
    const std::string name = "qfi_vs_L_" + tag + ".svg";
    write_text(fs::path(cfg.out) / name, render_svg(spec));
    written.push_back(name);
  }

  if (a.collapse_fit) {
    const CollapseResult& c = *a.collapse_fit;
    PlotSpec spec;
    spec.title = "Scaling collapse, " + tag;
    spec.xlabel = "L^{1/nu} (h - h_c)";
    spec.ylabel = "F_Q / L^{alpha/nu}";
    for (const auto& [L, s] : by_size) {
      PlotSeries scaled;
      scaled.label = s.label;
      for (const auto& [h, q] : s.points)
        scaled.points.emplace_back(std::pow(L, 1.0 / c.nu) * (h - c.h_c),
                                   q / std::pow(L, c.alpha / c.nu));
      std::sort(scaled.points.begin(), scaled.points.end());
      spec.series.push_back(scaled);
    }
    const std::string name = "collapse_" + tag + ".svg";
    write_text(fs::path(cfg.out) / name, render_svg(spec));
    written.push_back(name);
  }

  {
    PlotSpec spec;
    spec.title = "Gap vs size, " + tag;
    spec.xlabel = "L";
    spec.ylabel = "gap";
    spec.logx = spec.logy = true;
    PlotSeries ext, tra, loc;
    ext.label = "h=" + format_double(a.smallfield_h);
    tra.label = "at h_max";
    loc.label = "h=" + format_double(a.localized_h);
    ext.markers = tra.markers = loc.markers = true;
    for (const SweepRecord& r : rows) {
      if (r.eta != a.eta || !r.valid) continue;
      if (r.h == a.smallfield_h) ext.points.emplace_back(r.L, r.gap);
      if (r.h == a.localized_h) loc.points.emplace_back(r.L, r.gap);
    }
    for (const PeakRow& p : a.peaks)
      for (const SweepRecord& r : rows)
        if (r.eta == a.eta && r.L == p.L && r.h == p.peak.h_max && r.valid)
          tra.points.emplace_back(r.L, r.gap);
    for (PlotSeries* s : {&ext, &tra, &loc})
      if (!s->points.empty()) spec.series.push_back(*s);
    if (!spec.series.empty()) {
      const std::string name = "gap_vs_L_" + tag + ".svg";
      write_text(fs::path(cfg.out) / name, render_svg(spec));
      written.push_back(name);
    }
  }

  return written;
}

} // namespace stark
