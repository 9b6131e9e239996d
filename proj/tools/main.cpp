#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pipeline/pipeline.hpp"
#include "pipeline/report.hpp"
#include "stark/basis.hpp"
#include "stark/eigensolve.hpp"
#include "stark/errors.hpp"
#include "stark/hamiltonian.hpp"
#include "stark/metrology.hpp"
#include "stark/numformat.hpp"
#include "stark/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace stark;

namespace {

struct CommonArgs {
  std::string config_path;
  // schema overrides in flag order, applied on top of the config file
  std::vector<std::pair<std::string, std::string>> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Key = value config file")
      ->check(CLI::ExistingFile);
  const auto push = [&args](const char* key) {
    return [&args, key](const std::string& value) {
      args.overrides.emplace_back(key, value);
    };
  };
  cmd->add_option_function<std::string>(
      "--eta", push("eta"), "Interaction ranges, comma separated; inf allowed");
  cmd->add_option_function<std::string>("--sizes", push("sizes"),
                                        "Chain lengths, comma separated");
  cmd->add_option_function<std::string>(
      "--filling", push("filling"), "Excitations per site, e.g. 1/2 or 0.25");
  cmd->add_option_function<std::string>(
      "--h-grid", push("h_grid"),
      "Field grid start:stop:per_decade[:densify]");
  cmd->add_option_function<std::string>("--workers", push("workers"),
                                        "Worker thread count");
  cmd->add_option_function<std::string>("--seed", push("seed"),
                                        "Deterministic run seed");
  cmd->add_option_function<std::string>("--tol", push("tol"),
                                        "Eigensolver residual tolerance");
  cmd->add_option_function<std::string>(
      "--delta-h", push("delta_h"),
      "Fixed Fisher stencil step; 0 = adaptive per point");
  cmd->add_option_function<std::string>(
      "--timing", push("timing"), "Record per-point wall time, on/off");
  cmd->add_option_function<std::string>("--out", push("out"),
                                        "Output directory");
  cmd->add_option_function<std::string>("--format", push("format"),
                                        "Stdout format: csv (plain) or json");
}

ExperimentConfig make_config(const CommonArgs& args) {
  ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = load_config(args.config_path);
  for (const auto& [key, value] : args.overrides)
    apply_override(cfg, key, value);
  cfg.validate();
  return cfg;
}

SweepProgressFn stderr_progress() {
  return [](std::size_t done, std::size_t total) {
    if (done % 25 == 0 || done == total)
      std::cerr << "\r" << done << "/" << total << " points" << std::flush;
    if (done == total) std::cerr << "\n";
  };
}

int failures_to_exit_code(std::size_t failed, std::size_t total) {
  if (failed == 0) return 0;
  return failed >= total ? 3 : 2;
}

std::vector<SweepRecord> load_rows(const ExperimentConfig& cfg) {
  const fs::path path = fs::path(cfg.out) / "sweep.csv";
  if (!fs::exists(path))
    throw Error("no sweep data at '" + path.string() +
                "'; run the sweep subcommand first");
  return read_sweep_csv_file(path.string());
}

std::vector<SweepRecord> eta_subset(const std::vector<SweepRecord>& rows,
                                    double eta) {
  std::vector<SweepRecord> out;
  for (const SweepRecord& r : rows)
    if (r.eta == eta) out.push_back(r);
  return out;
}

std::vector<double> sorted_etas(const ExperimentConfig& cfg) {
  std::vector<double> etas = cfg.etas;
  std::sort(etas.begin(), etas.end());
  return etas;
}

std::vector<double> sorted_data_etas(const std::vector<SweepRecord>& rows) {
  std::vector<double> etas;
  for (const SweepRecord& r : rows) etas.push_back(r.eta);
  std::sort(etas.begin(), etas.end());
  etas.erase(std::unique(etas.begin(), etas.end()), etas.end());
  return etas;
}

// True when the user picked ranges via --eta or an eta entry in the config
// file. Analysis subcommands without such a pick cover every range present
// in the sweep data instead of the built-in default.
bool etas_were_selected(const CommonArgs& args) {
  for (const auto& [key, value] : args.overrides)
    if (key == std::string_view("eta")) return true;
  if (args.config_path.empty()) return false;
  std::ifstream in(args.config_path);
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t\r"));
    key.erase(key.find_last_not_of(" \t\r") + 1);
    if (key == "eta") return true;
  }
  return false;
}

double nearest_field(const std::vector<double>& fields, double target) {
  double best = fields.front();
  for (double h : fields)
    if (std::abs(std::log(h / target)) < std::abs(std::log(best / target)))
      best = h;
  return best;
}

void emit(const ExperimentConfig& cfg, const ordered_json& machine,
          const std::string& plain) {
  if (cfg.format == "json")
    std::cout << machine.dump(2) << "\n";
  else
    std::cout << plain;
}

std::string fit_line(const FitResult& fit) {
  return "exponent=" + format_double(fit.exponent) +
         " stderr=" + format_double(fit.stderr_) +
         " r2=" + format_double(fit.r_squared) +
         " points=" + std::to_string(fit.points);
}

int cmd_sweep(const CommonArgs& args) {
  const ExperimentConfig cfg = make_config(args);
  const std::vector<SweepRecord> rows = sweep_with_cache(cfg, stderr_progress());
  std::size_t invalid = 0;
  for (const SweepRecord& r : rows)
    if (!r.valid) ++invalid;

  emit(cfg,
       ordered_json{{"rows", rows.size()},
                    {"valid", rows.size() - invalid},
                    {"invalid", invalid},
                    {"out", cfg.out}},
       "rows=" + std::to_string(rows.size()) + " valid=" +
           std::to_string(rows.size() - invalid) + " invalid=" +
           std::to_string(invalid) + " -> " + cfg.out + "/sweep.csv\n");
  return failures_to_exit_code(invalid, rows.size());
}

int cmd_peak(const CommonArgs& args, bool allow_edge) {
  const ExperimentConfig cfg = make_config(args);
  fs::create_directories(cfg.out);

  std::vector<PeakRow> found;
  std::size_t attempts = 0, failed = 0;
  for (double eta : sorted_etas(cfg)) {
    std::vector<int> sizes = cfg.sizes;
    std::sort(sizes.begin(), sizes.end());
    for (int L : sizes) {
      ++attempts;
      const int N = cfg.filling.excitations(L);
      try {
        ProbeParams family{.L = L, .N = N, .eta = eta, .J = 1.0, .h = 0.0};
        SolveOptions solver;
        solver.tol = cfg.tol;
        solver.seed = cfg.seed;
        ProbeWorkspace ws(family, solver);
        PeakSearchOptions opts;
        opts.h_lo = cfg.grid.start;
        opts.h_hi = cfg.grid.stop;
        opts.per_decade = cfg.grid.per_decade;
        opts.allow_edge = allow_edge;
        found.push_back({eta, L, N, find_peak(ws, opts)});
      } catch (const Error& e) {
        ++failed;
        std::cerr << "peak eta=" << format_double(eta) << " L=" << L << ": "
                  << e.what() << "\n";
      }
    }
  }

  write_peaks_csv_file((fs::path(cfg.out) / "peaks.csv").string(), found);

  ordered_json arr = ordered_json::array();
  std::string plain;
  for (const PeakRow& p : found) {
    arr.push_back(peak_to_json(p));
    plain += "eta=" + format_double(p.eta) + " L=" + std::to_string(p.L) +
             " h_max=" + format_double(p.peak.h_max) +
             " qfi_max=" + format_double(p.peak.qfi_max) +
             " at_edge=" + (p.peak.at_edge ? "1" : "0") + "\n";
  }
  emit(cfg, arr, plain);
  return failures_to_exit_code(failed, attempts);
}

// Shared shape of the per-eta analysis subcommands: run one stage per range
// over rows loaded from the sweep CSV. With no explicit range selection the
// stage covers every range present in the data.
template <typename Stage>
int per_eta_command(const ExperimentConfig& cfg, bool etas_selected,
                    const char* name, Stage&& stage) {
  const std::vector<SweepRecord> rows = load_rows(cfg);
  const std::vector<double> etas =
      etas_selected ? sorted_etas(cfg) : sorted_data_etas(rows);
  if (etas.empty())
    throw Error("sweep data at '" + cfg.out + "/sweep.csv' has no rows");
  ordered_json arr = ordered_json::array();
  std::string plain;
  std::size_t failed = 0, attempts = 0;
  for (double eta : etas) {
    ++attempts;
    const std::string tag = format_double(eta);
    try {
      const auto [machine, line] = stage(eta_subset(rows, eta));
      ordered_json entry{{"eta", tag}};
      entry.update(machine);
      arr.push_back(entry);
      plain += "eta=" + tag + " " + line + "\n";
    } catch (const Error& e) {
      ++failed;
      arr.push_back(ordered_json{{"eta", tag}, {"error", e.what()}});
      plain += "eta=" + tag + " " + std::string(name) +
               " failed: " + e.what() + "\n";
    }
  }
  emit(cfg, arr, plain);
  return failures_to_exit_code(failed, attempts);
}

int cmd_fit_alpha(const CommonArgs& args, const std::optional<double>& anchor) {
  const ExperimentConfig cfg = make_config(args);
  return per_eta_command(cfg, etas_were_selected(args), "fit-alpha",
                         [&](std::vector<SweepRecord> rows) {
    if (rows.empty()) throw Error("no rows for this eta in the sweep data");
    const double h_max = anchor ? *anchor : cfg.grid.start;
    const FitResult fit = fit_alpha(rows, h_max);
    return std::pair(ordered_json{{"anchor", h_max}, {"fit", fit_to_json(fit)}},
                     "alpha=" + format_double(fit.exponent) + " " + fit_line(fit));
  });
}

// "peak" uses each curve's grid maximum; a number picks the measured field
// nearest to it (log distance) present for every size.
std::vector<SizeValue> values_at_rule(const std::vector<SweepRecord>& rows,
                                      const std::string& at, bool use_gap) {
  std::map<int, std::vector<SweepRecord>> curves;
  for (const SweepRecord& r : rows)
    if (r.valid && std::isfinite(r.qfi)) curves[r.L].push_back(r);
  if (curves.empty()) throw Error("no rows for this eta in the sweep data");

  std::vector<SizeValue> out;
  if (at == "peak") {
    for (const auto& [L, curve] : curves) {
      const PeakResult p = grid_peak(curve);
      if (use_gap) {
        for (const SweepRecord& r : curve)
          if (r.h == p.h_max) out.push_back({L, r.gap});
      } else {
        out.push_back({L, p.qfi_max});
      }
    }
    return out;
  }

  const std::vector<double> fields = common_fields(rows);
  if (fields.empty()) throw Error("no field measured for every size");
  double target;
  if (at == "low")
    target = 1e-4;
  else if (at == "high")
    target = fields.back();
  else
    target = parse_double(at);
  if (!(target > 0)) throw Error("field rule must be positive");
  const double h = nearest_field(fields, target);
  for (const auto& [L, curve] : curves)
    for (const SweepRecord& r : curve)
      if (r.h == h) out.push_back({L, use_gap ? r.gap : r.qfi});
  return out;
}

int cmd_fit_beta(const CommonArgs& args, const std::string& at) {
  const ExperimentConfig cfg = make_config(args);
  return per_eta_command(cfg, etas_were_selected(args), "fit-beta",
                         [&](std::vector<SweepRecord> rows) {
    const FitResult fit = fit_beta(values_at_rule(rows, at, false));
    return std::pair(ordered_json{{"at", at}, {"fit", fit_to_json(fit)}},
                     "beta=" + format_double(fit.exponent) + " at=" + at + " " +
                         fit_line(fit));
  });
}

int cmd_fit_z(const CommonArgs& args, const std::string& at) {
  const ExperimentConfig cfg = make_config(args);
  const Phase phase = at == "low"
                          ? Phase::extended
                          : (at == "peak" ? Phase::transition : Phase::localized);
  return per_eta_command(cfg, etas_were_selected(args), "fit-z",
                         [&](std::vector<SweepRecord> rows) {
    const FitResult fit = fit_z(values_at_rule(rows, at, true), phase);
    return std::pair(ordered_json{{"at", at}, {"fit", fit_to_json(fit)}},
                     "z=" + format_double(fit.exponent) + " at=" + at + " " +
                         fit_line(fit));
  });
}

int cmd_collapse(const CommonArgs& args, const std::optional<double>& init_hc,
                 double init_alpha, double init_nu) {
  const ExperimentConfig cfg = make_config(args);
  return per_eta_command(cfg, etas_were_selected(args), "collapse",
                         [&](std::vector<SweepRecord> rows) {
    CollapseInit init;
    init.alpha = init_alpha;
    init.nu = init_nu;
    if (init_hc) {
      init.h_c = *init_hc;
    } else {
      std::map<int, std::vector<SweepRecord>> curves;
      for (const SweepRecord& r : rows)
        if (r.valid && std::isfinite(r.qfi)) curves[r.L].push_back(r);
      if (curves.empty()) throw Error("no rows for this eta in the sweep data");
      init.h_c = grid_peak(curves.rbegin()->second).h_max;
    }
    CollapseOptions opts;
    opts.seed = cfg.seed;
    const CollapseResult res = collapse(rows, init, opts);
    return std::pair(
        ordered_json{{"collapse", collapse_to_json(res)}},
        "h_c=" + format_double(res.h_c) + " alpha=" + format_double(res.alpha) +
            " nu=" + format_double(res.nu) +
            " alpha/nu=" + format_double(res.alpha / res.nu) +
            " quality=" + format_double(res.quality));
  });
}

int cmd_pipeline(const CommonArgs& args) {
  const ExperimentConfig cfg = make_config(args);
  const PipelineResult res = run_pipeline(cfg, stderr_progress());

  std::size_t stage_errors = 0, usable = 0;
  std::string plain;
  for (const EtaAnalysis& a : res.etas) {
    stage_errors += a.errors.size();
    const bool has_results = a.beta_peak || a.collapse_fit || a.alpha_fit ||
                             !a.peaks.empty();
    if (has_results) ++usable;
    plain += "eta=" + format_double(a.eta);
    if (a.beta_peak)
      plain += " beta=" + format_double(a.beta_peak->exponent);
    if (a.collapse_fit) {
      plain += " alpha=" + format_double(a.collapse_fit->alpha) +
               " nu=" + format_double(a.collapse_fit->nu);
    }
    if (a.z_transition)
      plain += " z=" + format_double(a.z_transition->exponent);
    if (a.scaling_relation)
      plain += std::string(" scaling_relation=") +
               (a.scaling_relation->pass ? "pass" : "fail");
    if (!a.errors.empty())
      plain += " errors=" + std::to_string(a.errors.size());
    plain += "\n";
  }
  plain += "report -> " + cfg.out + "/report.json\n";

  ordered_json machine{{"out", cfg.out},
                       {"rows", res.rows.size()},
                       {"invalid_rows", res.invalid_rows},
                       {"stage_errors", stage_errors},
                       {"outputs", res.outputs}};
  emit(cfg, machine, plain);

  if (usable == 0) return 3;
  if (stage_errors > 0 || res.invalid_rows > 0) return 2;
  return 0;
}

int cmd_oracle_check() {
  std::size_t failed = 0;
  const auto report = [&](const std::string& name, bool ok,
                          const std::string& detail) {
    std::cout << (ok ? "ok   " : "FAIL ") << name
              << (detail.empty() ? "" : " " + detail) << "\n";
    if (!ok) ++failed;
  };

  {
    double worst = 0;
    for (double eta : {0.0, 0.5, std::numeric_limits<double>::infinity()}) {
      ProbeParams params{.L = 6, .N = 0, .eta = eta, .J = 1.0, .h = 0.37};
      const DenseReference ref = dense_full_hamiltonian(params);
      for (int N = 0; N <= 6; ++N) {
        params.N = N;
        SectorOperator op(params, std::make_shared<SectorBasis>(6, N));
        const Eigen::MatrixXd a = op.dense_matrix();
        const Eigen::MatrixXd b = ref.sector_block(N);
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
      }
    }
    report("sector blocks match dense Pauli construction", worst < 1e-12,
           "max|diff|=" + format_double(worst));
  }

  {
    ProbeParams params{.L = 6, .N = 3, .eta = 0.5, .J = 1.0, .h = 0.2};
    const double comm = dense_full_hamiltonian(params).sz_commutator_max();
    report("excitation number is conserved", comm < 1e-12,
           "max|[H,Sz]|=" + format_double(comm));
  }

  {
    double worst_energy = 0, worst_fisher = 0;
    for (double h : {1e-3, 0.1, 0.5, 1.0, 2.0}) {
      ProbeParams params{.L = 2, .N = 1, .eta = 1.0, .J = 1.0, .h = h};
      const double split = std::sqrt(4.0 + h * h);
      ProbeWorkspace ws(params);
      const GroundSolution& g = ws.ground(h);
      worst_energy = std::max(worst_energy, std::abs(g.energy0 - (-1.0 - split)));
      worst_energy = std::max(worst_energy, std::abs(g.gap_value() - 2.0 * split));
      const double closed = 4.0 / ((4.0 + h * h) * (4.0 + h * h));
      const FisherPoint pt = ws.qfi_point(h);
      worst_fisher =
          std::max(worst_fisher, std::abs(pt.qfi - closed) / closed);
      worst_fisher = std::max(
          worst_fisher, std::abs(ws.cfi(h, pt.delta_h) - closed) / closed);
    }
    report("two-site closed forms reproduced",
           worst_energy < 1e-8 && worst_fisher < 1e-4,
           "energy err=" + format_double(worst_energy) +
               " fisher rel err=" + format_double(worst_fisher));
  }

  {
    ProbeParams params{.L = 8, .N = 4, .eta = 1.0, .J = 1.0, .h = 0.3};
    const double direct = qfi_by_differentiation(params, 1e-5);
    ProbeWorkspace ws(params);
    const FisherPoint pt = ws.qfi_point(params.h);
    const double rel = std::abs(pt.qfi - direct) / std::abs(direct);
    report("overlap QFI matches differentiation oracle", pt.valid && rel < 5e-3,
           "rel diff=" + format_double(rel));
  }

  return failed == 0 ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stark probe metrology toolkit"};
  app.require_subcommand(1);

  int rc = 0;
  CommonArgs args;

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Measure QFI/CFI/gap over the (eta, L, h) grid");
  add_common(sweep, args);
  sweep->callback([&] { rc = cmd_sweep(args); });

  CLI::App* peak = app.add_subcommand(
      "peak", "Locate each curve's QFI maximum by golden-section refinement");
  bool allow_edge = false;
  add_common(peak, args);
  peak->add_flag("--allow-edge", allow_edge,
                 "Report window-edge maxima instead of failing");
  peak->callback([&] { rc = cmd_peak(args, allow_edge); });

  CLI::App* falpha = app.add_subcommand(
      "fit-alpha", "Localized-phase decay exponent from swept data");
  double anchor_value = 0;
  add_common(falpha, args);
  CLI::Option* anchor_opt = falpha->add_option(
      "--anchor", anchor_value,
      "Critical field estimate subtracted before the log-log fit "
      "(default: grid start)");
  falpha->callback([&] {
    rc = cmd_fit_alpha(args, anchor_opt->count()
                                 ? std::optional<double>(anchor_value)
                                 : std::nullopt);
  });

  CLI::App* fbeta = app.add_subcommand(
      "fit-beta", "QFI growth exponent across sizes from swept data");
  std::string beta_at = "peak";
  add_common(fbeta, args);
  fbeta->add_option("--at", beta_at,
                    "Field rule: peak, low (h near 1e-4), high, or a number");
  fbeta->callback([&] { rc = cmd_fit_beta(args, beta_at); });

  CLI::App* fz = app.add_subcommand(
      "fit-z", "Gap exponent across sizes from swept data");
  std::string z_at = "peak";
  add_common(fz, args);
  fz->add_option("--at", z_at,
                 "Field rule: peak, low (h near 1e-4), high, or a number");
  fz->callback([&] { rc = cmd_fit_z(args, z_at); });

  CLI::App* coll = app.add_subcommand(
      "collapse", "Finite-size scaling collapse of swept data");
  std::optional<double> init_hc;
  double init_alpha = 4.0, init_nu = 1.0;
  double init_hc_value = 0;
  add_common(coll, args);
  CLI::Option* hc_opt =
      coll->add_option("--init-hc", init_hc_value,
                       "Initial critical field (default: largest-size peak)");
  coll->add_option("--init-alpha", init_alpha, "Initial alpha");
  coll->add_option("--init-nu", init_nu, "Initial nu");
  coll->callback([&] {
    rc = cmd_collapse(args,
                      hc_opt->count() ? std::optional<double>(init_hc_value)
                                      : std::nullopt,
                      init_alpha, init_nu);
  });

  CLI::App* pipe = app.add_subcommand(
      "pipeline", "Sweep, locate peaks, fit exponents, collapse, report");
  add_common(pipe, args);
  pipe->callback([&] { rc = cmd_pipeline(args); });

  CLI::App* oracle = app.add_subcommand(
      "oracle-check", "Cross-validate the fast path against dense references");
  oracle->callback([&] { rc = cmd_oracle_check(); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return rc;
}
