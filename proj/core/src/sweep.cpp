#include "stark/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <thread>
#include <tuple>

#include "stark/errors.hpp"
#include "stark/metrology.hpp"

namespace stark {

namespace {

void check_grid(const HGridSpec& grid) {
  if (!(grid.start > 0)) throw ConfigError("h grid: start must be > 0");
  if (!(grid.stop > grid.start) || !std::isfinite(grid.stop))
    throw ConfigError("h grid: stop must be finite and exceed start");
  if (grid.per_decade < 1) throw ConfigError("h grid: per_decade must be >= 1");
  if (grid.densify < 1) throw ConfigError("h grid: densify must be >= 1");
}

// Smallest / largest lattice index j with 10^(j/ppd) inside the bound; the
// slack absorbs log10 rounding on exact powers.
long lattice_lo(double x, int ppd) {
  return static_cast<long>(std::ceil(ppd * std::log10(x) - 1e-9));
}
long lattice_hi(double x, int ppd) {
  return static_cast<long>(std::floor(ppd * std::log10(x) + 1e-9));
}
double lattice_h(long j, int ppd) {
  return std::pow(10.0, static_cast<double>(j) / ppd);
}

struct Cell {
  double eta;
  int L;
  int N;
};

struct Task {
  std::size_t cell;
  double h;
};

SweepRecord measure_point(ProbeWorkspace& ws, const Cell& c, double h,
                          double fixed_delta, bool timing) {
  const auto t0 = std::chrono::steady_clock::now();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SweepRecord r;
  r.eta = c.eta;
  r.L = c.L;
  r.N = c.N;
  r.h = h;
  r.qfi = nan;
  r.gap = nan;
  r.energy0 = nan;
  r.residual = nan;

  FisherPoint fp;
  fp.valid = false;
  try {
    fp = fixed_delta > 0 ? ws.qfi_point(h, fixed_delta) : ws.qfi_point(h);
  } catch (const Error&) {
  }
  r.valid = fp.valid;
  r.delta_h = fp.delta_h;
  r.richardson_err = fp.richardson_err;
  if (fp.valid) r.qfi = fp.qfi;

  try {
    const GroundSolution& g = ws.ground(h);
    r.energy0 = g.energy0;
    r.gap = g.gap_value();
    r.residual = g.residual;
  } catch (const Error&) {
    r.valid = false;
  }

  if (fp.valid && fp.delta_h > 0) {
    try {
      r.cfi = ws.cfi(h, fp.delta_h);
    } catch (const Error&) {
      r.cfi.reset();
    }
  }

  if (timing)
    r.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
  return r;
}

class TaskRunner {
public:
  TaskRunner(const std::vector<Cell>& cells, const ExperimentConfig& cfg)
      : cells_(cells), cfg_(cfg) {}

  void note_done(std::size_t n) { done_ += n; }
  void set_total(std::size_t n) { total_ = n; }

  // Fills results[i] for every task with have[i] == 0. Task order is the
  // canonical row order; thread w takes indices congruent to w.
  void run(const std::vector<Task>& tasks, const std::vector<char>& have,
           std::vector<SweepRecord>& results, const SweepProgressFn& progress) {
    const int workers = static_cast<int>(
        std::min<std::size_t>(cfg_.workers, std::max<std::size_t>(tasks.size(), 1)));
    std::vector<std::exception_ptr> errors(workers);
    auto body = [&](int w) {
      try {
        std::optional<ProbeWorkspace> ws;
        std::size_t ws_cell = SIZE_MAX;
        for (std::size_t i = w; i < tasks.size();
             i += static_cast<std::size_t>(workers)) {
          if (have[i]) continue;
          const Task& t = tasks[i];
          if (!ws || ws_cell != t.cell) {
            const Cell& c = cells_[t.cell];
            ProbeParams family;
            family.L = c.L;
            family.N = c.N;
            family.eta = c.eta;
            family.J = 1.0;
            family.h = 0.0;
            SolveOptions solver;
            solver.tol = cfg_.tol;
            solver.seed = cfg_.seed;
            ws.emplace(family, solver);
            ws_cell = t.cell;
          }
          results[i] = measure_point(*ws, cells_[t.cell], t.h, cfg_.delta_h,
                                     cfg_.timing);
          if (progress) {
            const std::lock_guard<std::mutex> lock(progress_mutex_);
            progress(++done_, total_);
          } else {
            ++done_;
          }
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    };

    if (workers == 1) {
      body(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (int w = 0; w < workers; ++w) pool.emplace_back(body, w);
      for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  }

private:
  const std::vector<Cell>& cells_;
  const ExperimentConfig& cfg_;
  std::mutex progress_mutex_;
  std::atomic<std::size_t> done_ = 0;
  std::size_t total_ = 0;
};

} // namespace

std::vector<double> sweep_base_grid(const HGridSpec& grid) {
  check_grid(grid);
  std::vector<double> out;
  const long lo = lattice_lo(grid.start, grid.per_decade);
  const long hi = lattice_hi(grid.stop, grid.per_decade);
  for (long j = lo; j <= hi; ++j) out.push_back(lattice_h(j, grid.per_decade));
  if (out.empty())
    throw ConfigError(
        "h grid: no lattice points inside [start, stop]; widen the range or "
        "raise h_per_decade");
  return out;
}

std::vector<double> sweep_densify_grid(const HGridSpec& grid, double h_center) {
  check_grid(grid);
  if (!(h_center > 0) || !std::isfinite(h_center))
    throw InvalidArguments("sweep_densify_grid: h_center must be positive");
  if (grid.densify == 1) return {};
  const int fine = grid.per_decade * grid.densify;
  const double lo_h = std::max(grid.start, h_center / 10.0);
  const double hi_h = std::min(grid.stop, h_center * 10.0);
  if (!(lo_h <= hi_h)) return {};
  std::vector<double> out;
  const long lo = lattice_lo(lo_h, fine);
  const long hi = lattice_hi(hi_h, fine);
  for (long j = lo; j <= hi; ++j) {
    if (j % grid.densify == 0) continue; // already on the base lattice
    out.push_back(lattice_h(j, fine));
  }
  return out;
}

std::vector<SweepRecord> run_sweep(const ExperimentConfig& cfg,
                                   const std::vector<SweepRecord>& reuse,
                                   const SweepProgressFn& progress) {
  cfg.validate();

  std::vector<double> etas = cfg.etas;
  std::vector<int> sizes = cfg.sizes;
  std::sort(etas.begin(), etas.end());
  std::sort(sizes.begin(), sizes.end());
  std::vector<Cell> cells;
  for (double eta : etas)
    for (int L : sizes) cells.push_back({eta, L, cfg.filling.excitations(L)});

  std::map<std::tuple<double, int, double>, const SweepRecord*> old_rows;
  for (const SweepRecord& r : reuse)
    old_rows.emplace(std::make_tuple(r.eta, r.L, r.h), &r);
  const auto lookup = [&](const Cell& c, double h) -> const SweepRecord* {
    const auto it = old_rows.find(std::make_tuple(c.eta, c.L, h));
    if (it == old_rows.end() || it->second->N != c.N) return nullptr;
    return it->second;
  };

  const std::vector<double> base = sweep_base_grid(cfg.grid);

  std::vector<Task> tasks_a;
  tasks_a.reserve(cells.size() * base.size());
  for (std::size_t ci = 0; ci < cells.size(); ++ci)
    for (double h : base) tasks_a.push_back({ci, h});

  std::vector<SweepRecord> rows_a(tasks_a.size());
  std::vector<char> have_a(tasks_a.size(), 0);
  for (std::size_t i = 0; i < tasks_a.size(); ++i) {
    if (const SweepRecord* r = lookup(cells[tasks_a[i].cell], tasks_a[i].h)) {
      rows_a[i] = *r;
      have_a[i] = 1;
    }
  }

  TaskRunner runner(cells, cfg);
  runner.set_total(tasks_a.size());
  runner.note_done(static_cast<std::size_t>(
      std::count(have_a.begin(), have_a.end(), char(1))));
  runner.run(tasks_a, have_a, rows_a, progress);

  // Refinement pass around each curve's finite maximum.
  std::vector<Task> tasks_b;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    double best_h = 0, best_q = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tasks_a.size(); ++i) {
      if (tasks_a[i].cell != ci) continue;
      const SweepRecord& r = rows_a[i];
      if (!r.valid || !std::isfinite(r.qfi)) continue;
      if (r.qfi > best_q) {
        best_q = r.qfi;
        best_h = r.h;
      }
    }
    if (!(best_h > 0)) continue;
    for (double h : sweep_densify_grid(cfg.grid, best_h))
      tasks_b.push_back({ci, h});
  }

  std::vector<SweepRecord> rows_b(tasks_b.size());
  std::vector<char> have_b(tasks_b.size(), 0);
  for (std::size_t i = 0; i < tasks_b.size(); ++i) {
    if (const SweepRecord* r = lookup(cells[tasks_b[i].cell], tasks_b[i].h)) {
      rows_b[i] = *r;
      have_b[i] = 1;
    }
  }
  runner.set_total(tasks_a.size() + tasks_b.size());
  runner.note_done(static_cast<std::size_t>(
      std::count(have_b.begin(), have_b.end(), char(1))));
  runner.run(tasks_b, have_b, rows_b, progress);

  std::vector<SweepRecord> rows;
  rows.reserve(rows_a.size() + rows_b.size());
  rows.insert(rows.end(), rows_a.begin(), rows_a.end());
  rows.insert(rows.end(), rows_b.begin(), rows_b.end());
  std::sort(rows.begin(), rows.end(),
            [](const SweepRecord& a, const SweepRecord& b) {
              return std::make_tuple(a.eta, a.L, a.h) <
                     std::make_tuple(b.eta, b.L, b.h);
            });
  return rows;
}

} // namespace stark
