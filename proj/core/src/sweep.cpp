#include "coopjump/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "coopjump/errors.hpp"

namespace coopjump {

std::vector<double> distance_grid(const RunConfig& cfg) {
  if (!(cfg.r_start > 0.0))
    throw ConfigError("distance grid: r_start must be positive");
  if (cfg.r_points < 1)
    throw ConfigError("distance grid: r_points must be at least 1");
  if (cfg.r_points == 1) {
    if (cfg.r_stop != cfg.r_start)
      throw ConfigError("distance grid: a single-point grid requires r_stop == r_start");
    return {cfg.r_start};
  }
  if (!(cfg.r_stop > cfg.r_start))
    throw ConfigError("distance grid: r_stop must exceed r_start");
  std::vector<double> grid(static_cast<std::size_t>(cfg.r_points));
  const int last = cfg.r_points - 1;
  if (cfg.log_grid) {
    const double l0 = std::log(cfg.r_start);
    const double l1 = std::log(cfg.r_stop);
    for (int k = 0; k <= last; ++k)
      grid[static_cast<std::size_t>(k)] = std::exp(l0 + (l1 - l0) * k / last);
  } else {
    for (int k = 0; k <= last; ++k)
      grid[static_cast<std::size_t>(k)] = cfg.r_start + (cfg.r_stop - cfg.r_start) * k / last;
  }
  grid.front() = cfg.r_start;
  grid.back() = cfg.r_stop;
  return grid;
}

int worker_count() {
  if (const char* env = std::getenv("COOPJUMP_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1)
      throw ConfigError("COOPJUMP_THREADS must be a positive integer");
    return static_cast<int>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

SweepResult run_sweep(const RunConfig& cfg) {
  const std::vector<double> grid = distance_grid(cfg);
  const int n = static_cast<int>(grid.size());

  // Resolve every point's parameters up front (cheap; geometry only).
  std::vector<SystemParams> point_params(grid.size());
  for (int i = 0; i < n; ++i)
    point_params[static_cast<std::size_t>(i)] = resolve_params(cfg, grid[static_cast<std::size_t>(i)]);

  // The precomputed pipeline treats c3 as the sweep variable; the weak
  // couplings c1/c2 are baked in at construction.  Points whose c1/c2 differ
  // from the first point's (possible when weak-transition wavelength ratios
  // are supplied) rebuild locally.
  const SystemParams& head = point_params.front();
  RatePipeline pipeline(head);

  SweepResult result;
  result.rows.resize(grid.size());

  parallel_for(n, [&](int i) {
    const SystemParams& p = point_params[static_cast<std::size_t>(i)];
    SweepRow& row = result.rows[static_cast<std::size_t>(i)];
    row.r = grid[static_cast<std::size_t>(i)];
    row.c3 = p.c3;
    if (p.c1 == head.c1 && p.c2 == head.c2) {
      row.numeric = pipeline.rates_at(p.c3);
    } else {
      RatePipeline local(p);
      row.numeric = local.rates_at(p.c3);
    }
    finalize_rates(row.numeric, cfg.t_m);
    row.closed = closed_form(p);
    finalize_rates(row.closed, cfg.t_m);
  });

  // Independent-atom baseline: every coupling constant forced to zero.
  SystemParams indep = head;
  indep.c1 = Complex(0, 0);
  indep.c2 = Complex(0, 0);
  indep.c3 = Complex(0, 0);
  if (indep.c1 == head.c1 && indep.c2 == head.c2) {
    result.baseline = pipeline.rates_at(Complex(0, 0));
  } else {
    RatePipeline base_pipe(indep);
    result.baseline = base_pipe.rates_at(Complex(0, 0));
  }
  finalize_rates(result.baseline, cfg.t_m);
  result.baseline_closed = closed_form(indep);
  finalize_rates(result.baseline_closed, cfg.t_m);

  return result;
}

}  // namespace coopjump
