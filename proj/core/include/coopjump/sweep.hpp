#pragma once

#include <functional>
#include <vector>

#include "coopjump/config.hpp"
#include "coopjump/rates.hpp"

namespace coopjump {

// One evaluated sweep point.  `baseline` holds the independent-atom rates
// (coupling forced to zero) computed once per sweep and shared by rows.
struct SweepRow {
  double r = 0.0;
  Complex c3{0.0, 0.0};
  RateSet numeric;
  RateSet closed;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  RateSet baseline;       // numeric rates at c3 = 0
  RateSet baseline_closed;
};

// Grid of separations from the config (linear or logarithmic, inclusive).
std::vector<double> distance_grid(const RunConfig& cfg);

// Evaluates the rate pipeline over the distance grid.  Worker threads are
// taken from COOPJUMP_THREADS (default: hardware concurrency); row order is
// deterministic regardless of thread count.
SweepResult run_sweep(const RunConfig& cfg);

// Number of worker threads honoring COOPJUMP_THREADS.
int worker_count();

// Deterministic parallel map: applies fn to 0..n-1 on the worker pool.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace coopjump
