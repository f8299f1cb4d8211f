#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "coopjump/model.hpp"
#include "coopjump/operators.hpp"

namespace coopjump {

// One unraveled emission record: jump times and which decay channel fired.
struct EmissionRecord {
  struct Event {
    double time = 0.0;
    int channel = 0;  // index into the jump_channels() list used to simulate
  };
  std::uint64_t seed = 0;
  double duration = 0.0;
  std::vector<Event> events;
  std::vector<JumpChannel> channels;  // channel metadata (rate, transition, atom)
};

struct TrajectoryOptions {
  double time_tolerance = 1e-6;     // relative tolerance of the jump-time root
  double condition_limit = 1e8;     // eigenbasis condition beyond which the
                                    // propagator falls back to expm
  double max_events = 1e8;          // refuse runs expected to exceed this
  double min_interval_scale = 1e-9; // integrator error if a waiting time
                                    // resolves below this / max channel rate
  int initial_product_state = 0;    // product-basis index of the start state
                                    // (0 = every atom in its ground level)
};

// Expected strong-transition photon rate of one independently driven atom,
// A3 * Omega3^2 / (A3^2 + 2 Omega3^2).
double bright_rate_per_atom(const SystemParams& p);

// Estimated total emission count for a run; used for the event-cap guard.
double estimated_event_count(const SystemParams& p, double duration);

// Waiting-time quantum-jump unraveling of the master equation.  The state
// evolves under exp(-i H_cond t) between jumps; jump times solve
// |psi(t)|^2 = u for uniform u, and the firing channel is drawn with
// probability proportional to rate_k |R_k psi|^2.  Deterministic for a
// given (seed, parameters, options).
EmissionRecord simulate(const SystemParams& p, std::uint64_t seed, double duration,
                        const TrajectoryOptions& opts = {});

// A maximal stretch of (approximately) constant emission intensity.
struct Period {
  double start = 0.0;
  double end = 0.0;
  int level = 0;  // 0..3 = number of atoms participating in the bright lines
  double length() const { return end - start; }
};

struct PeriodTrace {
  std::vector<Period> periods;
  double window = 0.0;
  double bright_rate = 0.0;  // per-atom rate used for thresholding
  double duration = 0.0;
};

struct SegmentationOptions {
  // Required mean strong-line counts per window per bright atom; below this
  // the level classifier is statistically meaningless and segmentation
  // refuses to run.
  double min_window_counts = 20.0;
};

// Classifies fixed windows of width `window` by strong-line count against
// thresholds 0.5/1.5/2.5 times (bright_rate * window), merges equal
// neighbours, and absorbs single-window islands into the closer adjacent
// level (ties toward the earlier period), iterating to a fixed point.
// window <= 0 selects the default 20 / bright_rate.
PeriodTrace segment_periods(const EmissionRecord& rec, double window,
                            double bright_rate, const SegmentationOptions& opts = {});

// Level-boundary statistics of a segmented trace.
struct JumpCounts {
  // k(i,j): boundaries i -> j with |i-j| == 1
  Eigen::Matrix4d k = Eigen::Matrix4d::Zero();
  std::array<double, 4> time_at_level{{0.0, 0.0, 0.0, 0.0}};
  long unresolved = 0;      // boundaries with |i-j| >= 2 (below resolution)
  long double_jumps = 0;    // two same-direction boundaries closer than t_m,
                            // plus unresolved two-level boundaries
  long triple_jumps = 0;    // three same-direction boundaries, both gaps < t_m
  double duration = 0.0;
};

JumpCounts count_jumps(const PeriodTrace& trace, double t_m);

JumpCounts pool_counts(const std::vector<JumpCounts>& parts);

// Empirical rate vs prediction for one transition, with the Poisson
// standard error sqrt(k) / time.
struct RateComparison {
  int from = 0, to = 0;
  double predicted = 0.0;
  double empirical = 0.0;
  double sigma = 0.0;
  double z = 0.0;
  double count = 0.0;
  double time_at_from = 0.0;
};

std::vector<RateComparison> compare_rates(const JumpCounts& pooled,
                                          const Eigen::Matrix4d& predicted);

// Double-jump comparison: empirical n_DJ = double_jumps / duration against a
// predicted rate, z-scored with the Poisson error of the count.
RateComparison compare_double_jumps(const JumpCounts& pooled, double predicted);

std::string format_comparison_table(const std::vector<RateComparison>& rows);

}  // namespace coopjump
