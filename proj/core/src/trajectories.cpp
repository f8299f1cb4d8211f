#include "coopjump/trajectories.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "coopjump/errors.hpp"
#include "coopjump/linalg.hpp"

namespace coopjump {

namespace {

// 53-bit uniform in [0, 1)
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// No-emission propagator psi(t) = exp(-i H t) psi0.  Uses the eigenbasis of
// H when it is well conditioned, otherwise falls back to scaling-and-squaring
// matrix exponentials.
struct Propagator {
  bool spectral = true;
  Matrix v, v_inv;
  Vector lambda;
  Matrix h;

  explicit Propagator(const Matrix& hamiltonian, double condition_limit) : h(hamiltonian) {
    Eigen::ComplexEigenSolver<Matrix> es(h);
    if (es.info() == Eigen::Success) {
      v = es.eigenvectors();
      lambda = es.eigenvalues();
      if (condition_number(v) < condition_limit) {
        v_inv = v.inverse();
        return;
      }
    }
    spectral = false;
  }

  Vector apply(const Vector& psi0, double t) const {
    if (!spectral) {
      const Matrix u = (Matrix(Complex(0.0, -1.0) * h * t)).exp();
      return u * psi0;
    }
    Vector c = v_inv * psi0;
    for (int k = 0; k < c.size(); ++k)
      c(k) *= std::exp(Complex(0.0, -1.0) * lambda(k) * t);
    return v * c;
  }
};

}  // namespace

double bright_rate_per_atom(const SystemParams& p) {
  const double a3 = p.a3, o3 = p.omega3;
  const double den = a3 * a3 + 2.0 * o3 * o3;
  if (den <= 0.0) return 0.0;
  return a3 * o3 * o3 / den;
}

double estimated_event_count(const SystemParams& p, double duration) {
  const double weak = p.a1 + p.a2;  // shelving lines, at most O(1) per period
  return duration * (p.n_atoms * bright_rate_per_atom(p) + weak);
}

EmissionRecord simulate(const SystemParams& p, std::uint64_t seed, double duration,
                        const TrajectoryOptions& opts) {
  if (duration < 0.0 || !std::isfinite(duration))
    throw ParameterError("simulate: duration must be finite and nonnegative");
  validate_params(p);

  EmissionRecord rec;
  rec.seed = seed;
  rec.duration = duration;
  rec.channels = jump_channels(p);
  if (duration == 0.0) return rec;

  if (estimated_event_count(p, duration) > opts.max_events) {
    std::ostringstream os;
    os << "refusing trajectory: expected about " << estimated_event_count(p, duration)
       << " emissions, above the cap " << opts.max_events;
    throw NumericalError(NumericalError::Kind::integrator, os.str());
  }

  const int d = hilbert_dim(p.n_atoms);
  const Matrix h = conditional_hamiltonian(p);
  const Propagator prop(h, opts.condition_limit);

  double max_rate = 0.0;
  for (const auto& ch : rec.channels) {
    Eigen::JacobiSVD<Matrix> svd(ch.op);
    const double op_norm = svd.singularValues()(0);
    max_rate += ch.rate * op_norm * op_norm;
  }
  if (max_rate <= 0.0)
    throw UnphysicalConfigError("simulate: no decay channel is active");
  const double min_interval = opts.min_interval_scale / max_rate;

  std::mt19937_64 rng(seed);
  if (opts.initial_product_state < 0 || opts.initial_product_state >= d)
    throw ParameterError("simulate: initial state index out of range");
  Vector psi = Vector::Zero(d);
  psi(opts.initial_product_state) = 1.0;

  double t_now = 0.0;
  while (t_now < duration) {
    psi.normalize();
    const double u = uniform01(rng);
    const double remaining = duration - t_now;

    auto survival = [&](double t) { return prop.apply(psi, t).squaredNorm(); };

    if (survival(remaining) > u) break;  // no further jump within this run

    // Bracket the jump time: double an initial guess based on the maximal
    // emission rate until the survival probability drops below u.
    double lo = 0.0;
    double hi = std::min(remaining, 1.0 / max_rate);
    while (survival(hi) > u) {
      lo = hi;
      hi = std::min(remaining, 2.0 * hi);
    }
    while (hi - lo > opts.time_tolerance * hi)
      (survival(0.5 * (lo + hi)) > u ? lo : hi) = 0.5 * (lo + hi);
    const double tau = hi;

    if (tau < min_interval) {
      std::ostringstream os;
      os << "jump interval " << tau << " s is below the resolvable scale "
         << min_interval << " s; conditional evolution cannot be trusted";
      throw NumericalError(NumericalError::Kind::integrator, os.str());
    }

    psi = prop.apply(psi, tau);
    t_now += tau;

    // Channel selection with probability rate_k |R_k psi|^2.
    std::vector<double> weights(rec.channels.size());
    double total = 0.0;
    for (std::size_t k = 0; k < rec.channels.size(); ++k) {
      weights[k] = rec.channels[k].rate * (rec.channels[k].op * psi).squaredNorm();
      total += weights[k];
    }
    if (total <= 0.0)
      throw NumericalError(NumericalError::Kind::integrator,
                           "no channel can fire at the sampled jump time");
    double pick = uniform01(rng) * total;
    std::size_t chosen = 0;
    for (; chosen + 1 < weights.size(); ++chosen) {
      pick -= weights[chosen];
      if (pick <= 0.0) break;
    }
    psi = rec.channels[chosen].op * psi;
    rec.events.push_back(EmissionRecord::Event{t_now, static_cast<int>(chosen)});
    if (static_cast<double>(rec.events.size()) > opts.max_events)
      throw NumericalError(NumericalError::Kind::integrator,
                           "trajectory exceeded the event cap");
  }
  return rec;
}

PeriodTrace segment_periods(const EmissionRecord& rec, double window, double bright_rate,
                            const SegmentationOptions& opts) {
  if (bright_rate <= 0.0)
    throw ParameterError("segment_periods: bright rate must be positive");
  const double w = window > 0.0 ? window : 20.0 / bright_rate;
  const double mean_counts = w * bright_rate;
  if (mean_counts < opts.min_window_counts - 1e-9) {
    std::ostringstream os;
    os << "window of " << w << " s collects only " << mean_counts
       << " expected strong-line photons per bright atom (need "
       << opts.min_window_counts << "); the level classifier would be noise";
    throw SegmentationError(os.str());
  }
  const int n_windows = static_cast<int>(rec.duration / w);
  if (n_windows < 1)
    throw SegmentationError("record shorter than one classification window");

  // Count strong-line photons per window.
  std::vector<int> counts(n_windows, 0);
  for (const auto& ev : rec.events) {
    if (rec.channels[ev.channel].transition != 3) continue;
    const int k = std::min(n_windows - 1, static_cast<int>(ev.time / w));
    if (ev.time < n_windows * w) ++counts[k];
  }

  // Classify each window by nearest multiple of the per-atom rate.
  const int max_level = 3;
  std::vector<int> level(n_windows);
  for (int k = 0; k < n_windows; ++k)
    level[k] = std::min(max_level, static_cast<int>(counts[k] / mean_counts + 0.5));

  // Merge neighbours and absorb single-window islands (a lone window between
  // two longer periods joins the closer level; ties go to the earlier one).
  struct Seg {
    int first, last, level;  // window span, inclusive
    int length() const { return last - first + 1; }
  };
  std::vector<Seg> segs;
  for (int k = 0; k < n_windows; ++k) {
    if (!segs.empty() && segs.back().level == level[k])
      segs.back().last = k;
    else
      segs.push_back(Seg{k, k, level[k]});
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 1; i + 1 < segs.size(); ++i) {
      Seg& s = segs[i];
      if (s.length() != 1) continue;
      const int prev = segs[i - 1].level, next = segs[i + 1].level;
      const int d_prev = std::abs(s.level - prev), d_next = std::abs(s.level - next);
      s.level = d_next < d_prev ? next : prev;
      changed = true;
    }
    // re-merge equal neighbours
    std::vector<Seg> merged;
    for (const auto& s : segs) {
      if (!merged.empty() && merged.back().level == s.level)
        merged.back().last = s.last;
      else
        merged.push_back(s);
    }
    segs.swap(merged);
  }

  PeriodTrace trace;
  trace.window = w;
  trace.bright_rate = bright_rate;
  trace.duration = n_windows * w;
  for (const auto& s : segs)
    trace.periods.push_back(Period{s.first * w, (s.last + 1) * w, s.level});
  return trace;
}

JumpCounts count_jumps(const PeriodTrace& trace, double t_m) {
  JumpCounts jc;
  jc.duration = trace.duration;
  const auto& ps = trace.periods;
  for (const auto& p : ps)
    jc.time_at_level[static_cast<std::size_t>(std::clamp(p.level, 0, 3))] += p.length();

  for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
    const int a = ps[i].level, b = ps[i + 1].level;
    const int step = b - a;
    if (std::abs(step) == 1) {
      jc.k(a, b) += 1.0;
    } else if (std::abs(step) >= 2) {
      // level change faster than the window resolution
      ++jc.unresolved;
      if (std::abs(step) == 2) ++jc.double_jumps;
      if (std::abs(step) == 3) ++jc.triple_jumps;
    }
  }
  // Resolved double/triple jumps: same-direction boundaries with short
  // intermediate periods.
  for (std::size_t i = 1; i + 1 < ps.size(); ++i) {
    const int before = ps[i].level - ps[i - 1].level;
    const int after = ps[i + 1].level - ps[i].level;
    if (before * after > 0 && std::abs(before) == 1 && std::abs(after) == 1 &&
        ps[i].length() < t_m)
      ++jc.double_jumps;
  }
  for (std::size_t i = 1; i + 2 < ps.size(); ++i) {
    const int s1 = ps[i].level - ps[i - 1].level;
    const int s2 = ps[i + 1].level - ps[i].level;
    const int s3 = ps[i + 2].level - ps[i + 1].level;
    if (s1 == s2 && s2 == s3 && std::abs(s1) == 1 && ps[i].length() < t_m &&
        ps[i + 1].length() < t_m)
      ++jc.triple_jumps;
  }
  return jc;
}

JumpCounts pool_counts(const std::vector<JumpCounts>& parts) {
  JumpCounts out;
  for (const auto& part : parts) {
    out.k += part.k;
    for (std::size_t l = 0; l < out.time_at_level.size(); ++l)
      out.time_at_level[l] += part.time_at_level[l];
    out.unresolved += part.unresolved;
    out.double_jumps += part.double_jumps;
    out.triple_jumps += part.triple_jumps;
    out.duration += part.duration;
  }
  return out;
}

std::vector<RateComparison> compare_rates(const JumpCounts& pooled,
                                          const Eigen::Matrix4d& predicted) {
  std::vector<RateComparison> out;
  for (int i = 0; i <= 3; ++i)
    for (int j : {i - 1, i + 1}) {
      if (j < 0 || j > 3) continue;
      if (predicted(i, j) <= 0.0) continue;
      RateComparison rc;
      rc.from = i;
      rc.to = j;
      rc.predicted = predicted(i, j);
      rc.time_at_from = pooled.time_at_level[static_cast<std::size_t>(i)];
      rc.count = pooled.k(i, j);
      if (rc.time_at_from > 0.0) {
        rc.empirical = rc.count / rc.time_at_from;
        const double expected = rc.predicted * rc.time_at_from;
        rc.sigma = std::sqrt(expected) / rc.time_at_from;
        rc.z = (rc.count - expected) / std::sqrt(expected);
      }
      out.push_back(rc);
    }
  return out;
}

RateComparison compare_double_jumps(const JumpCounts& pooled, double predicted) {
  RateComparison rc;
  rc.from = -1;
  rc.to = -1;
  rc.predicted = predicted;
  rc.time_at_from = pooled.duration;
  rc.count = static_cast<double>(pooled.double_jumps);
  if (pooled.duration > 0.0 && predicted > 0.0) {
    rc.empirical = rc.count / pooled.duration;
    const double expected = predicted * pooled.duration;
    rc.sigma = std::sqrt(expected) / pooled.duration;
    rc.z = (rc.count - expected) / std::sqrt(expected);
  }
  return rc;
}

std::string format_comparison_table(const std::vector<RateComparison>& rows) {
  std::ostringstream os;
  os << "transition      predicted        empirical        count      z\n";
  for (const auto& r : rows) {
    char buf[160];
    if (r.from >= 0)
      std::snprintf(buf, sizeof buf, "p%d%d        %15.8g  %15.8g  %9.0f  %+6.2f\n",
                    r.from, r.to, r.predicted, r.empirical, r.count, r.z);
    else
      std::snprintf(buf, sizeof buf, "n_DJ       %15.8g  %15.8g  %9.0f  %+6.2f\n",
                    r.predicted, r.empirical, r.count, r.z);
    os << buf;
  }
  return os.str();
}

}  // namespace coopjump
