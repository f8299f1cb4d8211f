#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <coopjump/errors.hpp>
#include <coopjump/model.hpp>
#include <coopjump/operators.hpp>
#include <coopjump/trajectories.hpp>

using namespace coopjump;

namespace {

// One atom, strong decay only: from the excited state the waiting time to
// the unique emission is exactly Exp(a3).
SystemParams decay_only() {
  SystemParams p;
  p.scheme = LevelScheme::V;
  p.n_atoms = 1;
  p.a3 = 1.0;
  return p;
}

// Three uncoupled driven atoms, no weak process: a stationary bright stream.
SystemParams driven_three() {
  SystemParams p;
  p.scheme = LevelScheme::V;
  p.n_atoms = 3;
  p.a3 = 2e3;
  p.omega3 = 5e3;
  return p;
}

// Synthetic emission record: a telegraph of intensity levels rendered as a
// Poisson photon stream, built independently of the simulator.
struct Block {
  double length = 0.0;
  int level = 0;
};

EmissionRecord poisson_record(const std::vector<Block>& blocks, double bright_rate,
                              std::uint64_t seed) {
  EmissionRecord rec;
  JumpChannel ch;
  ch.rate = bright_rate;
  ch.transition = 3;
  ch.atom = 0;
  ch.label = "synthetic strong line";
  rec.channels.push_back(ch);

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> unit(1.0);
  double t0 = 0.0;
  for (const auto& b : blocks) {
    const double rate = b.level * bright_rate;
    if (rate > 0.0) {
      double t = t0 + unit(rng) / rate;
      while (t < t0 + b.length) {
        rec.events.push_back(EmissionRecord::Event{t, 0});
        t += unit(rng) / rate;
      }
    }
    t0 += b.length;
  }
  rec.duration = t0;
  return rec;
}

PeriodTrace trace_of(const std::vector<Block>& blocks, double window) {
  PeriodTrace tr;
  tr.window = window;
  tr.bright_rate = 1.0;
  double t0 = 0.0;
  for (const auto& b : blocks) {
    tr.periods.push_back(Period{t0, t0 + b.length, b.level});
    t0 += b.length;
  }
  tr.duration = t0;
  return tr;
}

}  // namespace

TEST_CASE("waiting times of a bare decay are exponential (KS test)") {
  const SystemParams p = decay_only();
  TrajectoryOptions opts;
  opts.initial_product_state = 2;  // |3>, the excited level of one atom

  const int n = 4000;
  std::vector<double> waits;
  waits.reserve(n);
  for (int s = 0; s < n; ++s) {
    const EmissionRecord rec = simulate(p, 1000 + s, 50.0, opts);
    REQUIRE(rec.events.size() == 1);
    CHECK(rec.channels[rec.events[0].channel].transition == 3);
    waits.push_back(rec.events[0].time);
  }
  std::sort(waits.begin(), waits.end());
  double ks = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cdf = 1.0 - std::exp(-waits[i]);
    ks = std::max(ks, std::abs(cdf - (i + 1.0) / n));
    ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
  }
  // 1% critical value of the Kolmogorov statistic
  CHECK(ks < 1.63 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("driven atoms emit at the predicted bright rate") {
  const SystemParams p = driven_three();
  const double rate = 3.0 * bright_rate_per_atom(p);
  CHECK(bright_rate_per_atom(p) == doctest::Approx(2e3 * 25e6 / (4e6 + 5e7)).epsilon(1e-12));

  const double duration = 4.0;
  const EmissionRecord rec = simulate(p, 7, duration);
  const double expected = rate * duration;
  const double z =
      (static_cast<double>(rec.events.size()) - expected) / std::sqrt(expected);
  CAPTURE(rec.events.size());
  CHECK(std::abs(z) < 4.0);
}

TEST_CASE("per-atom channels fire exchangeably") {
  const SystemParams p = driven_three();  // c3 = 0: channels stay per-atom
  const EmissionRecord rec = simulate(p, 21, 4.0);
  std::array<double, 3> by_atom{{0, 0, 0}};
  for (const auto& ev : rec.events) {
    const int atom = rec.channels[ev.channel].atom;
    REQUIRE(atom >= 1);
    REQUIRE(atom <= 3);
    by_atom[atom - 1] += 1.0;
  }
  const double total = by_atom[0] + by_atom[1] + by_atom[2];
  REQUIRE(total > 100);
  double chi2 = 0.0;
  for (double c : by_atom) chi2 += (c - total / 3) * (c - total / 3) / (total / 3);
  CHECK(chi2 < 9.21);  // 1% tail of chi-square with 2 dof
}

TEST_CASE("trajectories are deterministic in the seed") {
  const SystemParams p = driven_three();
  const EmissionRecord a = simulate(p, 99, 0.5);
  const EmissionRecord b = simulate(p, 99, 0.5);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].time == b.events[i].time);
    CHECK(a.events[i].channel == b.events[i].channel);
  }
  const EmissionRecord c = simulate(p, 100, 0.5);
  const bool same = a.events.size() == c.events.size() &&
                    std::equal(a.events.begin(), a.events.end(), c.events.begin(),
                               [](const EmissionRecord::Event& x,
                                  const EmissionRecord::Event& y) {
                                 return x.time == y.time && x.channel == y.channel;
                               });
  CHECK(!same);
}

TEST_CASE("simulate argument and cap guards") {
  const SystemParams p = driven_three();

  const EmissionRecord empty = simulate(p, 1, 0.0);
  CHECK(empty.events.empty());
  CHECK(empty.duration == 0.0);

  CHECK_THROWS_AS(simulate(p, 1, -1.0), ParameterError);

  TrajectoryOptions bad_state;
  bad_state.initial_product_state = 27;
  CHECK_THROWS_AS(simulate(p, 1, 0.1, bad_state), ParameterError);
  bad_state.initial_product_state = -1;
  CHECK_THROWS_AS(simulate(p, 1, 0.1, bad_state), ParameterError);

  TrajectoryOptions tiny_cap;
  tiny_cap.max_events = 10.0;
  CHECK_THROWS_AS(simulate(p, 1, 4.0, tiny_cap), NumericalError);

  SystemParams dead;
  dead.scheme = LevelScheme::V;
  dead.n_atoms = 1;  // no rate is positive: nothing can ever be emitted
  CHECK_THROWS_AS(simulate(dead, 1, 1.0), UnphysicalConfigError);
}

TEST_CASE("a constant stream segments into a single period") {
  const double bright = 2000.0;
  const double w = 0.05;  // 100 expected counts per window per bright atom
  const std::vector<Block> blocks{{20.0, 2}};
  const EmissionRecord rec = poisson_record(blocks, bright, 5);

  const PeriodTrace tr = segment_periods(rec, w, bright);
  REQUIRE(tr.periods.size() == 1);
  CHECK(tr.periods[0].level == 2);
  CHECK(tr.periods[0].start == 0.0);
  CHECK(tr.periods[0].end == doctest::Approx(tr.duration));
  CHECK(tr.duration == doctest::Approx(20.0));
}

TEST_CASE("an alternating telegraph is recovered block by block") {
  const double bright = 1600.0;
  const double w = 0.05;  // 80 expected counts per window per bright atom
  std::vector<Block> blocks;
  for (int i = 0; i < 10; ++i) {
    blocks.push_back({2.0, 3});
    blocks.push_back({2.0, 0});
  }
  const EmissionRecord rec = poisson_record(blocks, bright, 11);
  const PeriodTrace tr = segment_periods(rec, w, bright);

  REQUIRE(tr.periods.size() == 20);
  for (std::size_t i = 0; i < tr.periods.size(); ++i) {
    CHECK(tr.periods[i].level == (i % 2 ? 0 : 3));
    // boundaries land within one window of the true switch times
    CHECK(std::abs(tr.periods[i].start - 2.0 * static_cast<double>(i)) <= w + 1e-12);
  }
}

TEST_CASE("segmentation output is structurally clean") {
  // fast random telegraph: some dwells are shorter than the window and must
  // be absorbed, never left as interior single-window periods
  std::mt19937_64 rng(17);
  std::exponential_distribution<double> dwell(8.0);
  std::uniform_int_distribution<int> lvl(0, 3);
  std::vector<Block> blocks;
  double total = 0.0;
  int last = -1;
  while (total < 30.0) {
    int l = lvl(rng);
    if (l == last) continue;
    const double len = dwell(rng);
    blocks.push_back({len, l});
    total += len;
    last = l;
  }
  const double bright = 3000.0;
  const double w = 0.02;  // 60 counts per window per bright atom
  const PeriodTrace tr = segment_periods(poisson_record(blocks, bright, 23), w, bright);

  REQUIRE(!tr.periods.empty());
  CHECK(tr.periods.front().start == 0.0);
  CHECK(tr.periods.back().end == doctest::Approx(tr.duration));
  for (std::size_t i = 0; i < tr.periods.size(); ++i) {
    const Period& p = tr.periods[i];
    CHECK(p.level >= 0);
    CHECK(p.level <= 3);
    if (i + 1 < tr.periods.size()) {
      CHECK(p.level != tr.periods[i + 1].level);
      CHECK(p.end == doctest::Approx(tr.periods[i + 1].start));
    }
    if (i > 0 && i + 1 < tr.periods.size())
      CHECK(p.length() >= 2 * w - 1e-9);  // islands have been absorbed
  }
}

TEST_CASE("segmentation refuses statistically meaningless windows") {
  const EmissionRecord rec = poisson_record({{5.0, 2}}, 1000.0, 3);
  CHECK_THROWS_AS(segment_periods(rec, 0.01, 1000.0), SegmentationError);

  const EmissionRecord tiny = poisson_record({{0.01, 2}}, 1000.0, 3);
  CHECK_THROWS_AS(segment_periods(tiny, 0.05, 1000.0), SegmentationError);

  CHECK_THROWS_AS(segment_periods(rec, 0.05, -1.0), ParameterError);
}

TEST_CASE("boundary counting: resolved transitions") {
  const PeriodTrace tr = trace_of({{5.0, 0}, {0.2, 1}, {3.8, 2}}, 0.1);
  const JumpCounts jc = count_jumps(tr, 0.3);
  CHECK(jc.k(0, 1) == 1.0);
  CHECK(jc.k(1, 2) == 1.0);
  CHECK(jc.k.sum() == 2.0);
  CHECK(jc.unresolved == 0);
  CHECK(jc.double_jumps == 1);  // middle period shorter than the window t_m
  CHECK(jc.triple_jumps == 0);
  CHECK(jc.time_at_level[0] == doctest::Approx(5.0));
  CHECK(jc.time_at_level[1] == doctest::Approx(0.2));
  CHECK(jc.time_at_level[2] == doctest::Approx(3.8));
  CHECK(jc.duration == doctest::Approx(9.0));

  // same trace, tighter resolution: no double jump
  CHECK(count_jumps(tr, 0.1).double_jumps == 0);

  // direction reversal is not a double jump however short the middle is
  const JumpCounts back = count_jumps(trace_of({{5.0, 0}, {0.2, 1}, {3.8, 0}}, 0.1), 0.3);
  CHECK(back.k(0, 1) == 1.0);
  CHECK(back.k(1, 0) == 1.0);
  CHECK(back.double_jumps == 0);
}

TEST_CASE("boundary counting: unresolved multi-level steps") {
  const JumpCounts two = count_jumps(trace_of({{5.0, 0}, {5.0, 2}}, 0.1), 0.3);
  CHECK(two.k.sum() == 0.0);
  CHECK(two.unresolved == 1);
  CHECK(two.double_jumps == 1);
  CHECK(two.triple_jumps == 0);

  const JumpCounts three = count_jumps(trace_of({{5.0, 0}, {5.0, 3}}, 0.1), 0.3);
  CHECK(three.unresolved == 1);
  CHECK(three.double_jumps == 0);
  CHECK(three.triple_jumps == 1);
}

TEST_CASE("boundary counting: staircase with short treads") {
  const PeriodTrace tr =
      trace_of({{5.0, 0}, {0.1, 1}, {0.1, 2}, {5.0, 3}}, 0.05);
  const JumpCounts jc = count_jumps(tr, 0.3);
  CHECK(jc.k(0, 1) == 1.0);
  CHECK(jc.k(1, 2) == 1.0);
  CHECK(jc.k(2, 3) == 1.0);
  CHECK(jc.double_jumps == 2);  // 0-1-2 and 1-2-3
  CHECK(jc.triple_jumps == 1);
}

TEST_CASE("pooling sums every field") {
  const JumpCounts a = count_jumps(trace_of({{5.0, 0}, {0.2, 1}, {3.8, 2}}, 0.1), 0.3);
  const JumpCounts b = count_jumps(trace_of({{5.0, 0}, {5.0, 2}}, 0.1), 0.3);
  const JumpCounts pooled = pool_counts({a, b});
  CHECK(pooled.k(0, 1) == a.k(0, 1) + b.k(0, 1));
  CHECK(pooled.k.sum() == a.k.sum() + b.k.sum());
  CHECK(pooled.unresolved == a.unresolved + b.unresolved);
  CHECK(pooled.double_jumps == a.double_jumps + b.double_jumps);
  CHECK(pooled.triple_jumps == a.triple_jumps + b.triple_jumps);
  CHECK(pooled.duration == doctest::Approx(a.duration + b.duration));
  for (int l = 0; l < 4; ++l)
    CHECK(pooled.time_at_level[l] ==
          doctest::Approx(a.time_at_level[l] + b.time_at_level[l]));
}

TEST_CASE("comparison rows carry Poisson errors") {
  JumpCounts jc;
  jc.k(1, 0) = 9.0;
  jc.k(1, 2) = 16.0;
  jc.time_at_level = {{2.0, 4.0, 3.0, 1.0}};
  jc.duration = 10.0;
  jc.double_jumps = 5;

  Eigen::Matrix4d pred = Eigen::Matrix4d::Zero();
  pred(1, 0) = 2.0;
  pred(1, 2) = 4.5;
  const auto rows = compare_rates(jc, pred);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].from == 1);
  CHECK(rows[0].to == 0);
  CHECK(rows[0].empirical == doctest::Approx(9.0 / 4.0));
  CHECK(rows[0].sigma == doctest::Approx(std::sqrt(2.0 * 4.0) / 4.0));
  CHECK(rows[0].z == doctest::Approx((9.0 - 8.0) / std::sqrt(8.0)));
  CHECK(rows[1].to == 2);
  CHECK(rows[1].z == doctest::Approx((16.0 - 18.0) / std::sqrt(18.0)));

  const RateComparison dj = compare_double_jumps(jc, 0.8);
  CHECK(dj.empirical == doctest::Approx(0.5));
  CHECK(dj.z == doctest::Approx((5.0 - 8.0) / std::sqrt(8.0)));

  const std::string table = format_comparison_table(rows);
  CHECK(table.find("p10") != std::string::npos);
  CHECK(table.find("p12") != std::string::npos);
}

TEST_CASE("conditional evolution only loses norm") {
  const SystemParams p = driven_three();
  const Matrix h = conditional_hamiltonian(p);

  // i (H - H^dag) is the total decay matrix and must be positive
  // semidefinite, so the no-emission norm can never grow.
  const Matrix gamma = Complex(0, 1) * (h - Matrix(h.adjoint()));
  Eigen::SelfAdjointEigenSolver<Matrix> es(gamma);
  CHECK(es.eigenvalues().minCoeff() > -1e-9 * es.eigenvalues().maxCoeff());

  // Replay the first recorded gap: survival decreases monotonically and
  // reaches the drawn threshold only at the recorded jump time.
  const EmissionRecord rec = simulate(p, 5, 0.05);
  REQUIRE(!rec.events.empty());
  const double tau = rec.events[0].time;
  Vector psi = Vector::Zero(27);
  psi(0) = 1.0;
  Eigen::ComplexEigenSolver<Matrix> ces(Complex(0, -1) * h);
  const Matrix v = ces.eigenvectors();
  const Vector coeff = v.partialPivLu().solve(psi);
  auto survival = [&](double t) {
    Vector scaled = coeff;
    for (int k = 0; k < scaled.size(); ++k)
      scaled(k) *= std::exp(ces.eigenvalues()(k) * t);
    return (v * scaled).squaredNorm();
  };
  double prev = 1.0 + 1e-12;
  for (int step = 1; step <= 8; ++step) {
    const double s = survival(tau * step / 8.0);
    CHECK(s <= prev + 1e-9);
    prev = s;
  }
  CHECK(survival(tau) < 1.0);
}
