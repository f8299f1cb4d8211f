// Solver microbenchmarks: per-point cost of the symmetry-reduced and
// full-space rate solvers, pipeline construction, and trajectory stepping.

#include <benchmark/benchmark.h>

#include <cmath>

#include <coopjump/model.hpp>
#include <coopjump/rates.hpp>
#include <coopjump/trajectories.hpp>

namespace {

using namespace coopjump;

const double kPi = std::acos(-1.0);

SystemParams v_params() {
  SystemParams p;
  p.scheme = LevelScheme::V;
  p.a3 = 2e8;
  p.omega3 = 5e7;
  p.omega2 = 1e4;
  return p;
}

SystemParams d_params() {
  SystemParams p;
  p.scheme = LevelScheme::D;
  p.a1 = 1.0;
  p.a2 = 1.0;
  p.a3 = 2e8;
  p.omega3 = 1e7;
  return p;
}

Complex c3_at(double a3, double r) {
  return coupling_constant(a3, 2 * kPi * r, kPi / 2);
}

void bm_pipeline_build_v(benchmark::State& state) {
  const SystemParams p = v_params();
  for (auto _ : state) {
    RatePipeline pipe(p);
    benchmark::DoNotOptimize(&pipe);
  }
}
BENCHMARK(bm_pipeline_build_v)->Unit(benchmark::kMillisecond);

void bm_pipeline_build_d(benchmark::State& state) {
  const SystemParams p = d_params();
  for (auto _ : state) {
    RatePipeline pipe(p);
    benchmark::DoNotOptimize(&pipe);
  }
}
BENCHMARK(bm_pipeline_build_d)->Unit(benchmark::kMillisecond);

void bm_reduced_point_v(benchmark::State& state) {
  const SystemParams p = v_params();
  const RatePipeline pipe(p);
  double r = 0.8;
  for (auto _ : state) {
    const RateSet rs = pipe.rates_at(c3_at(p.a3, r));
    benchmark::DoNotOptimize(rs.p(3, 2));
    r += 1e-4;  // avoid any same-input shortcuts
  }
}
BENCHMARK(bm_reduced_point_v)->Unit(benchmark::kMillisecond);

void bm_reduced_point_d(benchmark::State& state) {
  const SystemParams p = d_params();
  const RatePipeline pipe(p);
  double r = 0.8;
  for (auto _ : state) {
    const RateSet rs = pipe.rates_at(c3_at(p.a3, r));
    benchmark::DoNotOptimize(rs.p(3, 2));
    r += 1e-4;
  }
}
BENCHMARK(bm_reduced_point_d)->Unit(benchmark::kMillisecond);

void bm_full_point_v(benchmark::State& state) {
  SystemParams p = v_params();
  double r = 0.8;
  for (auto _ : state) {
    p.c3 = c3_at(p.a3, r);
    const RateSet rs = transition_rates(p, SolvePath::full);
    benchmark::DoNotOptimize(rs.p(3, 2));
    r += 1e-4;
  }
}
BENCHMARK(bm_full_point_v)->Unit(benchmark::kMillisecond);

void bm_full_point_d(benchmark::State& state) {
  SystemParams p = d_params();
  double r = 0.8;
  for (auto _ : state) {
    p.c3 = c3_at(p.a3, r);
    const RateSet rs = transition_rates(p, SolvePath::full);
    benchmark::DoNotOptimize(rs.p(3, 2));
    r += 1e-4;
  }
}
BENCHMARK(bm_full_point_d)->Unit(benchmark::kMillisecond);

void bm_closed_form_d(benchmark::State& state) {
  SystemParams p = d_params();
  p.c3 = c3_at(p.a3, 0.8);
  for (auto _ : state) {
    const RateSet rs = closed_form(p);
    benchmark::DoNotOptimize(rs.p(3, 2));
  }
}
BENCHMARK(bm_closed_form_d);

void bm_trajectory_events(benchmark::State& state) {
  // throughput of the stochastic unraveling, reported as events per second
  SystemParams p;
  p.scheme = LevelScheme::D;
  p.a1 = 0.15;
  p.a2 = 1.0 / 3.0;
  p.a3 = 2e3;
  p.omega3 = 5e3;
  p.c3 = c3_at(p.a3, 1.2);
  std::uint64_t seed = 1;
  long events = 0;
  for (auto _ : state) {
    const EmissionRecord rec = simulate(p, seed++, 2.0);
    events += static_cast<long>(rec.events.size());
    benchmark::DoNotOptimize(rec.events.data());
  }
  state.counters["events_per_s"] =
      benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(bm_trajectory_events)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
