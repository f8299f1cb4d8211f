// coopjump: transition rates, distance sweeps and trajectory statistics for
// two or three dipole-interacting three-level emitters.
//
// Subcommands:
//   rates         full rate table over the distance grid (numeric + closed
//                 form + independent-atom baseline + jump statistics)
//   sweep         compact baseline-ratio table over the distance grid
//   djtj          double/triple-jump rates over the distance grid
//   trajectories  stochastic wave-function runs: per-seed jump counts and a
//                 pooled empirical-vs-predicted comparison
//
// Exit codes: 0 success, 2 configuration error, 3 unphysical configuration,
// 4 numerical/segmentation failure.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coopjump/config.hpp"
#include "coopjump/csv.hpp"
#include "coopjump/errors.hpp"
#include "coopjump/rates.hpp"
#include "coopjump/sweep.hpp"
#include "coopjump/trajectories.hpp"

namespace {

using namespace coopjump;

struct CommonOpts {
  std::string preset_name;
  std::string config_path;
  std::string out_path;

  double r = 0.0;
  double r_start = 0.0;
  double r_stop = 0.0;
  int r_points = 0;
  bool log_grid = false;
  double tm = 0.0;
  int seeds = 0;
  double duration = 0.0;
  double window = 0.0;
  long long seed_base = 0;
  double event_cap = 0.0;

  CLI::Option* opt_r = nullptr;
  CLI::Option* opt_r_start = nullptr;
  CLI::Option* opt_r_stop = nullptr;
  CLI::Option* opt_r_points = nullptr;
  CLI::Option* opt_log_grid = nullptr;
  CLI::Option* opt_tm = nullptr;
  CLI::Option* opt_seeds = nullptr;
  CLI::Option* opt_duration = nullptr;
  CLI::Option* opt_window = nullptr;
  CLI::Option* opt_seed_base = nullptr;
  CLI::Option* opt_event_cap = nullptr;
};

void add_common_options(CLI::App* sub, CommonOpts& c) {
  sub->add_option("--preset", c.preset_name,
                  "Start from a named parameter set (fig4 fig5 fig6 fig7 fig8 desk-v desk-d)");
  sub->add_option("--config", c.config_path, "key = value configuration file (applied after --preset)");
  sub->add_option("--out", c.out_path,
                  "Output CSV path (rates/sweep/djtj; default stdout) or output directory (trajectories)");
  c.opt_r = sub->add_option("--r", c.r, "Single separation in units of the strong-transition wavelength");
  c.opt_r_start = sub->add_option("--r-start", c.r_start, "Sweep start separation");
  c.opt_r_stop = sub->add_option("--r-stop", c.r_stop, "Sweep stop separation");
  c.opt_r_points = sub->add_option("--r-points", c.r_points, "Number of sweep points");
  c.opt_log_grid = sub->add_flag("--log-grid", c.log_grid, "Logarithmic separation grid");
  c.opt_tm = sub->add_option("--tm", c.tm, "Resolution window for double/triple jumps [s]");
  c.opt_seeds = sub->add_option("--seeds", c.seeds, "Number of trajectory seeds");
  c.opt_duration = sub->add_option("--duration", c.duration, "Simulated time per seed [s]");
  c.opt_window = sub->add_option("--window", c.window, "Segmentation window [s] (0 = 20/bright_rate)");
  c.opt_seed_base = sub->add_option("--seed-base", c.seed_base, "First seed value");
  c.opt_event_cap = sub->add_option("--event-cap", c.event_cap, "Refuse runs expected to exceed this many emissions");
}

RunConfig build_config(const CommonOpts& c) {
  RunConfig cfg;
  if (!c.preset_name.empty()) cfg = preset(c.preset_name);
  if (!c.config_path.empty()) merge_config_file(cfg, c.config_path);
  if (c.opt_r && c.opt_r->count()) {
    if (!(c.r > 0.0)) throw ConfigError("--r must be positive");
    cfg.geometry.r_over_lambda3 = c.r;
    cfg.r_start = c.r;
    cfg.r_stop = c.r;
    cfg.r_points = 1;
  }
  if (c.opt_r_start->count()) cfg.r_start = c.r_start;
  if (c.opt_r_stop->count()) cfg.r_stop = c.r_stop;
  if (c.opt_r_points->count()) cfg.r_points = c.r_points;
  if (c.opt_log_grid->count()) cfg.log_grid = c.log_grid;
  if (c.opt_tm->count()) cfg.t_m = c.tm;
  if (c.opt_seeds->count()) cfg.seeds = c.seeds;
  if (c.opt_duration->count()) cfg.duration = c.duration;
  if (c.opt_window->count()) cfg.window = c.window;
  if (c.opt_seed_base->count()) {
    if (c.seed_base < 0) throw ConfigError("--seed-base must be nonnegative");
    cfg.seed_base = static_cast<std::uint64_t>(c.seed_base);
  }
  if (c.opt_event_cap->count()) cfg.event_cap = c.event_cap;
  return cfg;
}

void emit_table(const std::string& out_path, const CsvTable& table) {
  if (out_path.empty()) {
    write_csv(std::cout, table);
  } else {
    write_csv_file(out_path, table);
  }
}

// The six structurally allowed rates, in a fixed column order.
const std::vector<std::pair<int, int>> kAdjacent = {
    {0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 3}, {3, 2}};

void append_adjacent(std::vector<double>& row, const Eigen::Matrix4d& p) {
  for (const auto& [i, j] : kAdjacent) row.push_back(p(i, j));
}

double max_nonadjacent(const Eigen::Matrix4d& p) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (std::abs(i - j) >= 2) m = std::max(m, std::abs(p(i, j)));
  return m;
}

void run_rates(const CommonOpts& c) {
  const RunConfig cfg = build_config(c);
  const SweepResult sweep = run_sweep(cfg);

  CsvTable table;
  table.header = {"r", "c3_re", "c3_im"};
  for (const char* suffix : {"", "_closed", "_indep"})
    for (const auto& [i, j] : kAdjacent)
      table.header.push_back("p" + std::to_string(i) + std::to_string(j) + suffix);
  table.header.insert(table.header.end(),
                      {"n_dj", "n_tj", "n_dj_indep", "n_tj_indep",
                       "max_nonadjacent", "resolvent_norm"});

  for (const SweepRow& row : sweep.rows) {
    std::vector<double> r = {row.r, row.c3.real(), row.c3.imag()};
    append_adjacent(r, row.numeric.p);
    append_adjacent(r, row.closed.p);
    append_adjacent(r, sweep.baseline.p);
    r.push_back(row.numeric.n_dj);
    r.push_back(row.numeric.n_tj);
    r.push_back(sweep.baseline.n_dj);
    r.push_back(sweep.baseline.n_tj);
    r.push_back(max_nonadjacent(row.numeric.p));
    r.push_back(row.numeric.resolvent_norm);
    table.rows.push_back(std::move(r));
  }
  emit_table(c.out_path, table);
}

void run_ratio_sweep(const CommonOpts& c) {
  const RunConfig cfg = build_config(c);
  const SweepResult sweep = run_sweep(cfg);

  CsvTable table;
  table.header = {"r", "c3_re", "c3_im"};
  for (const auto& [i, j] : kAdjacent)
    table.header.push_back("p" + std::to_string(i) + std::to_string(j) + "_ratio");
  table.header.insert(table.header.end(), {"n_dj_ratio", "n_tj_ratio"});

  for (const SweepRow& row : sweep.rows) {
    std::vector<double> r = {row.r, row.c3.real(), row.c3.imag()};
    for (const auto& [i, j] : kAdjacent)
      r.push_back(row.numeric.p(i, j) / sweep.baseline.p(i, j));
    r.push_back(row.numeric.n_dj / sweep.baseline.n_dj);
    r.push_back(row.numeric.n_tj / sweep.baseline.n_tj);
    table.rows.push_back(std::move(r));
  }
  emit_table(c.out_path, table);
}

void run_djtj(const CommonOpts& c) {
  const RunConfig cfg = build_config(c);
  const SweepResult sweep = run_sweep(cfg);

  CsvTable table;
  table.header = {"r",          "c3_re",      "c3_im",       "t_m",
                  "n_dj",       "n_tj",       "n_dj_exact",  "n_tj_exact",
                  "n_dj_closed", "n_tj_closed", "n_dj_indep", "n_tj_indep"};
  for (const SweepRow& row : sweep.rows) {
    std::vector<double> r = {row.r, row.c3.real(), row.c3.imag(), cfg.t_m};
    r.push_back(row.numeric.n_dj);
    r.push_back(row.numeric.n_tj);
    r.push_back(double_jump_components(row.numeric, cfg.t_m).total());
    r.push_back(triple_jump_exact(row.numeric, cfg.t_m));
    r.push_back(row.closed.n_dj);
    r.push_back(row.closed.n_tj);
    r.push_back(sweep.baseline.n_dj);
    r.push_back(sweep.baseline.n_tj);
    table.rows.push_back(std::move(r));
  }
  emit_table(c.out_path, table);
}

std::string seed_file_name(std::uint64_t seed, const char* what) {
  std::ostringstream os;
  os << "seed_" << seed << "_" << what << ".csv";
  return os.str();
}

void run_trajectories(const CommonOpts& c) {
  const RunConfig cfg = build_config(c);
  if (cfg.seeds < 1) throw ConfigError("trajectories: seeds must be at least 1");
  if (!(cfg.duration >= 0.0)) throw ConfigError("trajectories: duration must be nonnegative");

  const SystemParams params = resolve_params(cfg);
  RateSet predicted = transition_rates(params);
  finalize_rates(predicted, cfg.t_m);

  const double bright = bright_rate_per_atom(params);
  const double window = cfg.window > 0.0 ? cfg.window : 20.0 / bright;
  const double t_min = predicted.T.minCoeff();
  if (window >= 0.5 * t_min) {
    std::cerr << "warning: segmentation window " << window
              << " s is not small against the shortest mean period " << t_min
              << " s; intensity periods shorter than the window are merged away "
                 "and the empirical rates will be biased low\n";
  }
  if (cfg.t_m >= 0.5 * t_min) {
    std::cerr << "warning: resolution window t_m = " << cfg.t_m
              << " s is not small against the shortest mean period " << t_min
              << " s; the leading-order double/triple-jump formulas saturate\n";
  }

  TrajectoryOptions topts;
  topts.max_events = cfg.event_cap;

  const int n = cfg.seeds;
  std::vector<EmissionRecord> records(static_cast<std::size_t>(n));
  std::vector<PeriodTrace> traces(static_cast<std::size_t>(n));
  std::vector<JumpCounts> counts(static_cast<std::size_t>(n));
  parallel_for(n, [&](int s) {
    const std::uint64_t seed = cfg.seed_base + static_cast<std::uint64_t>(s);
    records[static_cast<std::size_t>(s)] = simulate(params, seed, cfg.duration, topts);
    traces[static_cast<std::size_t>(s)] =
        segment_periods(records[static_cast<std::size_t>(s)], cfg.window, bright);
    counts[static_cast<std::size_t>(s)] = count_jumps(traces[static_cast<std::size_t>(s)], cfg.t_m);
  });

  if (!c.out_path.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(c.out_path);
    CsvTable count_table;
    count_table.header = {"seed",  "duration", "k01", "k10", "k12", "k21", "k23", "k32",
                          "time0", "time1",    "time2", "time3", "unresolved",
                          "double_jumps", "triple_jumps"};
    for (int s = 0; s < n; ++s) {
      const std::uint64_t seed = cfg.seed_base + static_cast<std::uint64_t>(s);
      const EmissionRecord& rec = records[static_cast<std::size_t>(s)];
      const PeriodTrace& trace = traces[static_cast<std::size_t>(s)];
      const JumpCounts& jc = counts[static_cast<std::size_t>(s)];

      CsvTable events;
      events.header = {"time", "channel"};
      for (const auto& e : rec.events)
        events.rows.push_back({e.time, static_cast<double>(e.channel)});
      write_csv_file((fs::path(c.out_path) / seed_file_name(seed, "events")).string(), events);

      CsvTable periods;
      periods.header = {"start", "end", "level"};
      for (const auto& p : trace.periods)
        periods.rows.push_back({p.start, p.end, static_cast<double>(p.level)});
      write_csv_file((fs::path(c.out_path) / seed_file_name(seed, "periods")).string(), periods);

      std::vector<double> row = {static_cast<double>(seed), jc.duration};
      for (const auto& [i, j] : kAdjacent) row.push_back(jc.k(i, j));
      for (double t : jc.time_at_level) row.push_back(t);
      row.push_back(static_cast<double>(jc.unresolved));
      row.push_back(static_cast<double>(jc.double_jumps));
      row.push_back(static_cast<double>(jc.triple_jumps));
      count_table.rows.push_back(std::move(row));
    }
    write_csv_file((fs::path(c.out_path) / "counts.csv").string(), count_table);
  }

  const JumpCounts pooled = pool_counts(counts);
  std::vector<RateComparison> comps = compare_rates(pooled, predicted.p);
  comps.push_back(compare_double_jumps(pooled, double_jump_rate_closed(predicted.p, cfg.t_m)));
  std::cout << format_comparison_table(comps);

  if (!c.out_path.empty()) {
    CsvTable cmp;
    cmp.header = {"from", "to", "predicted", "empirical", "sigma", "z", "count", "time_at_from"};
    for (const auto& r : comps)
      cmp.rows.push_back({static_cast<double>(r.from), static_cast<double>(r.to), r.predicted,
                          r.empirical, r.sigma, r.z, r.count, r.time_at_from});
    write_csv_file((std::filesystem::path(c.out_path) / "pooled_comparison.csv").string(), cmp);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "coopjump: quantum-jump statistics of two or three dipole-interacting "
      "three-level emitters (intensity-period transition rates, double/triple "
      "jump rates, stochastic trajectory validation)"};
  app.require_subcommand(1);

  CommonOpts rates_opts, sweep_opts, djtj_opts, traj_opts;

  CLI::App* rates = app.add_subcommand(
      "rates", "Rate table over the separation grid: numeric, closed form, baseline");
  add_common_options(rates, rates_opts);
  rates->callback([&]() { run_rates(rates_opts); });

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Baseline-ratio table over the separation grid (figure curves)");
  add_common_options(sweep, sweep_opts);
  sweep->callback([&]() { run_ratio_sweep(sweep_opts); });

  CLI::App* djtj = app.add_subcommand(
      "djtj", "Double/triple-jump rates over the separation grid");
  add_common_options(djtj, djtj_opts);
  djtj->callback([&]() { run_djtj(djtj_opts); });

  CLI::App* traj = app.add_subcommand(
      "trajectories", "Stochastic wave-function runs with pooled rate comparison");
  add_common_options(traj, traj_opts);
  traj->callback([&]() { run_trajectories(traj_opts); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const coopjump::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const coopjump::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return 3;
  } catch (const coopjump::UnphysicalConfigError& e) {
    std::cerr << "unphysical configuration: " << e.what() << "\n";
    return 3;
  } catch (const coopjump::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const coopjump::SegmentationError& e) {
    std::cerr << "segmentation failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
