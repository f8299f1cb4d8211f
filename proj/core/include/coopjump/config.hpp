#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "coopjump/model.hpp"

namespace coopjump {

// Full description of one run, shared by every CLI subcommand.  Parsed from
// simple `key = value` files (# comments, blank lines ignored) or from a
// named preset; later keys override earlier ones.
struct RunConfig {
  SystemParams params;   // rates, lasers, scheme; c3 may be set directly
  Geometry geometry;     // separation and dipole orientation
  bool explicit_c3 = false;  // c3_re/c3_im given: skip the geometry coupling

  // Resolution window for double/triple-jump statistics.
  double t_m = 1e-3;

  // Distance grid (units of the strong-transition wavelength).
  double r_start = 0.5;
  double r_stop = 2.0;
  int r_points = 151;
  bool log_grid = false;

  // Trajectory statistics.
  int seeds = 8;
  std::uint64_t seed_base = 1;
  double duration = 100.0;
  double window = 0.0;  // segmentation window; 0 = default 20 / bright_rate
  double event_cap = 1e8;
};

// Applies one key/value pair; throws ConfigError naming the key for unknown
// keys or malformed values.
void apply_config_key(RunConfig& cfg, const std::string& key, const std::string& value);

// Applies every key of a config stream/file on top of an existing config
// (presets and command-line layering); ConfigError diagnostics carry line
// numbers.
void apply_config_stream(RunConfig& cfg, std::istream& in,
                         const std::string& source_name = "<config>");
void merge_config_file(RunConfig& cfg, const std::string& path);

// Same, starting from the defaults.
RunConfig parse_config(std::istream& in, const std::string& source_name = "<config>");
RunConfig load_config_file(const std::string& path);

// Built-in parameter sets.
RunConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// Resolves the geometry into coupling constants (unless c3 was explicit)
// and validates; returns the validated parameter set for a given separation.
SystemParams resolve_params(const RunConfig& cfg, double r_over_lambda3);
SystemParams resolve_params(const RunConfig& cfg);

}  // namespace coopjump
