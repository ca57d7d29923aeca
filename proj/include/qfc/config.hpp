#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qfc/mean_field.hpp"
#include "qfc/resonator.hpp"
#include "qfc/supermode.hpp"

namespace qfc {

struct BelowAnalysis {
  double delta_s = 0;
  double delta_i = 0;
  double delta_p = 0;
  double b_in = 0;
  double theta_in = 0;
  double theta_s = 0;
  double theta_i = 0;
  double omega_max = 2e9;
  int omega_points = 64;
  double scan_min = 0;  // pump: B_in; coupling: r; angle: theta_s
  double scan_max = 0;
  int scan_points = 64;
};

struct ThresholdAnalysis {
  int mode_max = 4;  // pairs l = 1..mode_max
  double delta_min = 0;
  double delta_max = 0;
  int delta_points = 1;
  double pump_offset = 0;  // delta_p = 2 delta + pump_offset
};

struct MiAnalysis {
  double b_in = 0;
  double delta_min = 0;
  double delta_max = 0;
  int delta_points = 32;
  int mode_max = 50;  // modes l = 0..mode_max
};

struct SqueezeAnalysis {
  double omega_max = 2e9;
  int omega_points = 64;
  BandSelection band = BandSelection::all;
  int coefficient_supermodes = 1;
  double residual_tol = 1e-6;
};

struct SweepAnalysis {
  std::vector<double> b_in;  // one comb run per value
  int workers = 1;
};

struct AnalysisConfig {
  BelowAnalysis below;
  ThresholdAnalysis threshold;
  MiAnalysis mi;
  SqueezeAnalysis squeeze;
  SweepAnalysis sweep;
};

struct RunConfig {
  ResonatorSpec resonator;
  SimConfig sim;
  long spacetime_every = 0;  // 0 disables spacetime.csv
  AnalysisConfig analysis;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  std::vector<std::pair<std::string, std::string>> defaults_filled;  // key, value
  std::string source_text;  // config text after overrides, for hashing
};

/// Parse and validate YAML text. `overrides` are dotted key=value pairs
/// applied before validation. Errors carry the line (1-based) when known.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Canonical YAML rendering; parse_config(emit_config(c)) reproduces c.
std::string emit_config(const RunConfig& cfg);

}  // namespace qfc
