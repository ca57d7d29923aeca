#pragma once

#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qfc/below_threshold.hpp"
#include "qfc/config.hpp"
#include "qfc/mi_gain.hpp"

namespace qfc {

enum class Subcommand { params, below, threshold, mi, comb, sweep, squeeze, oracle };

Subcommand parse_subcommand(std::string_view name);
const char* subcommand_name(Subcommand s);

struct RunOptions {
  ScanAxis scan = ScanAxis::pump_amplitude;
  MiBranch branch = MiBranch::trivial;
  std::optional<std::string> resume;      // comb: continue from checkpoint
  bool sweep = false;                     // comb: ramp the detuning
  std::optional<std::string> checkpoint;  // squeeze: background
};

struct RunOutcome {
  int exit_code = 0;
  std::vector<std::string> files;  // relative to output_dir
  std::string manifest_path;
  nlohmann::json summary;
  nlohmann::json error;  // null on success
};

/// Execute one subcommand, write its CSVs and an atomically replaced
/// manifest_<subcommand>.json into cfg.output_dir. Errors are caught and
/// reported through the outcome (and the manifest), never rethrown.
RunOutcome run(Subcommand cmd, const RunConfig& cfg, const RunOptions& opt, std::ostream& log);

/// 0 ok, 2 config error, 3 numerical divergence, 4 stability-gate rejection, 1 anything else.
int exit_code_for(const std::exception& e);

/// {"type", "message", "exit_code", ...} for any exception.
nlohmann::json error_record(const std::exception& e);

std::string code_version();

}  // namespace qfc
