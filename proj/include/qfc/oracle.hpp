#pragma once

#include <string>
#include <vector>

#include "qfc/resonator.hpp"

namespace qfc {

struct OracleCheck {
  std::string name;
  double value = 0;  // measured discrepancy
  double tolerance = 0;
  bool passed = false;
  std::string detail;
};

/// Small-N cross-module equivalence checks on `device`. Each check catches
/// its own exceptions and reports them as failures.
std::vector<OracleCheck> run_oracle(const ResonatorSpec& device, const std::string& scratch_dir);

}  // namespace qfc
