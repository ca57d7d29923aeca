#pragma once

#include <vector>

#include "qfc/resonator.hpp"
#include "qfc/types.hpp"

namespace qfc {

struct ResponseSample {
  double omega_offset = 0;
  double x = 0;
  cplx i_hat{0.5, 0.0};
};

/// (1 - i x - exp(-i x)) / x^2, series-evaluated for |x| < 1.
cplx response_kernel(double x);

/// Pump-band phase argument x = -dk' L W - k''_2 L W^2 / 2 and the kernel value.
ResponseSample response(double omega_offset, const ResonatorParams& p);

/// iota_plus / iota_minus = I(W) +/- conj(I(-W)).
cplx iota_plus(double omega_offset, const ResonatorParams& p);
cplx iota_minus(double omega_offset, const ResonatorParams& p);

struct SteadyIntensity {
  double plus = 0;   // |a0|^2 with the + root
  double minus = 0;  // |a0|^2 with the - root
  bool plus_physical = false;
  bool minus_physical = false;
  double phase_plus = 0;  // phase of a0 on the + root
};

/// Constant-envelope intensity of the reduced equation. Throws
/// BelowOscillationError when the discriminant is negative.
SteadyIntensity steady_intensity(double b_in, double delta, const ResonatorParams& p);

enum class MiBranch { trivial, nontrivial };

struct MiGain {
  double omega_offset = 0;
  double lambda_plus_re = 0;
  cplx lambda_plus = 0;
  cplx lambda_minus = 0;
  MiBranch branch = MiBranch::trivial;
};

MiGain gain_trivial(double omega_offset, double b_in, double delta, const ResonatorParams& p);

/// Uses the + root of steady_intensity; throws BelowOscillationError if it is not physical.
MiGain gain_nontrivial(double omega_offset, double b_in, double delta, const ResonatorParams& p);

/// Re lambda_plus on a (delta, mode l) grid with W = D1 l. Rows: delta, cols: l.
/// Points where the branch does not exist are NaN.
MatrixXd gain_map(MiBranch branch, const std::vector<double>& deltas, const std::vector<int>& modes, double b_in,
                  const ResonatorParams& p);

/// Smallest B_in at which some mode in `modes` has zero trivial-branch gain.
double trivial_zero_gain_pump(double delta, const std::vector<int>& modes, const ResonatorParams& p);

}  // namespace qfc
