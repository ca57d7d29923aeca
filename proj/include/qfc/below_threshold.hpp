#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "qfc/resonator.hpp"
#include "qfc/types.hpp"

namespace qfc {

/// Single signal/idler pair driven by one pump mode.
struct ThreeModeConfig {
  double delta_s = 0;
  double delta_i = 0;
  double delta_p = 0;
  double b_in = 0;
  double theta_in = 0;
  ResonatorParams params;
};

/// Build a config with delta_s = delta_i = delta.
ThreeModeConfig three_mode_config(const ResonatorParams& p, double delta, double delta_p, double b_in,
                                  double theta_in = 0.0);

enum class Branch { below, above };

struct SteadyState {
  double a_mag = 0;
  double b_mag = 0;
  double theta_p = 0;
  double theta_sum = 0;  // theta_s + theta_i; only meaningful above threshold
  Branch branch = Branch::below;
  /// Smaller non-negative A root when two coexist (bistable bending).
  std::optional<double> a_mag_secondary;
};

/// Stationary amplitudes. Returns the A > 0 branch whenever one exists.
SteadyState steady_state(const ThreeModeConfig& cfg);

struct Threshold {
  double b_in_th = 0;
  double p_th = 0;  // W, using hbar * (omegap - delta_p) per photon
};

/// Onset of A > 0 for a symmetric pair. Throws BelowOscillationError if g0 = 0.
Threshold threshold_pump(double delta, double delta_p, const ResonatorParams& p);

/// Linearized drift on the A = 0 background, ordering (a_s, a_s^dag, a_i, a_i^dag).
/// Throws StabilityError when any eigenvalue has Re >= 0.
MatrixXc fluctuation_matrix_below(const ThreeModeConfig& cfg);

/// Same matrix without the stability gate.
MatrixXc fluctuation_matrix_below_unchecked(const ThreeModeConfig& cfg);

struct NoiseMatrix4 {
  double omega = 0;
  MatrixXc s;
};

/// Output spectral density of the four output operators at Fourier frequency omega.
NoiseMatrix4 output_noise_spectrum(double omega, const ThreeModeConfig& cfg);

/// Same, from a precomputed drift matrix.
NoiseMatrix4 output_noise_spectrum(double omega, const MatrixXc& drift, double gamma, double mu);

struct DuanResult {
  double c_s = 0;
  double theta_s = 0;
  double theta_i = 0;
  double omega = 0;
  double var_x_minus = 0;
  double var_y_plus = 0;
};

/// The 4x4 readout transform onto (y+, x+, y-, x-).
MatrixXc readout_transform(double theta_s, double theta_i);

/// Symmetrized sum/difference quadrature spectrum.
MatrixXc quadrature_spectrum(const NoiseMatrix4& noise, double theta_s, double theta_i);

DuanResult duan_criterion(const NoiseMatrix4& noise, double theta_s, double theta_i);

/// Smallest var(x-) over readout angles, in dB relative to vacuum.
struct TwoModeSqueezing {
  double var_x_minus = 0;
  double db = 0;
  double theta_s = 0;
  double theta_i = 0;
};
TwoModeSqueezing optimal_two_mode_squeezing(const NoiseMatrix4& noise);

enum class ScanAxis { pump_amplitude, coupling_ratio, readout_angle };

struct EntanglementMap {
  ScanAxis axis = ScanAxis::pump_amplitude;
  std::vector<double> axis_values;
  std::vector<double> omega;
  MatrixXd c_s;                         // rows: axis values, cols: omega
  std::vector<double> optimal_omega;    // argmin over omega, per axis value
  std::vector<double> argmin_axis;      // argmin over axis value, per omega
  std::vector<double> argmax_axis;      // argmax over axis value, per omega
};

/// Dense C_s map. For the readout_angle axis the grid holds theta_s and
/// theta_i is held fixed; otherwise both angles are fixed.
EntanglementMap entanglement_map(ScanAxis axis, const std::vector<double>& grid,
                                 const std::vector<double>& omega_grid, const ThreeModeConfig& cfg,
                                 double theta_s, double theta_i);

/// Copy of p with a different external coupling ratio (mu held fixed).
ResonatorParams with_coupling_ratio(const ResonatorParams& p, double coupling_ratio);

/// Linear grid of n points on [lo, hi].
std::vector<double> linear_grid(double lo, double hi, int n);

inline double to_db(double variance) { return 10.0 * std::log10(variance / kVacuumVariance); }

}  // namespace qfc
