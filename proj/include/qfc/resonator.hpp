#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "qfc/types.hpp"

namespace qfc {

/// Device parameters of the chi(2) microring. Frequencies and rates are in
/// rad/s, lengths in m, group delays in s/m, GVD in s^2/m.
struct ResonatorParams {
  double omega0 = 0;  // subharmonic reference resonance
  double omegap = 0;  // pump resonance
  double d1 = 0;      // 2 pi nu_f
  double nu_f = 0;    // free spectral range, Hz
  double d2 = 0;      // subharmonic-band GVD coefficient D2
  double kp1 = 0;
  double kpp1 = 0;
  double kp2 = 0;
  double kpp2 = 0;
  double dkp = 0;  // walk-off kp2 - kp1
  double radius = 0;
  double length = 0;
  double q0 = 0;
  double coupling_ratio = 0;
  double mu = 0;
  double gamma = 0;
  double big_gamma = 0;
  double big_gamma_pump = 0;  // total loss of the pump band; equals big_gamma unless overridden
  double q_ex = 0;
  double q_loaded = 0;
  double a_eff = 0;
  double chi2 = 0;  // informational only
  double g0 = 0;
  double eps1 = 0;
};

enum class Band { subharmonic, pump };

/// Absolute mode label. The pump band is centred on mode 959.
struct ModeIndex {
  int l = 0;
  Band band = Band::subharmonic;
};

inline constexpr int kPumpCenterMode = 959;

/// Relative index range [-N/2+1, N/2] shared by both bands.
inline int first_relative_mode(int n) { return -n / 2 + 1; }
inline int last_relative_mode(int n) { return n / 2; }
/// Absolute label of the relative index `rel` in a band.
inline int absolute_mode(int rel, Band band) { return band == Band::pump ? rel + kPumpCenterMode : rel; }
bool mode_in_range(ModeIndex m, int n);

/// Raw inputs from which a ResonatorParams is derived.
struct ResonatorSpec {
  double omega0 = 0;
  double omegap = 0;
  std::optional<double> fsr_hz;  // either this or kp1 (with radius) must be set
  std::optional<double> kp1;
  double radius = 0;
  double kpp1 = 0;
  double kp2 = 0;
  double kpp2 = 0;
  double q0 = 0;
  double coupling_ratio = 0;
  double a_eff = 0;
  double g0 = 0;
  double chi2 = 0;
  double eps1 = 0;
  std::optional<double> big_gamma_pump;
};

/// Derive every dependent quantity. Throws ConfigError on non-physical input.
ResonatorParams make_params(const ResonatorSpec& spec);

/// (sum |F|^2 dA)^2 / (sum |F|^4 dA). Throws DegenerateInputError for an all-zero grid.
double effective_mode_area(const Eigen::Ref<const Eigen::ArrayXXd>& field_magnitude, double cell_area);

/// omega0 + D1 l + D2 l^2 / 2.
double resonance_frequency(int l, double omega0, double d1, double d2);

/// omega_l - omega0 - D1 l under the quadratic truncation.
double integrated_dispersion(int l, const ResonatorParams& p);

struct Detunings {
  double delta_p = 0;
  double delta = 0;
};

/// Cold-cavity pump detuning and the subharmonic detuning it implies.
Detunings detunings(double omega0, double omegap, double pump_laser_freq);

/// Pump detuning that corresponds to subharmonic detuning `delta` (inverse of the above).
double pump_detuning_for(double delta, double omega0, double omegap);

struct CouplingRates {
  double mu = 0;
  double gamma = 0;
  double big_gamma = 0;
  double q_ex = 0;
  double q_loaded = 0;
};

CouplingRates coupling_rates(double q0, double coupling_ratio, double omega0);

/// Intrinsic loss expressed as a propagation loss, mu / (L nu_f), in 1/m.
double absorption_coefficient(const ResonatorParams& p);

/// nu_f = 1 / (k'_1 L).
double fsr_from_group_index(double kp1, double length);

using RefractiveIndex = std::function<double(double)>;

/// Delta k = [w_p n(w_p) - w_s n(w_s) - w_i n(w_i)] / c.
double phase_mismatch(double omega_p, double omega_s, double omega_i, const RefractiveIndex& n,
                      double c = PhysicalConstants{}.c);

/// Piecewise-linear n(omega) through tabulated points (sorted by omega,
/// clamped outside the table).
RefractiveIndex tabulated_index(std::vector<std::pair<double, double>> omega_n);

/// g0 = 2 eps0 chi2 sqrt(hbar ws wi wp / (16 pi eps0^3 eps1^3 A_eff R)).
double nonlinear_coupling(double chi2, double omega_s, double omega_i, double omega_p, double eps1,
                          double a_eff, double radius, const PhysicalConstants& k = {});

/// B_in = sqrt(P_in / (hbar Omega_p)).
double pump_amplitude(double p_in, double pump_laser_freq, double hbar = PhysicalConstants{}.hbar);

/// Detuning of subharmonic mode l from the comb line: Delta + D2 l^2 / 2.
double subharmonic_detuning(int l, double delta, const ResonatorParams& p);

/// Detuning of pump mode with relative index m (absolute 959 + m), including
/// walk-off and pump-band GVD in the frame co-moving with the subharmonic.
double pump_mode_detuning(int m, double delta_p, const ResonatorParams& p);

/// Per-mode detunings for relative indices -N/2+1..N/2 in ascending order.
VectorXd subharmonic_detunings(int n, double delta, const ResonatorParams& p);
VectorXd pump_detunings(int n, double delta_p, const ResonatorParams& p);

}  // namespace qfc
