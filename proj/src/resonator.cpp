#include "qfc/resonator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qfc/errors.hpp"

namespace qfc {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(std::string("resonator.") + name + " must be positive and finite (got " +
                      std::to_string(v) + ")");
}

void require_non_negative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw ConfigError(std::string("resonator.") + name + " must be non-negative and finite (got " +
                      std::to_string(v) + ")");
}

}  // namespace

bool mode_in_range(ModeIndex m, int n) {
  const int rel = m.band == Band::pump ? m.l - kPumpCenterMode : m.l;
  return rel >= first_relative_mode(n) && rel <= last_relative_mode(n);
}

ResonatorParams make_params(const ResonatorSpec& s) {
  require_positive(s.omega0, "omega0");
  require_positive(s.omegap, "omegap");
  require_positive(s.radius, "radius");
  require_positive(s.q0, "q0");
  require_positive(s.coupling_ratio, "coupling_ratio");
  require_positive(s.a_eff, "a_eff");
  require_non_negative(s.g0, "g0");
  require_non_negative(s.eps1, "eps1");  // only needed to derive g0 from chi2

  ResonatorParams p;
  p.omega0 = s.omega0;
  p.omegap = s.omegap;
  p.radius = s.radius;
  p.length = 2.0 * kPi * s.radius;
  if (s.fsr_hz) {
    require_positive(*s.fsr_hz, "fsr_hz");
    p.nu_f = *s.fsr_hz;
    p.kp1 = s.kp1 ? *s.kp1 : 1.0 / (p.nu_f * p.length);
  } else if (s.kp1) {
    require_positive(*s.kp1, "kp1");
    p.kp1 = *s.kp1;
    p.nu_f = fsr_from_group_index(p.kp1, p.length);
  } else {
    throw ConfigError("resonator: one of fsr_hz or kp1 is required");
  }
  p.d1 = 2.0 * kPi * p.nu_f;
  p.kpp1 = s.kpp1;
  p.kp2 = s.kp2 > 0.0 ? s.kp2 : p.kp1;
  p.kpp2 = s.kpp2;
  p.dkp = p.kp2 - p.kp1;
  // D_int of the mean-field operator: -k''_1 L nu_f D1^2 multiplies l^2 / 2.
  p.d2 = -p.kpp1 * p.length * p.nu_f * p.d1 * p.d1;

  p.q0 = s.q0;
  p.coupling_ratio = s.coupling_ratio;
  const CouplingRates r = coupling_rates(s.q0, s.coupling_ratio, s.omega0);
  p.mu = r.mu;
  p.gamma = r.gamma;
  p.big_gamma = r.big_gamma;
  p.q_ex = r.q_ex;
  p.q_loaded = r.q_loaded;
  if (s.big_gamma_pump) {
    require_positive(*s.big_gamma_pump, "gamma_pump_total");
    if (*s.big_gamma_pump < p.gamma)
      throw ConfigError("resonator.gamma_pump_total must be at least the coupling rate gamma");
    p.big_gamma_pump = *s.big_gamma_pump;
  } else {
    p.big_gamma_pump = p.big_gamma;
  }

  p.a_eff = s.a_eff;
  p.chi2 = s.chi2;
  p.g0 = s.g0;
  p.eps1 = s.eps1;
  return p;
}

double effective_mode_area(const Eigen::Ref<const Eigen::ArrayXXd>& f, double cell_area) {
  if (f.size() == 0) throw DegenerateInputError("effective_mode_area: empty grid");
  if (!(cell_area > 0.0)) throw DegenerateInputError("effective_mode_area: cell area must be positive");
  const Eigen::ArrayXXd i2 = f.square();
  const double s2 = i2.sum() * cell_area;
  const double s4 = i2.square().sum() * cell_area;
  if (!(s4 > 0.0)) throw DegenerateInputError("effective_mode_area: field is identically zero");
  return s2 * s2 / s4;
}

double resonance_frequency(int l, double omega0, double d1, double d2) {
  const double x = l;
  return omega0 + d1 * x + 0.5 * d2 * x * x;
}

double integrated_dispersion(int l, const ResonatorParams& p) {
  const double x = l;
  return 0.5 * p.d2 * x * x;
}

Detunings detunings(double omega0, double omegap, double pump_laser_freq) {
  Detunings d;
  d.delta_p = omegap - pump_laser_freq;
  d.delta = 0.5 * (2.0 * omega0 - omegap + d.delta_p);
  return d;
}

double pump_detuning_for(double delta, double omega0, double omegap) {
  return 2.0 * delta - 2.0 * omega0 + omegap;
}

CouplingRates coupling_rates(double q0, double coupling_ratio, double omega0) {
  if (!(q0 > 0.0)) throw ConfigError("coupling_rates: q0 must be positive");
  if (!(coupling_ratio > 0.0)) throw ConfigError("coupling_rates: coupling_ratio must be positive");
  if (!(omega0 > 0.0)) throw ConfigError("coupling_rates: omega0 must be positive");
  CouplingRates r;
  r.mu = omega0 / q0;
  r.gamma = coupling_ratio * r.mu;
  r.big_gamma = r.mu + r.gamma;
  r.q_ex = omega0 / r.gamma;
  r.q_loaded = 1.0 / (1.0 / q0 + 1.0 / r.q_ex);
  return r;
}

double absorption_coefficient(const ResonatorParams& p) { return p.mu / (p.length * p.nu_f); }

double fsr_from_group_index(double kp1, double length) {
  if (!(kp1 > 0.0) || !(length > 0.0))
    throw ConfigError("fsr_from_group_index: kp1 and length must be positive");
  return 1.0 / (kp1 * length);
}

double phase_mismatch(double wp, double ws, double wi, const RefractiveIndex& n, double c) {
  return (wp * n(wp) - ws * n(ws) - wi * n(wi)) / c;
}

RefractiveIndex tabulated_index(std::vector<std::pair<double, double>> table) {
  if (table.empty()) throw ConfigError("tabulated_index: empty table");
  std::sort(table.begin(), table.end());
  return [t = std::move(table)](double w) {
    if (w <= t.front().first) return t.front().second;
    if (w >= t.back().first) return t.back().second;
    auto hi = std::upper_bound(t.begin(), t.end(), w,
                               [](double x, const std::pair<double, double>& e) { return x < e.first; });
    auto lo = hi - 1;
    const double s = (w - lo->first) / (hi->first - lo->first);
    return lo->second + s * (hi->second - lo->second);
  };
}

double nonlinear_coupling(double chi2, double ws, double wi, double wp, double eps1, double a_eff,
                          double radius, const PhysicalConstants& k) {
  const double e0 = k.eps0;
  const double inner = k.hbar * ws * wi * wp / (16.0 * kPi * e0 * e0 * e0 * eps1 * eps1 * eps1 * a_eff * radius);
  return 2.0 * e0 * chi2 * std::sqrt(inner);
}

double pump_amplitude(double p_in, double pump_laser_freq, double hbar) {
  if (p_in < 0.0) throw ConfigError("pump_amplitude: negative pump power");
  if (!(pump_laser_freq > 0.0)) throw ConfigError("pump_amplitude: pump frequency must be positive");
  return std::sqrt(p_in / (hbar * pump_laser_freq));
}

double subharmonic_detuning(int l, double delta, const ResonatorParams& p) {
  return delta + integrated_dispersion(l, p);
}

double pump_mode_detuning(int m, double delta_p, const ResonatorParams& p) {
  const double om = p.d1 * m;
  const double scale = p.length * p.nu_f;
  return delta_p + p.dkp * scale * om - 0.5 * p.kpp2 * scale * om * om;
}

VectorXd subharmonic_detunings(int n, double delta, const ResonatorParams& p) {
  VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = subharmonic_detuning(first_relative_mode(n) + i, delta, p);
  return d;
}

VectorXd pump_detunings(int n, double delta_p, const ResonatorParams& p) {
  VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = pump_mode_detuning(first_relative_mode(n) + i, delta_p, p);
  return d;
}

}  // namespace qfc
