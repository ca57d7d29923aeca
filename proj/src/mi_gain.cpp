#include "qfc/mi_gain.hpp"

#include <cmath>
#include <limits>

#include "qfc/errors.hpp"

namespace qfc {

cplx response_kernel(double x) {
  if (std::abs(x) >= 1.0) return (1.0 - kI * x - std::exp(-kI * x)) / (x * x);
  // sum_j (-i x)^j / (j + 2)!, Horner form; the closed form cancels badly here.
  const cplx z = -kI * x;
  cplx acc = 0.0;
  for (int j = 20; j >= 0; --j) acc = 1.0 + acc * z / static_cast<double>(j + 3);
  return 0.5 * acc;
}

ResponseSample response(double w, const ResonatorParams& p) {
  ResponseSample r;
  r.omega_offset = w;
  r.x = -p.dkp * p.length * w - 0.5 * p.kpp2 * p.length * w * w;
  r.i_hat = response_kernel(r.x);
  return r;
}

cplx iota_plus(double w, const ResonatorParams& p) {
  return response(w, p).i_hat + std::conj(response(-w, p).i_hat);
}

cplx iota_minus(double w, const ResonatorParams& p) {
  return response(w, p).i_hat - std::conj(response(-w, p).i_hat);
}

SteadyIntensity steady_intensity(double b_in, double delta, const ResonatorParams& p) {
  const double drive = 2.0 * p.gamma * p.g0 * p.g0 * b_in * b_in;
  const double disc = drive - delta * delta * p.nu_f * p.nu_f;
  if (disc < 0.0) throw BelowOscillationError("steady_intensity: no real constant solution (pump too weak for detuning)");
  const double i0 = 0.5;
  const double den = p.g0 * p.g0 * i0;
  SteadyIntensity s;
  s.plus = (-p.big_gamma * p.nu_f + std::sqrt(disc)) / den;
  s.minus = (-p.big_gamma * p.nu_f - std::sqrt(disc)) / den;
  s.plus_physical = s.plus >= 0.0;
  s.minus_physical = s.minus >= 0.0;
  // exp(2 i phi) (Gamma + i Delta + g0^2 I0 |a0|^2 / nu_f) = i sqrt(2 gamma) g0 B_in / nu_f
  const cplx x(p.big_gamma + p.g0 * p.g0 * i0 * s.plus / p.nu_f, delta);
  s.phase_plus = 0.5 * (0.5 * kPi - std::arg(x));
  return s;
}

namespace {

MiGain larger_first(cplx c, cplx root, double w, MiBranch b) {
  MiGain g;
  g.omega_offset = w;
  g.branch = b;
  cplx l1 = c + root, l2 = c - root;
  if (l2.real() > l1.real()) std::swap(l1, l2);
  g.lambda_plus = l1;
  g.lambda_minus = l2;
  g.lambda_plus_re = l1.real();
  return g;
}

double dispersion_detuning(double w, double delta, const ResonatorParams& p) {
  return delta - 0.5 * p.kpp1 * p.length * p.nu_f * w * w;
}

}  // namespace

MiGain gain_trivial(double w, double b_in, double delta, const ResonatorParams& p) {
  const double d = dispersion_detuning(w, delta, p);
  const double drive = 2.0 * p.gamma * p.g0 * p.g0 * b_in * b_in / (p.nu_f * p.nu_f);
  return larger_first(cplx(-p.big_gamma, 0.0), std::sqrt(cplx(drive - d * d, 0.0)), w, MiBranch::trivial);
}

MiGain gain_nontrivial(double w, double b_in, double delta, const ResonatorParams& p) {
  const SteadyIntensity s = steady_intensity(b_in, delta, p);
  if (!s.plus_physical) throw BelowOscillationError("gain_nontrivial: no physical constant solution");
  const double k = p.g0 * p.g0 / p.nu_f * s.plus;
  const cplx c = -(p.big_gamma + k * iota_plus(w, p));
  const cplx inner = dispersion_detuning(w, delta, p) - kI * k * iota_minus(w, p);
  const cplx root = std::sqrt(cplx(p.big_gamma * p.big_gamma + delta * delta, 0.0) - inner * inner);
  return larger_first(c, root, w, MiBranch::nontrivial);
}

MatrixXd gain_map(MiBranch branch, const std::vector<double>& deltas, const std::vector<int>& modes, double b_in,
                  const ResonatorParams& p) {
  MatrixXd g(deltas.size(), modes.size());
  for (std::size_t i = 0; i < deltas.size(); ++i)
    for (std::size_t j = 0; j < modes.size(); ++j) {
      const double w = p.d1 * modes[j];
      if (branch == MiBranch::trivial) {
        g(i, j) = gain_trivial(w, b_in, deltas[i], p).lambda_plus_re;
      } else {
        try {
          g(i, j) = gain_nontrivial(w, b_in, deltas[i], p).lambda_plus_re;
        } catch (const BelowOscillationError&) {
          g(i, j) = std::numeric_limits<double>::quiet_NaN();
        }
      }
    }
  return g;
}

double trivial_zero_gain_pump(double delta, const std::vector<int>& modes, const ResonatorParams& p) {
  if (modes.empty()) throw ConfigError("trivial_zero_gain_pump: empty mode list");
  if (!(p.g0 > 0.0) || !(p.gamma > 0.0)) throw BelowOscillationError("trivial_zero_gain_pump: no coupling");
  double dmin = std::numeric_limits<double>::infinity();
  for (int l : modes) dmin = std::min(dmin, std::abs(dispersion_detuning(p.d1 * l, delta, p)));
  return p.nu_f * std::sqrt(p.big_gamma * p.big_gamma + dmin * dmin) / (p.g0 * std::sqrt(2.0 * p.gamma));
}

}  // namespace qfc
