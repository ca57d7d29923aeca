#include "qfc/below_threshold.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qfc/errors.hpp"

namespace qfc {

ThreeModeConfig three_mode_config(const ResonatorParams& p, double delta, double delta_p, double b_in,
                                  double theta_in) {
  ThreeModeConfig c;
  c.delta_s = delta;
  c.delta_i = delta;
  c.delta_p = delta_p;
  c.b_in = b_in;
  c.theta_in = theta_in;
  c.params = p;
  return c;
}

SteadyState steady_state(const ThreeModeConfig& cfg) {
  if (cfg.b_in < 0.0) throw ConfigError("steady_state: b_in must be non-negative");
  const ResonatorParams& p = cfg.params;
  const double gam = p.big_gamma;
  const double gp = p.big_gamma_pump;
  const double delta = 0.5 * (cfg.delta_s + cfg.delta_i);
  const double dp = cfg.delta_p;
  const double g0 = p.g0;
  const double drive2 = 2.0 * p.gamma * cfg.b_in * cfg.b_in;

  SteadyState s;
  // Empty-signal branch: pump is a driven damped oscillator.
  const cplx beta0 = std::sqrt(2.0 * p.gamma) * cfg.b_in * std::exp(kI * cfg.theta_in) / cplx(gp, dp);
  s.b_mag = std::abs(beta0);
  s.theta_p = cfg.b_in > 0.0 ? std::arg(beta0) : 0.0;
  s.branch = Branch::below;
  if (g0 <= 0.0 || cfg.b_in == 0.0) return s;

  // With Y = (g0 A)^2 the pump balance reads
  // |(i dp + gp)(delta - i gam) - i Y|^2 = 2 gamma g0^2 B_in^2.
  const double re = dp * gam + gp * delta;
  const double im0 = dp * delta - gp * gam;
  const double disc = g0 * g0 * drive2 - re * re;
  if (disc < 0.0) return s;
  const double root = std::sqrt(disc);
  const double y_hi = im0 + root;
  const double y_lo = im0 - root;
  if (y_hi <= 0.0) return s;

  s.branch = Branch::above;
  s.a_mag = std::sqrt(y_hi) / g0;
  if (y_lo > 0.0) s.a_mag_secondary = std::sqrt(y_lo) / g0;
  s.b_mag = std::sqrt(delta * delta + gam * gam) / g0;
  const cplx lhs = cplx(re, im0 - y_hi) / g0;
  s.theta_sum = cfg.theta_in - std::arg(lhs);
  s.theta_p = s.theta_sum + std::arg(cplx(delta, -gam));
  return s;
}

Threshold threshold_pump(double delta, double delta_p, const ResonatorParams& p) {
  if (!(p.g0 > 0.0)) throw BelowOscillationError("threshold_pump: g0 = 0, no oscillation threshold");
  if (!(p.gamma > 0.0)) throw BelowOscillationError("threshold_pump: gamma = 0, pump cannot enter the cavity");
  const double gam = p.big_gamma;
  const double gp = p.big_gamma_pump;
  Threshold t;
  t.b_in_th = std::sqrt((delta * delta + gam * gam) * (delta_p * delta_p + gp * gp)) /
              (p.g0 * std::sqrt(2.0 * p.gamma));
  t.p_th = PhysicalConstants{}.hbar * (p.omegap - delta_p) * t.b_in_th * t.b_in_th;
  return t;
}

MatrixXc fluctuation_matrix_below_unchecked(const ThreeModeConfig& cfg) {
  const ResonatorParams& p = cfg.params;
  const cplx beta = std::sqrt(2.0 * p.gamma) * cfg.b_in * std::exp(kI * cfg.theta_in) /
                    cplx(p.big_gamma_pump, cfg.delta_p);
  const cplx k = kI * p.g0 * beta;
  const cplx kc = -kI * p.g0 * std::conj(beta);
  MatrixXc m = MatrixXc::Zero(4, 4);
  m(0, 0) = cplx(-p.big_gamma, -cfg.delta_s);
  m(1, 1) = cplx(-p.big_gamma, cfg.delta_s);
  m(2, 2) = cplx(-p.big_gamma, -cfg.delta_i);
  m(3, 3) = cplx(-p.big_gamma, cfg.delta_i);
  m(0, 3) = k;
  m(2, 1) = k;
  m(1, 2) = kc;
  m(3, 0) = kc;
  return m;
}

MatrixXc fluctuation_matrix_below(const ThreeModeConfig& cfg) {
  MatrixXc m = fluctuation_matrix_below_unchecked(cfg);
  const double max_re = Eigen::ComplexEigenSolver<MatrixXc>(m, false).eigenvalues().real().maxCoeff();
  if (max_re >= 0.0) {
    std::ostringstream os;
    os << "fluctuation_matrix_below: background unstable (max Re lambda = " << max_re
       << "), pump is above threshold";
    throw StabilityError(os.str(), max_re);
  }
  return m;
}

NoiseMatrix4 output_noise_spectrum(double omega, const MatrixXc& m, double gamma, double mu) {
  const MatrixXc e = MatrixXc::Identity(4, 4);
  const double u_in = std::sqrt(2.0 * gamma);
  const double u_loss = std::sqrt(2.0 * mu);
  MatrixXc mc = MatrixXc::Zero(4, 4);
  mc(0, 1) = 1.0;
  mc(2, 3) = 1.0;

  auto resolvent = [&](double w) {
    const MatrixXc a = kI * w * e - m;
    Eigen::PartialPivLU<MatrixXc> lu(a);
    if (!(std::abs(lu.determinant()) > 0.0))
      throw StabilityError("output_noise_spectrum: singular resolvent", 0.0);
    return MatrixXc(lu.solve(e));
  };
  const MatrixXc rp = resolvent(omega);
  const MatrixXc rm = resolvent(-omega);
  const MatrixXc hp = u_in * u_in * rp - e;
  const MatrixXc hm = u_in * u_in * rm - e;
  const MatrixXc lp = u_in * u_loss * rp;
  const MatrixXc lm = u_in * u_loss * rm;

  NoiseMatrix4 out;
  out.omega = omega;
  out.s = hp * mc * hm.transpose() + lp * mc * lm.transpose();
  if (!out.s.allFinite()) throw StabilityError("output_noise_spectrum: non-finite spectrum", 0.0);
  return out;
}

NoiseMatrix4 output_noise_spectrum(double omega, const ThreeModeConfig& cfg) {
  return output_noise_spectrum(omega, fluctuation_matrix_below(cfg), cfg.params.gamma, cfg.params.mu);
}

MatrixXc readout_transform(double ts, double ti) {
  const cplx es = std::exp(-kI * ts), esc = std::exp(kI * ts);
  const cplx ei = std::exp(-kI * ti), eic = std::exp(kI * ti);
  MatrixXc t(4, 4);
  t << -kI * es, kI * esc, -kI * ei, kI * eic,  //
      es, esc, ei, eic,                          //
      -kI * es, kI * esc, kI * ei, -kI * eic,    //
      es, esc, -ei, -eic;
  return 0.5 * t;
}

MatrixXc quadrature_spectrum(const NoiseMatrix4& noise, double ts, double ti) {
  const MatrixXc t = readout_transform(ts, ti);
  const MatrixXc x = t * noise.s * t.transpose();
  return 0.5 * (x + x.transpose());
}

DuanResult duan_criterion(const NoiseMatrix4& noise, double ts, double ti) {
  const MatrixXc s = quadrature_spectrum(noise, ts, ti);
  DuanResult r;
  r.theta_s = ts;
  r.theta_i = ti;
  r.omega = noise.omega;
  r.var_y_plus = s(0, 0).real();
  r.var_x_minus = s(3, 3).real();
  r.c_s = r.var_y_plus + r.var_x_minus - std::abs(std::cos(ts - ti));
  return r;
}

namespace {

double var_x_minus(const MatrixXc& sa, double ts, double ti) {
  Eigen::RowVector4cd r;
  r << std::exp(-kI * ts), std::exp(kI * ts), -std::exp(-kI * ti), -std::exp(kI * ti);
  r *= 0.5;
  return (r * sa * r.transpose())(0, 0).real();
}

template <typename F>
double golden_min(F f, double lo, double hi) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 100 && b - a > 1e-13; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

TwoModeSqueezing optimal_two_mode_squeezing(const NoiseMatrix4& noise) {
  // Variance is a low-order trigonometric polynomial in each angle, so a coarse
  // grid followed by alternating line searches converges to the global minimum.
  const int n = 72;
  const double h = 2.0 * kPi / n;
  double best = 1e300, bs = 0, bi = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = var_x_minus(noise.s, i * h, j * h);
      if (v < best) {
        best = v;
        bs = i * h;
        bi = j * h;
      }
    }
  for (int round = 0; round < 8; ++round) {
    bs = golden_min([&](double x) { return var_x_minus(noise.s, x, bi); }, bs - h, bs + h);
    bi = golden_min([&](double x) { return var_x_minus(noise.s, bs, x); }, bi - h, bi + h);
  }
  TwoModeSqueezing r;
  r.theta_s = bs;
  r.theta_i = bi;
  r.var_x_minus = var_x_minus(noise.s, bs, bi);
  r.db = to_db(r.var_x_minus);
  return r;
}

ResonatorParams with_coupling_ratio(const ResonatorParams& p, double r) {
  if (!(r > 0.0)) throw ConfigError("with_coupling_ratio: ratio must be positive");
  ResonatorParams q = p;
  const double pump_excess = p.big_gamma_pump - p.big_gamma;
  q.coupling_ratio = r;
  q.gamma = r * p.mu;
  q.big_gamma = q.mu + q.gamma;
  q.big_gamma_pump = q.big_gamma + pump_excess;
  q.q_ex = p.omega0 / q.gamma;
  q.q_loaded = 1.0 / (1.0 / p.q0 + 1.0 / q.q_ex);
  return q;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
  if (n < 1) throw ConfigError("linear_grid: need at least one point");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return g;
}

EntanglementMap entanglement_map(ScanAxis axis, const std::vector<double>& grid,
                                 const std::vector<double>& omega_grid, const ThreeModeConfig& cfg,
                                 double theta_s, double theta_i) {
  EntanglementMap out;
  out.axis = axis;
  out.axis_values = grid;
  out.omega = omega_grid;
  const int na = static_cast<int>(grid.size());
  const int nw = static_cast<int>(omega_grid.size());
  out.c_s.resize(na, nw);

  for (int i = 0; i < na; ++i) {
    ThreeModeConfig c = cfg;
    double ts = theta_s;
    switch (axis) {
      case ScanAxis::pump_amplitude:
        c.b_in = grid[i];
        break;
      case ScanAxis::coupling_ratio:
        c.params = with_coupling_ratio(cfg.params, grid[i]);
        break;
      case ScanAxis::readout_angle:
        ts = grid[i];
        break;
    }
    MatrixXc m;
    try {
      m = fluctuation_matrix_below(c);
    } catch (const StabilityError& e) {
      std::ostringstream os;
      os << e.what() << " at axis value " << grid[i];
      throw StabilityError(os.str(), e.max_real_eigenvalue());
    }
    for (int j = 0; j < nw; ++j) {
      const NoiseMatrix4 nm = output_noise_spectrum(omega_grid[j], m, c.params.gamma, c.params.mu);
      out.c_s(i, j) = duan_criterion(nm, ts, theta_i).c_s;
    }
  }

  out.optimal_omega.resize(na);
  for (int i = 0; i < na; ++i) {
    Eigen::Index k;
    out.c_s.row(i).minCoeff(&k);
    out.optimal_omega[i] = nw > 0 ? omega_grid[k] : 0.0;
  }
  out.argmin_axis.resize(nw);
  out.argmax_axis.resize(nw);
  for (int j = 0; j < nw && na > 0; ++j) {
    Eigen::Index kmin, kmax;
    out.c_s.col(j).minCoeff(&kmin);
    out.c_s.col(j).maxCoeff(&kmax);
    out.argmin_axis[j] = grid[kmin];
    out.argmax_axis[j] = grid[kmax];
  }
  return out;
}

}  // namespace qfc
