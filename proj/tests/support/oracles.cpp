#include "oracles.hpp"

#include <cmath>
#include <vector>

#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/numeric/odeint.hpp>

namespace oracle {

namespace odeint = boost::numeric::odeint;
using State = std::vector<cplx>;
const cplx I(0.0, 1.0);

qfc::ResonatorSpec ln_device() {
  qfc::ResonatorSpec s;
  s.omega0 = 1.20688e15;
  s.omegap = 2.41406e15;
  s.kp1 = 7879.9e-12;
  s.radius = 100e-6;
  s.kpp1 = -0.0219e-24;
  s.kp2 = 8085.6e-12;
  s.kpp2 = 0.3624e-24;
  s.q0 = 3.7e6;
  s.coupling_ratio = 1.222;
  s.a_eff = 0.997e-12;
  s.g0 = 5e5;
  return s;
}

qfc::ResonatorParams ln_params() { return qfc::make_params(ln_device()); }

qfc::ResonatorParams dispersion_free_params() {
  qfc::ResonatorSpec s = ln_device();
  s.kpp1 = 0;
  s.kpp2 = 0;
  s.kp2 = *s.kp1;
  return qfc::make_params(s);
}

double sub_detuning(int l, double delta, const qfc::ResonatorParams& p) {
  const double w = p.d1 * l;
  return delta - 0.5 * p.kpp1 * p.length * p.nu_f * w * w;
}

double pump_detuning(int m, double delta_p, const qfc::ResonatorParams& p) {
  const double w = p.d1 * m;
  return delta_p + p.dkp * p.length * p.nu_f * w - 0.5 * p.kpp2 * p.length * p.nu_f * w * w;
}

std::pair<VectorXc, VectorXc> integrate_modal(VectorXc alpha, VectorXc beta, const qfc::ResonatorParams& p,
                                              double delta, double delta_p, double b_in, double duration,
                                              double rel_tol) {
  const int n = static_cast<int>(alpha.size());
  const int first = -n / 2 + 1;
  std::vector<double> da(n), db(n);
  for (int i = 0; i < n; ++i) {
    da[i] = sub_detuning(first + i, delta, p);
    db[i] = pump_detuning(first + i, delta_p, p);
  }
  const int zero = -first;
  auto rhs = [&](const State& x, State& dx, double) {
    for (int i = 0; i < n; ++i) {
      const int u = first + i;
      cplx s = 0;
      for (int k = 0; k < n; ++k) {
        const int m = u + first + k;  // pump index u + k
        if (m >= first && m < first + n) s += x[n + m - first] * std::conj(x[k]);
      }
      dx[i] = (-I * da[i] - p.big_gamma) * x[i] + I * p.g0 * s;
    }
    for (int i = 0; i < n; ++i) {
      const int m = first + i;
      cplx s = 0;
      for (int k = 0; k < n; ++k) {
        const int other = m - (first + k);
        if (other >= first && other < first + n) s += x[k] * x[other - first];
      }
      dx[n + i] = (-I * db[i] - p.big_gamma_pump) * x[n + i] + I * (0.5 * p.g0) * s;
    }
    dx[n + zero] += std::sqrt(2.0 * p.gamma) * b_in;
  };
  State x(2 * n);
  for (int i = 0; i < n; ++i) {
    x[i] = alpha(i);
    x[n + i] = beta(i);
  }
  double scale = 0;
  for (const cplx& v : x) scale = std::max(scale, std::abs(v));
  auto stepper = odeint::make_controlled(rel_tol * std::max(scale, 1.0), rel_tol, odeint::runge_kutta_dopri5<State>());
  odeint::integrate_adaptive(stepper, rhs, x, 0.0, duration, duration / 1000.0);
  for (int i = 0; i < n; ++i) {
    alpha(i) = x[i];
    beta(i) = x[n + i];
  }
  return {alpha, beta};
}

MatrixXc delta_sum_drift(const VectorXc& alpha, const VectorXc& beta, const qfc::ResonatorParams& p, double delta,
                         double delta_p) {
  const int n = static_cast<int>(alpha.size());
  const int first = -n / 2 + 1;
  auto in = [&](int rel) { return rel >= first && rel < first + n; };
  MatrixXc m = MatrixXc::Zero(4 * n, 4 * n);
  // Rows: dA_u, dB_v, dA_u^dag, dB_v^dag.  Columns the same.
  for (int iu = 0; iu < n; ++iu) {
    const int u = first + iu;
    m(iu, iu) = -I * sub_detuning(u, delta, p) - p.big_gamma;
    m(n + iu, n + iu) = -I * pump_detuning(u, delta_p, p) - p.big_gamma_pump;
    m(2 * n + iu, 2 * n + iu) = std::conj(m(iu, iu));
    m(3 * n + iu, 3 * n + iu) = std::conj(m(n + iu, n + iu));
    // dA_u += i g0 sum_{j,k} (alpha_k^* dB_j + beta_j dA_k^dag) [j = k + u]
    for (int ik = 0; ik < n; ++ik) {
      const int k = first + ik;
      const int j = k + u;
      if (in(j)) {
        m(iu, n + (j - first)) += I * p.g0 * std::conj(alpha(ik));
        m(iu, 2 * n + ik) += I * p.g0 * beta(j - first);
      }
    }
    // dB_v += i g0 sum_{k,n} alpha_k dA_n [v = k + n]
    const int v = u;
    for (int ik = 0; ik < n; ++ik) {
      const int k = first + ik;
      const int other = v - k;
      if (in(other)) m(n + iu, other - first) += I * p.g0 * alpha(ik);
    }
  }
  // Conjugate rows.
  m.block(2 * n, 0, n, n) = m.block(0, 2 * n, n, n).conjugate();
  m.block(2 * n, 3 * n, n, n) = m.block(0, n, n, n).conjugate();
  m.block(3 * n, 2 * n, n, n) = m.block(n, 0, n, n).conjugate();
  return m;
}

SvdPolar svd_polar(const MatrixXd& s) {
  Eigen::JacobiSVD<MatrixXd> svd(s, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const MatrixXd u = svd.matrixU(), v = svd.matrixV();
  return {u * svd.singularValues().asDiagonal() * u.transpose(), u * v.transpose()};
}

MatrixXd random_symplectic(int n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  MatrixXd h(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j) h(i, j) = g(rng);
  h = (0.5 * (h + h.transpose())).eval();
  MatrixXd j = MatrixXd::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n) = -MatrixXd::Identity(n, n);
  return MatrixXd(j * h).exp();
}

qfc::MatrixFamily<double> symplectic_family(int n, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  auto sym = [&] {
    MatrixXd h(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i)
      for (int j = 0; j < 2 * n; ++j) h(i, j) = g(rng);
    return MatrixXd(0.5 * (h + h.transpose()));
  };
  MatrixXd j = MatrixXd::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n) = -MatrixXd::Identity(n, n);
  const MatrixXd a = j * sym(), b = j * sym();
  return [a, b](double w) {
    auto at = [&](double x) { return MatrixXd(MatrixXd(a + x * b).exp()); };
    const double h = 1e-5;
    return std::make_pair(at(w), central_difference(at, w, h));
  };
}

VectorXd paired_singular_values(const MatrixXd& s) {
  const VectorXd sv = Eigen::JacobiSVD<MatrixXd>(s).singularValues();  // descending
  const int n = static_cast<int>(sv.size() / 2);
  VectorXd d(2 * n);
  for (int i = 0; i < n; ++i) {
    d(i) = sv(i);
    d(n + i) = 1.0 / sv(i);
  }
  return d;
}

cplx response_series(double x) {
  if (std::abs(x) > 0.5) return (1.0 - I * x - std::exp(-I * x)) / (x * x);
  // -sum_{k>=2} (-i)^k x^(k-2) / k!
  cplx sum = 0, coef = -1.0;  // (-i)^2
  double xp = 1.0, fact = 2.0;
  for (int k = 2; k <= 30; ++k) {
    sum -= coef * xp / fact;
    coef *= -I;
    xp *= x;
    fact *= k + 1;
  }
  return sum;
}

double sideband_growth_rate(double w, double b_in, double delta, const qfc::ResonatorParams& p, bool nontrivial,
                            double horizon_rates) {
  auto hat = [&](double om) {
    const double x = -p.dkp * p.length * om - 0.5 * p.kpp2 * p.length * om * om;
    return response_series(x);
  };
  const double s = std::sqrt(2.0 * p.gamma) * p.g0 * b_in / p.nu_f;
  const double q = 0.5 * p.kpp1 * p.length * p.nu_f * w * w;
  cplx c_d = 0, c_o = -I * s;
  if (nontrivial) {
    const double disc = 2.0 * p.gamma * p.g0 * p.g0 * b_in * b_in - delta * delta * p.nu_f * p.nu_f;
    const double a0_sq = (-p.big_gamma * p.nu_f + std::sqrt(disc)) / (p.g0 * p.g0 * 0.5);
    const cplx x = p.big_gamma + I * delta + p.g0 * p.g0 * 0.5 * a0_sq / p.nu_f;
    const cplx e2phi = I * s / x;
    const cplx a0_2 = a0_sq * e2phi;  // a0^2
    c_d = 2.0 * p.g0 * p.g0 / p.nu_f * a0_sq;
    c_o = p.g0 * p.g0 / p.nu_f * a0_2 * 0.5 - I * s;
  }
  const cplx du = -(p.big_gamma - I * (delta - q) + c_d * std::conj(hat(-w)));
  const cplx dv = -(p.big_gamma + I * (delta - q) + c_d * hat(w));
  auto rhs = [&](const State& x, State& dx, double) {
    dx[0] = du * x[0] - std::conj(c_o) * x[1];
    dx[1] = dv * x[1] - c_o * x[0];
  };
  State x{cplx(0.6, 0.2), cplx(-0.3, 0.7)};
  const double chunk = 1.0 / p.big_gamma;
  const int chunks = static_cast<int>(horizon_rates);
  double log_norm = 0, log_half = 0;
  auto stepper = odeint::make_controlled(1e-13, 1e-11, odeint::runge_kutta_dopri5<State>());
  for (int k = 0; k < chunks; ++k) {
    odeint::integrate_adaptive(stepper, rhs, x, 0.0, chunk, chunk / 50.0);
    const double nrm = std::sqrt(std::norm(x[0]) + std::norm(x[1]));
    log_norm += std::log(nrm);
    x[0] /= nrm;
    x[1] /= nrm;
    if (k == chunks / 2 - 1) log_half = log_norm;
  }
  return (log_norm - log_half) / (chunk * (chunks - chunks / 2));
}

MatrixXc impulse_response_resolvent(const MatrixXc& m, double omega, double horizon) {
  const int n = static_cast<int>(m.rows());
  const MatrixXc a = m - I * omega * MatrixXc::Identity(n, n);
  MatrixXc out(n, n);
  for (int j = 0; j < n; ++j) {
    State x(2 * n, 0.0);
    x[j] = 1.0;
    auto rhs = [&](const State& s, State& ds, double) {
      for (int r = 0; r < n; ++r) {
        cplx acc = 0;
        for (int c = 0; c < n; ++c) acc += a(r, c) * s[c];
        ds[r] = acc;
        ds[n + r] = s[r];
      }
    };
    auto stepper = odeint::make_controlled(1e-14, 1e-12, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_adaptive(stepper, rhs, x, 0.0, horizon, horizon / 1e4);
    for (int r = 0; r < n; ++r) out(r, j) = x[n + r];
  }
  return out;
}

}  // namespace oracle
