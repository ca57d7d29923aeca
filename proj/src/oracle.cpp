#include "qfc/oracle.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>

#include "qfc/below_threshold.hpp"
#include "qfc/checkpoint.hpp"
#include "qfc/mean_field.hpp"
#include "qfc/mi_gain.hpp"
#include "qfc/supermode.hpp"
#include "qfc/symplectic.hpp"

namespace qfc {

namespace {

VectorXc random_modes(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  VectorXc v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

OracleCheck split_step_vs_modal(const ResonatorParams& p) {
  OracleCheck c{"split_step_vs_modal", 0, 1e-6, false, {}};
  const int n = 8;
  SimConfig cfg;
  cfg.n_modes = n;
  cfg.dt = 1e-13;
  cfg.b_in = 1e6;
  cfg.delta = 1e8;
  cfg.delta_p = 3e9;
  std::mt19937_64 rng(7);
  ModeState s{random_modes(rng, n, 1e2), random_modes(rng, n, 1e2), 0, 0};
  ModeState ref = s;
  SplitStepper st(p, n, cfg.dt, cfg.b_in, cfg.delta, cfg.delta_p);
  const int steps = 200, sub = 20;
  const double h = cfg.dt / sub;
  auto f = [&](const VectorXc& a, const VectorXc& b) { return modal_rhs(a, b, p, cfg.delta, cfg.delta_p, cfg.b_in); };
  for (int k = 0; k < steps; ++k) {
    st.step(s);
    for (int j = 0; j < sub; ++j) {
      auto [a1, b1] = f(ref.alpha, ref.beta);
      auto [a2, b2] = f(ref.alpha + 0.5 * h * a1, ref.beta + 0.5 * h * b1);
      auto [a3, b3] = f(ref.alpha + 0.5 * h * a2, ref.beta + 0.5 * h * b2);
      auto [a4, b4] = f(ref.alpha + h * a3, ref.beta + h * b3);
      ref.alpha += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
      ref.beta += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
    }
  }
  const double num = std::sqrt((s.alpha - ref.alpha).squaredNorm() + (s.beta - ref.beta).squaredNorm());
  const double den = std::sqrt(ref.alpha.squaredNorm() + ref.beta.squaredNorm());
  c.value = num / den;
  return c;
}

// Entry-by-entry construction with explicit mode-index matching.
MatrixXc delta_sum_matrix(const MultimodeBackground& bg, const ResonatorParams& p) {
  const int n = bg.n(), f = first_relative_mode(n);
  auto at = [&](const VectorXc& v, int rel) { return mode_in_range({rel, Band::subharmonic}, n) ? v(rel - f) : cplx(0); };
  const cplx ig = kI * p.g0;
  MatrixXc m = MatrixXc::Zero(4 * n, 4 * n);
  for (int i = 0; i < n; ++i) {
    const int u = f + i;
    const cplx ca(-p.big_gamma, -subharmonic_detuning(u, bg.delta, p));
    const cplx cb(-p.big_gamma_pump, -pump_mode_detuning(u, bg.delta_p, p));
    m(i, i) = ca;
    m(n + i, n + i) = cb;
    m(2 * n + i, 2 * n + i) = std::conj(ca);
    m(3 * n + i, 3 * n + i) = std::conj(cb);
    for (int j = 0; j < n; ++j) {
      const int v = f + j;
      m(i, n + j) = ig * std::conj(at(bg.alpha, v - u));
      m(i, 2 * n + j) = ig * at(bg.beta, u + v);
      m(n + i, j) = ig * at(bg.alpha, u - v);
      m(2 * n + i, j) = -ig * std::conj(at(bg.beta, u + v));
      m(2 * n + i, 3 * n + j) = -ig * at(bg.alpha, v - u);
      m(3 * n + i, 2 * n + j) = -ig * std::conj(at(bg.alpha, u - v));
    }
  }
  return m;
}

OracleCheck fluctuation_matrix_construction(const ResonatorParams& p) {
  OracleCheck c{"fluctuation_matrix_delta_sum", 0, 1e-12, false, {}};
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    MultimodeBackground bg{random_modes(rng, 8, 1e3), random_modes(rng, 8, 1e3), 1e8, 3e9};
    const MatrixXc fast = build_fluctuation_matrix(bg, p).m_a;
    const MatrixXc ref = delta_sum_matrix(bg, p);
    c.value = std::max(c.value, (fast - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff());
  }
  return c;
}

ResonatorParams dispersion_free(ResonatorSpec s) {
  s.kpp1 = 0;
  s.kpp2 = 0;
  s.kp2 = s.kp1.value_or(0.0);
  ResonatorParams p = make_params(s);
  if (p.dkp != 0.0) {
    s.kp2 = p.kp1;
    p = make_params(s);
  }
  return p;
}

OracleCheck two_mode_equivalence(const ResonatorSpec& spec) {
  OracleCheck c{"two_mode_equivalence_db", 0, 1e-6, false, {}};
  const ResonatorParams p = dispersion_free(spec);
  const double delta = 0.0, delta_p = 3e9;
  const double b_in = 0.7 * threshold_pump(delta, delta_p, p).b_in_th;
  const double omega = 2e8;
  const ThreeModeConfig three = three_mode_config(p, delta, delta_p, b_in);
  const double ref = optimal_two_mode_squeezing(output_noise_spectrum(omega, three)).db;

  MultimodeBackground bg;
  bg.alpha = VectorXc::Zero(2);
  bg.beta = VectorXc::Zero(2);
  bg.beta(1) = std::sqrt(2.0 * p.gamma) * b_in / cplx(p.big_gamma_pump, delta_p);
  bg.delta = delta;
  bg.delta_p = delta_p;
  const SqueezingSpectrum sq = squeezing_spectrum(bg, {omega}, p);
  c.value = std::abs(sq.v_minus_db.row(0).minCoeff() - ref);
  return c;
}

OracleCheck threshold_three_ways(const ResonatorSpec& spec) {
  OracleCheck c{"threshold_three_ways", 0, 1e-6, false, {}};
  const ResonatorParams p = make_params(spec);
  const double delta = 0.0;
  const double delta_p = std::sqrt(p.nu_f * p.nu_f - p.big_gamma_pump * p.big_gamma_pump);
  const double closed = threshold_pump(delta, delta_p, p).b_in_th;
  const double mi = trivial_zero_gain_pump(delta, {0}, p);
  double lo = 0.5 * closed, hi = 2.0 * closed;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (steady_state(three_mode_config(p, delta, delta_p, mid)).branch == Branch::above ? hi : lo) = mid;
  }
  const double sw = 0.5 * (lo + hi);
  c.value = std::max({std::abs(sw - closed) / closed, std::abs(mi - closed) / closed, std::abs(mi - sw) / closed});
  return c;
}

OracleCheck vacuum_duan(const ResonatorSpec& spec) {
  OracleCheck c{"vacuum_duan_baseline", 0, 1e-9, false, {}};
  ResonatorSpec s = spec;
  s.g0 = 0;
  const ResonatorParams p = make_params(s);
  const ThreeModeConfig three = three_mode_config(p, 1e8, 3e9, 0.0);
  for (double w : linear_grid(-2e9, 2e9, 8))
    for (double ts : linear_grid(0, 2 * kPi, 8))
      for (double ti : linear_grid(0, kPi, 4)) {
        const double cs = duan_criterion(output_noise_spectrum(w, three), ts, ti).c_s;
        c.value = std::max(c.value, std::abs(cs - (1.0 - std::abs(std::cos(ts - ti)))));
      }
  return c;
}

OracleCheck abmd_reconstruction() {
  OracleCheck c{"abmd_reconstruction", 0, 1e-8, false, {}};
  std::mt19937_64 rng(3);
  const int n = 4;
  auto orth_symplectic = [&] {
    const MatrixXc h = random_modes(rng, n * n, 1.0).reshaped(n, n);
    const MatrixXc u = Eigen::HouseholderQR<MatrixXc>(h).householderQ();
    MatrixXd o(2 * n, 2 * n);
    o << u.real(), -u.imag(), u.imag(), u.real();
    return o;
  };
  std::uniform_real_distribution<double> r(0.0, 1.5);
  VectorXd d(2 * n);
  for (int i = 0; i < n; ++i) {
    d(i) = std::exp(r(rng));
    d(n + i) = 1.0 / d(i);
  }
  const MatrixXd s = orth_symplectic() * d.asDiagonal() * orth_symplectic();
  const auto real = abmd_at_zero(s);
  const auto cx = abmd(MatrixXc(s.cast<cplx>()));
  c.value = std::max(real.residual, cx.residual);
  for (int i = 0; i < n; ++i) c.value = std::max(c.value, std::abs(real.d(i) * real.d(n + i) - 1.0));
  return c;
}

OracleCheck checkpoint_round_trip(const std::string& dir) {
  OracleCheck c{"checkpoint_round_trip", 0, 1e-12, false, {}};
  std::mt19937_64 rng(5);
  const ModeState s{random_modes(rng, 12, 1.0), random_modes(rng, 12, 1.0), 1.25e-9, 0};
  const std::string path = (std::filesystem::path(dir) / "oracle.qfc").string();
  write_checkpoint(path, s);
  const ModeState r = read_checkpoint(path);
  std::filesystem::remove(path);
  c.value = std::max((r.alpha - s.alpha).cwiseAbs().maxCoeff(), (r.beta - s.beta).cwiseAbs().maxCoeff());
  if (r.t != s.t) c.value = 1.0;
  return c;
}

}  // namespace

std::vector<OracleCheck> run_oracle(const ResonatorSpec& device, const std::string& scratch_dir) {
  const ResonatorParams p = make_params(device);
  const std::vector<std::function<OracleCheck()>> checks = {
      [&] { return split_step_vs_modal(p); },
      [&] { return fluctuation_matrix_construction(p); },
      [&] { return two_mode_equivalence(device); },
      [&] { return threshold_three_ways(device); },
      [&] { return vacuum_duan(device); },
      [&] { return abmd_reconstruction(); },
      [&] { return checkpoint_round_trip(scratch_dir); },
  };
  const char* names[] = {"split_step_vs_modal",  "fluctuation_matrix_delta_sum", "two_mode_equivalence_db",
                         "threshold_three_ways", "vacuum_duan_baseline",         "abmd_reconstruction",
                         "checkpoint_round_trip"};
  std::vector<OracleCheck> out;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    OracleCheck c;
    try {
      c = checks[i]();
      c.passed = c.value <= c.tolerance;
    } catch (const std::exception& e) {
      c.name = names[i];
      c.passed = false;
      c.detail = e.what();
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace qfc
