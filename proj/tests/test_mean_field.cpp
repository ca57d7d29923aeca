#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qfc/errors.hpp"
#include "qfc/mean_field.hpp"

using namespace qfc;

namespace {

VectorXc random_modes(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  VectorXc v(n);
  for (int i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
  return v;
}

double photon_number(const ModeState& s) { return s.alpha.squaredNorm() + 2.0 * s.beta.squaredNorm(); }

}  // namespace

TEST_CASE("grid size and transforms") {
  CHECK(grid_size_for(8) == 16);
  CHECK(grid_size_for(9) == 32);
  CHECK(grid_size_for(800) == 2048);
  std::mt19937_64 rng(3);
  const VectorXc m = random_modes(rng, 10, 1.0);
  const VectorXc f = to_time_domain(m, 32);
  CHECK((to_mode_domain(f, 10) - m).norm() < 1e-12);
  // Parseval for the unnormalized inverse transform.
  CHECK(f.squaredNorm() == doctest::Approx(32.0 * m.squaredNorm()).epsilon(1e-12));
  // Direct sum at one sample.
  const int k = 5, first = first_relative_mode(10);
  cplx direct = 0;
  for (int i = 0; i < 10; ++i) direct += m(i) * std::exp(kI * (2.0 * kPi * (first + i) * k / 32.0));
  CHECK(std::abs(f(k) - direct) < 1e-12);
}

TEST_CASE("modal right-hand side without nonlinearity is pure decay and rotation") {
  ResonatorParams p = oracle::ln_params();
  p.g0 = 0;
  std::mt19937_64 rng(1);
  const VectorXc a = random_modes(rng, 8, 1.0), b = random_modes(rng, 8, 1.0);
  auto [da, db] = modal_rhs(a, b, p, 1e8, 3e9, 0.0);
  for (int i = 0; i < 8; ++i) {
    const int u = first_relative_mode(8) + i;
    CHECK(std::abs(da(i) - cplx(-p.big_gamma, -oracle::sub_detuning(u, 1e8, p)) * a(i)) < 1e-6);
    CHECK(std::abs(db(i) - cplx(-p.big_gamma_pump, -oracle::pump_detuning(u, 3e9, p)) * b(i)) < 1e-6);
  }
}

TEST_CASE("two-mode hand expansion") {
  ResonatorParams p;
  p.g0 = 0.7;
  p.gamma = 0.5;
  const VectorXc a = (VectorXc(2) << cplx(0.3, 0.1), cplx(-0.2, 0.4)).finished();
  const VectorXc b = (VectorXc(2) << cplx(0.5, -0.6), cplx(0.1, 0.2)).finished();
  // Relative modes {0, 1}; all linear terms vanish for this parameter set.
  auto [da, db] = modal_rhs(a, b, p, 0.0, 0.0, 2.0);
  const cplx ig = kI * p.g0;
  CHECK(std::abs(da(0) - ig * (b(0) * std::conj(a(0)) + b(1) * std::conj(a(1)))) < 1e-15);
  CHECK(std::abs(da(1) - ig * b(1) * std::conj(a(0))) < 1e-15);
  CHECK(std::abs(db(0) - (0.5 * ig * a(0) * a(0) + 2.0)) < 1e-15);
  CHECK(std::abs(db(1) - ig * a(0) * a(1)) < 1e-15);
}

TEST_CASE("photon number is conserved without loss or drive") {
  ResonatorParams p = oracle::ln_params();
  p.big_gamma = 0;
  p.big_gamma_pump = 0;
  std::mt19937_64 rng(5);
  ModeState s{random_modes(rng, 16, 1e3), random_modes(rng, 16, 1e3), 0, 0};
  auto [da, db] = modal_rhs(s.alpha, s.beta, p, 1e8, 3e9, 0.0);
  const double rate = 2.0 * (s.alpha.dot(da).real() + 2.0 * s.beta.dot(db).real());
  CHECK(std::abs(rate) < 1e-10 * (std::abs(s.alpha.dot(da)) + 2 * std::abs(s.beta.dot(db))));

  SplitStepper st(p, 16, 1e-13, 0.0, 1e8, 3e9);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const double before = photon_number(s);
    st.step(s);
    worst = std::max(worst, std::abs(photon_number(s) - before) / before);
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("uncoupled fields decay at twice the loss rate") {
  ResonatorParams p = oracle::ln_params();
  p.g0 = 0;
  std::mt19937_64 rng(9);
  ModeState s{random_modes(rng, 8, 1.0), random_modes(rng, 8, 1.0), 0, 0};
  const double a0 = s.alpha.squaredNorm();
  const double dt = 1e-11;
  SplitStepper st(p, 8, dt, 0.0, 1e8, 3e9);
  for (int k = 0; k < 100; ++k) st.step(s);
  CHECK(s.alpha.squaredNorm() == doctest::Approx(a0 * std::exp(-2.0 * p.big_gamma * 100 * dt)).epsilon(1e-8));
}

TEST_CASE("linear pump steady state") {
  ResonatorParams p = oracle::ln_params();
  p.g0 = 0;
  SimConfig cfg;
  cfg.n_modes = 8;
  cfg.dt = 1e-11;
  cfg.t_end = 2e-7;
  cfg.b_in = 1e8;
  cfg.delta_p = 3e9;
  cfg.record_every = 100000;
  cfg.power_every = 100000;
  const Trajectory tr = simulate(cfg, p);
  const ModeState s = to_mode_state(tr.snapshots.back());
  const cplx expect = std::sqrt(2.0 * p.gamma) * cfg.b_in / cplx(p.big_gamma_pump, cfg.delta_p);
  const int centre = -first_relative_mode(8);
  CHECK(std::abs(s.beta(centre) - expect) / std::abs(expect) < 1e-9);
  double rest = s.alpha.norm();
  for (int i = 0; i < 8; ++i)
    if (i != centre) rest += std::abs(s.beta(i));
  CHECK(rest < 1e-9 * std::abs(expect));
}

TEST_CASE("split-step trajectory matches adaptive integration at N=16") {
  const ResonatorParams p = oracle::ln_params();
  std::mt19937_64 rng(21);
  const int n = 16;
  ModeState s{random_modes(rng, n, 1e2), random_modes(rng, n, 1e2), 0, 0};
  const ModeState start = s;
  const double dt = 1e-13;
  SplitStepper st(p, n, dt, 1e6, 1e8, 3e9);
  double worst = 0;
  VectorXc a = start.alpha, b = start.beta;
  for (int chunk = 0; chunk < 10; ++chunk) {
    for (int k = 0; k < 100; ++k) st.step(s);
    std::tie(a, b) = oracle::integrate_modal(a, b, p, 1e8, 3e9, 1e6, 100 * dt);
    const double err = std::sqrt((s.alpha - a).squaredNorm() + (s.beta - b).squaredNorm()) /
                       std::sqrt(a.squaredNorm() + b.squaredNorm());
    worst = std::max(worst, err);
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("zero seed and zero drive stay at zero") {
  SimConfig cfg;
  cfg.n_modes = 8;
  cfg.noise_amp = 0;
  cfg.t_end = 1e-11;
  const Trajectory tr = simulate(cfg, oracle::ln_params());
  for (const FieldState& f : tr.snapshots) {
    CHECK(f.a.norm() == 0.0);
    CHECK(f.b.norm() == 0.0);
  }
}

TEST_CASE("same seed gives identical trajectories") {
  SimConfig cfg;
  cfg.n_modes = 16;
  cfg.t_end = 2e-11;
  cfg.b_in = 1.9e8;
  cfg.delta_p = 3e9;
  cfg.noise_seed = 42;
  const Trajectory a = simulate(cfg, oracle::ln_params());
  const Trajectory b = simulate(cfg, oracle::ln_params());
  CHECK(a.p_sub == b.p_sub);
  CHECK((a.snapshots.back().a - b.snapshots.back().a).norm() == 0.0);
  cfg.noise_seed = 43;
  CHECK(simulate(cfg, oracle::ln_params()).p_sub != a.p_sub);
}

TEST_CASE("zero-width ramp equals a fixed-detuning run") {
  SimConfig cfg;
  cfg.n_modes = 16;
  cfg.t_end = 2e-11;
  cfg.b_in = 1.9e8;
  cfg.delta = 1e8;
  cfg.delta_p = 2e8 + 3e9;
  const Trajectory fixed = simulate(cfg, oracle::ln_params());
  cfg.sweep = DetuningRamp{1e8, 1e8, 3e9};
  const Trajectory ramp = sweep_detuning(cfg, oracle::ln_params());
  CHECK((fixed.snapshots.back().a - ramp.snapshots.back().a).norm() == 0.0);
  CHECK(ramp.labels.size() == ramp.snapshots.size());
}

TEST_CASE("divergent integration reports the step") {
  ResonatorParams p = oracle::ln_params();
  ModeState s{VectorXc::Constant(8, cplx(1e200, 0)), VectorXc::Constant(8, cplx(1e200, 0)), 0, 0};
  SplitStepper st(p, 8, 1e-13, 0.0, 0.0, 0.0);
  CHECK_THROWS_AS(st.step(s), DivergenceError);
}

TEST_CASE("comb spectrum of synthetic fields") {
  const int n = 16, m = grid_size_for(n);
  FieldState f{VectorXc::Constant(m, cplx(2.0, 0)), VectorXc::Zero(m), 0, m, n};
  auto [sa, sb] = spectrum(f);
  const int centre = -first_relative_mode(n);
  for (int i = 0; i < n; ++i) CHECK(sa.mode_power(i) == doctest::Approx(i == centre ? 4.0 : 0.0));
  CHECK(sb.mode.front() == kPumpCenterMode + first_relative_mode(n));

  // Two identical pulses per round trip: only even relative modes survive.
  VectorXc two(m);
  for (int k = 0; k < m; ++k) {
    const double x = std::fmod(k, m / 2.0) - m / 4.0;
    two(k) = std::exp(-x * x / 4.0);
  }
  f.a = two;
  auto [s2, unused] = spectrum(f);
  for (int i = 0; i < n; ++i)
    if ((first_relative_mode(n) + i) % 2 != 0) CHECK(s2.mode_power(i) < 1e-20);
  CHECK(count_pulses(two) == 2);
  // Parseval against the time-domain power of the band-limited part.
  const VectorXc band_limited = to_time_domain(to_mode_domain(two, n), m);
  CHECK(band_limited.squaredNorm() == doctest::Approx(m * s2.mode_power.sum()).epsilon(1e-12));
}
