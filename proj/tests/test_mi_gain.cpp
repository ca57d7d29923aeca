#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qfc/errors.hpp"
#include "qfc/below_threshold.hpp"
#include "qfc/mi_gain.hpp"

using namespace qfc;

namespace {

ResonatorParams reduced_params() {
  ResonatorParams p;
  p.g0 = 1.0;
  p.gamma = 0.5;
  p.mu = 0.5;
  p.big_gamma = 1.0;
  p.big_gamma_pump = 1.0;
  p.nu_f = 1.0;
  p.length = 1.0;
  p.d1 = 2.0 * kPi;
  return p;
}

ResonatorParams dispersive_params() {
  ResonatorParams p = reduced_params();
  p.kpp1 = -0.8;
  p.kpp2 = 0.3;
  p.dkp = 0.4;
  return p;
}

}  // namespace

TEST_CASE("response kernel values") {
  CHECK(response_kernel(0.0) == cplx(0.5, 0.0));
  const cplx at_pi = response_kernel(kPi);
  CHECK(at_pi.real() == doctest::Approx(2.0 / (kPi * kPi)).epsilon(1e-14));
  CHECK(at_pi.imag() == doctest::Approx(-1.0 / kPi).epsilon(1e-14));
  for (double x : {1e-6, 3e-5, 2e-4, 0.01, 0.3, 2.0, -1.7}) {
    CHECK(std::abs(response_kernel(x) - std::conj(response_kernel(-x))) < 1e-15);
    CHECK(std::abs(response_kernel(x) - oracle::response_series(x)) < 1e-12);
  }
  CHECK(response(0.0, oracle::ln_params()).i_hat == cplx(0.5, 0.0));
}

TEST_CASE("walk-off free kernel is even") {
  ResonatorParams p = reduced_params();
  p.kpp1 = -0.8;
  for (double w : {0.3, 1.1}) {
    CHECK(std::abs(iota_minus(w, p)) < 1e-15);
    CHECK(gain_nontrivial(w, 3.0, 0.2, p).lambda_plus_re ==
          doctest::Approx(gain_nontrivial(-w, 3.0, 0.2, p).lambda_plus_re).epsilon(1e-14));
  }
}

TEST_CASE("constant-envelope intensity") {
  const ResonatorParams p = reduced_params();
  const SteadyIntensity s = steady_intensity(3.0, 0.0, p);
  CHECK(s.plus == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(s.plus_physical);
  CHECK_FALSE(s.minus_physical);

  // Discriminant exactly zero at delta = B sqrt(2 gamma) g0 / nu_f.
  const SteadyIntensity edge = steady_intensity(2.0, 2.0, p);
  CHECK(edge.plus == doctest::Approx(-p.big_gamma * p.nu_f / (p.g0 * p.g0 * 0.5)));
  CHECK_FALSE(edge.plus_physical);
  CHECK_THROWS_AS(steady_intensity(1.0, 2.0, p), BelowOscillationError);

  // Zero intensity coincides with the trivial-branch threshold.
  const double delta = 0.7;
  const double b = p.nu_f * std::sqrt(p.big_gamma * p.big_gamma + delta * delta) / (std::sqrt(2 * p.gamma) * p.g0);
  CHECK(std::abs(steady_intensity(b, delta, p).plus) < 1e-14);
  CHECK(trivial_zero_gain_pump(delta, {0}, p) == doctest::Approx(b).epsilon(1e-14));
}

TEST_CASE("trivial branch gain") {
  const ResonatorParams p = oracle::ln_params();
  for (double w : {0.0, 1e11, 3e12}) CHECK(gain_trivial(w, 0.0, 1e8, p).lambda_plus_re == doctest::Approx(-p.big_gamma));

  // At the phase-matched offset the gain sign is set by drive versus loss.
  const double w = 40 * p.d1;
  const double delta = 0.5 * p.kpp1 * p.length * p.nu_f * w * w;
  const double b_edge = p.big_gamma * p.nu_f / (std::sqrt(2 * p.gamma) * p.g0);
  CHECK(gain_trivial(w, 1.01 * b_edge, delta, p).lambda_plus_re > 0.0);
  CHECK(gain_trivial(w, 0.99 * b_edge, delta, p).lambda_plus_re < 0.0);
}

TEST_CASE("instability tongue follows the dispersion parabola") {
  const ResonatorParams p = oracle::ln_params();
  const double b = 2e10;
  const std::vector<double> deltas = linear_grid(-2e10, 2e10, 801);
  const std::vector<int> modes{20, 50, 80};
  const MatrixXd g = gain_map(MiBranch::trivial, deltas, modes, b, p);
  const double cell = deltas[1] - deltas[0];
  for (std::size_t j = 0; j < modes.size(); ++j) {
    Eigen::Index imax;
    g.col(j).maxCoeff(&imax);
    const double w = p.d1 * modes[j];
    CHECK(std::abs(deltas[imax] - 0.5 * p.kpp1 * p.length * p.nu_f * w * w) <= cell);
  }
}

TEST_CASE("eigenvalues match direct integration of the sideband system") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const ResonatorParams p = dispersive_params();
  int nontrivial_checked = 0, trivial_checked = 0;
  for (int k = 0; k < 3; ++k) {
    const double w = 0.3 + 1.2 * u(rng);
    const double delta = -0.5 + u(rng);
    const double b = 2.5 + 1.5 * u(rng);
    const double ref = oracle::sideband_growth_rate(w, b, delta, p, true);
    const double lib = gain_nontrivial(w, b, delta, p).lambda_plus_re;
    CHECK(lib == doctest::Approx(ref).epsilon(1e-2));
    ++nontrivial_checked;

    const double rt = oracle::sideband_growth_rate(w, b, delta, p, false);
    CHECK(gain_trivial(w, b, delta, p).lambda_plus_re == doctest::Approx(rt).epsilon(1e-2));
    ++trivial_checked;
  }
  CHECK(nontrivial_checked == 3);
  CHECK(trivial_checked == 3);
}

TEST_CASE("nontrivial branch requires a physical solution") {
  CHECK_THROWS_AS(gain_nontrivial(0.5, 0.5, 0.0, reduced_params()), BelowOscillationError);
  const MatrixXd g = gain_map(MiBranch::nontrivial, {0.0}, {1}, 0.5, reduced_params());
  CHECK(std::isnan(g(0, 0)));
}
