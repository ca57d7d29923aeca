#pragma once

#include <vector>

#include "qfc/mean_field.hpp"
#include "qfc/resonator.hpp"
#include "qfc/symplectic.hpp"
#include "qfc/types.hpp"

namespace qfc {

/// Classical comb background the fluctuations are linearized around.
struct MultimodeBackground {
  VectorXc alpha;  // subharmonic modal amplitudes, relative index ascending
  VectorXc beta;   // pump modal amplitudes
  double delta = 0;
  double delta_p = 0;
  bool stable = false;  // set by build_fluctuation_matrix
  int n() const { return static_cast<int>(alpha.size()); }
};

/// Average of late-time modal snapshots.
MultimodeBackground average_background(const std::vector<ModeState>& states, double delta, double delta_p);

enum class BandSelection { all, subharmonic, pump };
const char* band_name(BandSelection b);

struct FluctuationMatrix {
  MatrixXc m_a;  // 4N x 4N, ordering (dA, dB, dA^dag, dB^dag); 2N x 2N when band-restricted
  int n = 0;     // modes per band
  BandSelection band = BandSelection::all;
  double max_real_eigenvalue = 0;
};

/// Linearized drift with coupling blocks built as forward-transform x
/// fast-time multiplication x inverse-transform on the padded grid.
/// Sets bg.stable; does not throw on instability (see require_stable).
FluctuationMatrix build_fluctuation_matrix(MultimodeBackground& bg, const ResonatorParams& p);

/// Throws StabilityError if any eigenvalue has Re >= 0.
void require_stable(const FluctuationMatrix& fm);

struct InputOutput {
  MatrixXc m_in;
  MatrixXc m_loss;
  MatrixXc resolvent;  // (i w E - M_a)^-1
};

/// M_in = U_in R U_in - E, M_loss = U_in R U_loss. Per-band loss ports:
/// sqrt(2 mu) on the subharmonic band, sqrt(2 (Gamma_pump - gamma)) on the pump band.
InputOutput input_output(double omega, const FluctuationMatrix& fm, const ResonatorParams& p);

/// T M T^dag with T = (1/sqrt2)[[E, E], [-iE, iE]].
MatrixXc quadrature_noise(const MatrixXc& m_ladder);

/// Keep only the selected band's rows and columns.
FluctuationMatrix restrict_band(const FluctuationMatrix& fm, BandSelection band);

struct SupermodeCoefficients {
  int supermode = 0;
  double omega = 0;
  std::vector<int> mode;  // relative mode index
  std::vector<Band> band;
  VectorXd eta_abs;
  VectorXd phi;
};

struct SqueezingOptions {
  BandSelection band = BandSelection::all;
  ContinuationOptions continuation;
  int coefficient_supermodes = 1;  // how many leading supermodes to report coefficients for
};

struct SqueezingSpectrum {
  std::vector<double> omega;
  MatrixXd v_minus;  // rows omega, cols supermode; variances
  MatrixXd v_plus;
  MatrixXd v_minus_db;
  MatrixXd v_plus_db;
  std::vector<SupermodeCoefficients> coefficients;
  std::vector<double> residual;  // ABMD reconstruction residual per omega
  ContinuationStats stats;
  BandSelection band = BandSelection::all;
};

/// Supermode variances per Fourier frequency. Supermode k pairs column k
/// (anti-squeezed quadrature) with column k+n (squeezed quadrature) of U.
SqueezingSpectrum squeezing_spectrum(MultimodeBackground bg, const std::vector<double>& omega_grid,
                                     const ResonatorParams& p, const SqueezingOptions& opt = {});

inline SqueezingSpectrum band_restricted_analysis(const MultimodeBackground& bg, BandSelection band,
                                                  const std::vector<double>& omega_grid, const ResonatorParams& p,
                                                  SqueezingOptions opt = {}) {
  opt.band = band;
  return squeezing_spectrum(bg, omega_grid, p, opt);
}

/// Coefficients of supermode column k of a quadrature-basis U.
SupermodeCoefficients supermode_coefficients(const MatrixXc& u, int k, BandSelection band, int n_per_band);

/// Fraction of a supermode's norm on the subharmonic band.
double subharmonic_weight(const SupermodeCoefficients& c);

}  // namespace qfc
