#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "qfc/resonator.hpp"
#include "qfc/types.hpp"

namespace qfc {

/// Smallest power of two >= 2 n_active. Products of two band-limited
/// envelopes then never alias back into the active window.
int grid_size_for(int n_active);

/// Active modal amplitudes (relative index ascending) of both bands.
struct ModeState {
  VectorXc alpha;  // subharmonic
  VectorXc beta;   // pump, relative to mode 959
  double t = 0;
  long step = 0;
};

/// Fast-time envelopes on the padded grid.
struct FieldState {
  VectorXc a;
  VectorXc b;
  double t = 0;
  int n = 0;       // grid size (power of two)
  int active = 0;  // modes kept per band
};

/// Fast-time samples spanning one round trip, [-tau_s/2, tau_s/2).
VectorXd tau_grid(int n, double nu_f);

/// a(tau_k) = sum_l alpha_l exp(i l 2 pi k / n) on an n-point grid.
VectorXc to_time_domain(const VectorXc& modes, int n);
/// Inverse of to_time_domain restricted to the active window.
VectorXc to_mode_domain(const VectorXc& field, int n_active);

FieldState to_field_state(const ModeState& s, int grid);
ModeState to_mode_state(const FieldState& f);

struct DetuningRamp {
  double delta_start = 0;
  double delta_end = 0;
  double pump_offset = 0;  // delta_p = 2 delta + pump_offset
};

struct SimConfig {
  int n_modes = 16;
  double dt = 1e-13;
  double t_end = 1e-10;
  double b_in = 0;
  double delta = 0;
  double delta_p = 0;
  std::uint64_t noise_seed = 1;
  double noise_amp = 0.7071067811865476;
  std::optional<DetuningRamp> sweep;
  long record_every = 1;
  long power_every = 1;
};

/// Direct delta-constrained evaluation of the coupled-mode equations, O(N^2).
/// The pump equation carries g0/2 per ordered pair so that
/// sum |alpha|^2 + 2 sum |beta|^2 is conserved without loss or drive.
std::pair<VectorXc, VectorXc> modal_rhs(const VectorXc& alpha, const VectorXc& beta, const ResonatorParams& p,
                                        double delta, double delta_p, double b_in);

/// Strang split-step integrator: exact linear propagation in mode space,
/// RK4 for the quadratic terms evaluated pseudo-spectrally on a padded grid.
class SplitStepper {
 public:
  SplitStepper(const ResonatorParams& p, int n_modes, double dt, double b_in, double delta, double delta_p);
  ~SplitStepper();
  SplitStepper(const SplitStepper&) = delete;
  SplitStepper& operator=(const SplitStepper&) = delete;

  void set_detuning(double delta, double delta_p);
  void step(ModeState& s);
  /// Nonlinear right-hand side only (exposed for tests).
  void nonlinear_rhs(const VectorXc& alpha, const VectorXc& beta, VectorXc& da, VectorXc& db);

  int n_modes() const { return n_; }
  int grid() const { return m_; }
  double dt() const { return dt_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  const ResonatorParams p_;
  int n_, m_;
  double dt_, b_in_;
  VectorXc half_a_, half_b_;
  cplx drive_half_ = 0;
};

/// One step on a fast-time state. Throws DivergenceError on NaN/Inf.
FieldState split_step(const FieldState& state, const SimConfig& cfg, const ResonatorParams& p);

enum class Regime { noise, turing, soliton_crystal, unstable };
const char* regime_name(Regime r);

struct Trajectory {
  std::vector<FieldState> snapshots;
  std::vector<double> snapshot_delta;
  std::vector<Regime> labels;  // filled by sweep_detuning
  std::vector<double> t;       // power samples
  std::vector<double> p_sub;   // sum |alpha|^2
  std::vector<double> p_pump;  // sum |beta|^2
  long steps = 0;
};

/// Seeded complex Gaussian initial condition, E|z|^2 = noise_amp^2 per mode.
ModeState seeded_state(const SimConfig& cfg);

using StepObserver = std::function<void(const ModeState&)>;

/// Run from `initial` (or a seeded state) to cfg.t_end.
Trajectory simulate(const SimConfig& cfg, const ResonatorParams& p, std::optional<ModeState> initial = std::nullopt,
                    const StepObserver& observer = {});

/// Linear ramp of delta over [0, t_end]; each snapshot labelled by regime.
Trajectory sweep_detuning(const SimConfig& cfg, const ResonatorParams& p,
                          std::optional<ModeState> initial = std::nullopt, const StepObserver& observer = {});

struct CombSpectrum {
  Band band = Band::subharmonic;
  std::vector<int> mode;  // absolute mode numbers
  VectorXd mode_power;
};

std::pair<CombSpectrum, CombSpectrum> spectrum(const FieldState& state);

/// Heuristic regime label from a snapshot and the recent total-power history.
Regime classify_regime(const FieldState& s, const std::vector<double>& recent_power, double seed_power);

/// Circular centroid of |a|^2 on the fast-time grid, in s.
double pulse_centroid(const FieldState& s, double nu_f);

/// Number of local maxima of |a|^2 exceeding half the global maximum.
int count_pulses(const VectorXc& field);

}  // namespace qfc
