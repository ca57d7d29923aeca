#include "qfc/mean_field.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <sstream>

#include <unsupported/Eigen/FFT>

#include "qfc/errors.hpp"

namespace qfc {

int grid_size_for(int n_active) {
  if (n_active < 1) throw ConfigError("grid_size_for: need at least one active mode");
  int m = 1;
  while (m < 2 * n_active) m <<= 1;
  return m;
}

VectorXd tau_grid(int n, double nu_f) {
  const double ts = 1.0 / nu_f;
  VectorXd tau(n);
  for (int k = 0; k < n; ++k) tau(k) = -0.5 * ts + ts * k / n;
  return tau;
}

namespace {

// Grid slot of relative mode l.
inline int slot(int l, int m) { return ((l % m) + m) % m; }

void check_active(int n_active, int m) {
  if (n_active > m) throw ConfigError("more active modes than grid points");
}

}  // namespace

VectorXc to_time_domain(const VectorXc& modes, int m) {
  const int n = static_cast<int>(modes.size());
  check_active(n, m);
  VectorXc spec = VectorXc::Zero(m);
  const int first = first_relative_mode(n);
  for (int i = 0; i < n; ++i) spec(slot(first + i, m)) = modes(i);
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  VectorXc out(m);
  fft.inv(out, spec);
  return out;
}

VectorXc to_mode_domain(const VectorXc& field, int n_active) {
  const int m = static_cast<int>(field.size());
  check_active(n_active, m);
  Eigen::FFT<double> fft;
  VectorXc spec(m);
  fft.fwd(spec, field);
  VectorXc modes(n_active);
  const int first = first_relative_mode(n_active);
  for (int i = 0; i < n_active; ++i) modes(i) = spec(slot(first + i, m)) / static_cast<double>(m);
  return modes;
}

FieldState to_field_state(const ModeState& s, int grid) {
  FieldState f;
  f.a = to_time_domain(s.alpha, grid);
  f.b = to_time_domain(s.beta, grid);
  f.t = s.t;
  f.n = grid;
  f.active = static_cast<int>(s.alpha.size());
  return f;
}

ModeState to_mode_state(const FieldState& f) {
  ModeState s;
  s.alpha = to_mode_domain(f.a, f.active);
  s.beta = to_mode_domain(f.b, f.active);
  s.t = f.t;
  return s;
}

std::pair<VectorXc, VectorXc> modal_rhs(const VectorXc& alpha, const VectorXc& beta, const ResonatorParams& p,
                                        double delta, double delta_p, double b_in) {
  const int n = static_cast<int>(alpha.size());
  if (beta.size() != n) throw ConfigError("modal_rhs: band sizes differ");
  const int first = first_relative_mode(n);
  const int last = last_relative_mode(n);
  VectorXc da(n), db(n);
  for (int i = 0; i < n; ++i) {
    const int u = first + i;
    cplx acc = 0;
    for (int k = first; k <= last; ++k) {
      const int j = u + k;
      if (j < first || j > last) continue;
      acc += beta(j - first) * std::conj(alpha(k - first));
    }
    da(i) = cplx(-p.big_gamma, -subharmonic_detuning(u, delta, p)) * alpha(i) + kI * p.g0 * acc;
  }
  for (int i = 0; i < n; ++i) {
    const int v = first + i;
    cplx acc = 0;
    for (int k = first; k <= last; ++k) {
      const int q = v - k;
      if (q < first || q > last) continue;
      acc += alpha(k - first) * alpha(q - first);
    }
    db(i) = cplx(-p.big_gamma_pump, -pump_mode_detuning(v, delta_p, p)) * beta(i) + kI * (0.5 * p.g0) * acc;
    if (v == 0) db(i) += std::sqrt(2.0 * p.gamma) * b_in;
  }
  return {da, db};
}

struct SplitStepper::Impl {
  Eigen::FFT<double> fwd;
  Eigen::FFT<double> inv;
  VectorXc spec, a, b, prod;
  std::vector<int> slots;
  Impl() { inv.SetFlag(Eigen::FFT<double>::Unscaled); }
};

SplitStepper::SplitStepper(const ResonatorParams& p, int n_modes, double dt, double b_in, double delta,
                           double delta_p)
    : impl_(std::make_unique<Impl>()), p_(p), n_(n_modes), m_(grid_size_for(n_modes)), dt_(dt), b_in_(b_in) {
  if (!(dt > 0.0)) throw ConfigError("SplitStepper: dt must be positive");
  impl_->spec = VectorXc::Zero(m_);
  impl_->a.resize(m_);
  impl_->b.resize(m_);
  impl_->prod.resize(m_);
  impl_->slots.resize(n_);
  const int first = first_relative_mode(n_);
  for (int i = 0; i < n_; ++i) impl_->slots[i] = slot(first + i, m_);
  set_detuning(delta, delta_p);
}

SplitStepper::~SplitStepper() = default;

void SplitStepper::set_detuning(double delta, double delta_p) {
  const double h = 0.5 * dt_;
  const int first = first_relative_mode(n_);
  half_a_.resize(n_);
  half_b_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    const int l = first + i;
    half_a_(i) = std::exp(cplx(-p_.big_gamma, -subharmonic_detuning(l, delta, p_)) * h);
    half_b_(i) = std::exp(cplx(-p_.big_gamma_pump, -pump_mode_detuning(l, delta_p, p_)) * h);
  }
  // Exact integral of the constant drive over a half step.
  const cplx lam(-p_.big_gamma_pump, -pump_mode_detuning(0, delta_p, p_));
  const double s = std::sqrt(2.0 * p_.gamma) * b_in_;
  drive_half_ = std::abs(lam * h) < 1e-12 ? s * h * (1.0 + 0.5 * lam * h) : s * (std::exp(lam * h) - 1.0) / lam;
}

void SplitStepper::nonlinear_rhs(const VectorXc& alpha, const VectorXc& beta, VectorXc& da, VectorXc& db) {
  Impl& w = *impl_;
  const double inv_m = 1.0 / m_;
  w.spec.setZero();
  for (int i = 0; i < n_; ++i) w.spec(w.slots[i]) = alpha(i);
  w.inv.inv(w.a, w.spec);
  w.spec.setZero();
  for (int i = 0; i < n_; ++i) w.spec(w.slots[i]) = beta(i);
  w.inv.inv(w.b, w.spec);

  w.prod = w.b.cwiseProduct(w.a.conjugate());
  w.fwd.fwd(w.spec, w.prod);
  da.resize(n_);
  for (int i = 0; i < n_; ++i) da(i) = kI * p_.g0 * inv_m * w.spec(w.slots[i]);

  w.prod = w.a.cwiseProduct(w.a);
  w.fwd.fwd(w.spec, w.prod);
  db.resize(n_);
  for (int i = 0; i < n_; ++i) db(i) = kI * (0.5 * p_.g0) * inv_m * w.spec(w.slots[i]);
}

void SplitStepper::step(ModeState& s) {
  const int i0 = -first_relative_mode(n_);
  auto linear = [&] {
    s.alpha = s.alpha.cwiseProduct(half_a_);
    s.beta = s.beta.cwiseProduct(half_b_);
    s.beta(i0) += drive_half_;
  };
  linear();
  if (p_.g0 != 0.0) {
    const double h = dt_;
    VectorXc k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
    nonlinear_rhs(s.alpha, s.beta, k1a, k1b);
    nonlinear_rhs(s.alpha + 0.5 * h * k1a, s.beta + 0.5 * h * k1b, k2a, k2b);
    nonlinear_rhs(s.alpha + 0.5 * h * k2a, s.beta + 0.5 * h * k2b, k3a, k3b);
    nonlinear_rhs(s.alpha + h * k3a, s.beta + h * k3b, k4a, k4b);
    s.alpha += (h / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    s.beta += (h / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
  }
  linear();
  s.t += dt_;
  ++s.step;
  if (!s.alpha.allFinite() || !s.beta.allFinite()) {
    std::ostringstream os;
    os << "split-step integration diverged at step " << s.step;
    throw DivergenceError(os.str(), s.step);
  }
}

FieldState split_step(const FieldState& state, const SimConfig& cfg, const ResonatorParams& p) {
  ModeState s = to_mode_state(state);
  SplitStepper st(p, state.active, cfg.dt, cfg.b_in, cfg.delta, cfg.delta_p);
  if (st.grid() != state.n) throw ConfigError("split_step: grid size does not match active mode count");
  st.step(s);
  return to_field_state(s, state.n);
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::noise:
      return "noise";
    case Regime::turing:
      return "turing";
    case Regime::soliton_crystal:
      return "soliton_crystal";
    case Regime::unstable:
      return "unstable";
  }
  return "unstable";
}

ModeState seeded_state(const SimConfig& cfg) {
  if (cfg.n_modes < 1) throw ConfigError("n_modes must be positive");
  ModeState s;
  s.alpha = VectorXc::Zero(cfg.n_modes);
  s.beta = VectorXc::Zero(cfg.n_modes);
  if (cfg.noise_amp > 0.0) {
    std::mt19937_64 rng(cfg.noise_seed);
    std::normal_distribution<double> g(0.0, cfg.noise_amp / std::sqrt(2.0));
    for (int i = 0; i < cfg.n_modes; ++i) s.alpha(i) = cplx(g(rng), g(rng));
    for (int i = 0; i < cfg.n_modes; ++i) s.beta(i) = cplx(g(rng), g(rng));
  }
  return s;
}

namespace {

void validate(const SimConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw ConfigError("simulation dt must be positive");
  if (cfg.t_end < 0.0) throw ConfigError("simulation t_end must be non-negative");
  if (cfg.record_every < 1) throw ConfigError("record_every must be at least 1");
  if (cfg.power_every < 1) throw ConfigError("power_every must be at least 1");
  if (cfg.n_modes < 2) throw ConfigError("n_modes must be at least 2");
  if (cfg.noise_amp < 0.0) throw ConfigError("noise_amp must be non-negative");
}

Trajectory run(const SimConfig& cfg, const ResonatorParams& p, std::optional<ModeState> initial,
               const StepObserver& observer, bool label) {
  validate(cfg);
  ModeState s = initial ? std::move(*initial) : seeded_state(cfg);
  if (s.alpha.size() != cfg.n_modes || s.beta.size() != cfg.n_modes)
    throw ConfigError("initial state does not match n_modes");

  auto delta_at = [&](double t) {
    if (!cfg.sweep) return std::make_pair(cfg.delta, cfg.delta_p);
    const double f = cfg.t_end > 0.0 ? std::clamp(t / cfg.t_end, 0.0, 1.0) : 0.0;
    const double d = cfg.sweep->delta_start + f * (cfg.sweep->delta_end - cfg.sweep->delta_start);
    return std::make_pair(d, 2.0 * d + cfg.sweep->pump_offset);
  };

  auto [d0, dp0] = delta_at(s.t);
  SplitStepper st(p, cfg.n_modes, cfg.dt, cfg.b_in, d0, dp0);
  const long total = static_cast<long>(std::llround((cfg.t_end - s.t) / cfg.dt));
  const double seed_power = cfg.n_modes * cfg.noise_amp * cfg.noise_amp;
  std::deque<double> recent;
  const std::size_t window = 1000;

  Trajectory tr;
  auto record_power = [&] {
    tr.t.push_back(s.t);
    tr.p_sub.push_back(s.alpha.squaredNorm());
    tr.p_pump.push_back(s.beta.squaredNorm());
  };
  auto record_snapshot = [&](double d) {
    FieldState f = to_field_state(s, st.grid());
    if (label) {
      std::vector<double> r(recent.begin(), recent.end());
      tr.labels.push_back(classify_regime(f, r, seed_power));
    }
    tr.snapshots.push_back(std::move(f));
    tr.snapshot_delta.push_back(d);
  };

  record_power();
  record_snapshot(d0);
  for (long k = 1; k <= total; ++k) {
    if (cfg.sweep) {
      auto [d, dp] = delta_at(s.t + 0.5 * cfg.dt);
      st.set_detuning(d, dp);
    }
    try {
      st.step(s);
    } catch (const DivergenceError& e) {
      std::ostringstream os;
      os << e.what() << " (after snapshot " << tr.snapshots.size() - 1 << ")";
      throw DivergenceError(os.str(), e.step());
    }
    recent.push_back(s.alpha.squaredNorm());
    if (recent.size() > window) recent.pop_front();
    if (k % cfg.power_every == 0) record_power();
    if (k % cfg.record_every == 0 || k == total) record_snapshot(delta_at(s.t).first);
    if (observer) observer(s);
  }
  tr.steps = total;
  return tr;
}

}  // namespace

Trajectory simulate(const SimConfig& cfg, const ResonatorParams& p, std::optional<ModeState> initial,
                    const StepObserver& observer) {
  return run(cfg, p, std::move(initial), observer, false);
}

Trajectory sweep_detuning(const SimConfig& cfg, const ResonatorParams& p, std::optional<ModeState> initial,
                          const StepObserver& observer) {
  return run(cfg, p, std::move(initial), observer, true);
}

std::pair<CombSpectrum, CombSpectrum> spectrum(const FieldState& state) {
  const VectorXc alpha = to_mode_domain(state.a, state.active);
  const VectorXc beta = to_mode_domain(state.b, state.active);
  const int first = first_relative_mode(state.active);
  CombSpectrum sa, sb;
  sa.band = Band::subharmonic;
  sb.band = Band::pump;
  sa.mode_power = alpha.cwiseAbs2();
  sb.mode_power = beta.cwiseAbs2();
  for (int i = 0; i < state.active; ++i) {
    sa.mode.push_back(absolute_mode(first + i, Band::subharmonic));
    sb.mode.push_back(absolute_mode(first + i, Band::pump));
  }
  return {sa, sb};
}

int count_pulses(const VectorXc& field) {
  const VectorXd p = field.cwiseAbs2();
  const int n = static_cast<int>(p.size());
  if (n < 3) return 0;
  const double thr = 0.5 * p.maxCoeff();
  if (!(thr > 0.0)) return 0;
  int c = 0;
  for (int k = 0; k < n; ++k) {
    const double l = p((k + n - 1) % n), r = p((k + 1) % n);
    if (p(k) > thr && p(k) > l && p(k) >= r) ++c;
  }
  return c;
}

double pulse_centroid(const FieldState& s, double nu_f) {
  const VectorXd p = s.a.cwiseAbs2();
  cplx z = 0;
  for (int k = 0; k < s.n; ++k) z += p(k) * std::exp(kI * (2.0 * kPi * k / s.n));
  const double phase = std::arg(z);
  return phase / (2.0 * kPi) / nu_f;
}

namespace {

// Dominant comb lines (>= 10% of peak) that sit on a common spacing.
int equally_spaced_lines(const VectorXd& power) {
  const double peak = power.maxCoeff();
  if (!(peak > 0.0)) return 0;
  std::vector<int> idx;
  for (int i = 0; i < power.size(); ++i)
    if (power(i) >= 0.1 * peak) idx.push_back(i);
  if (idx.size() < 3) return static_cast<int>(idx.size());
  int g = 0;
  for (std::size_t i = 1; i < idx.size(); ++i) g = std::gcd(g, idx[i] - idx[i - 1]);
  if (g < 1) return 0;
  for (std::size_t i = 1; i < idx.size(); ++i)
    if ((idx[i] - idx[i - 1]) != g) return 0;
  return static_cast<int>(idx.size());
}

}  // namespace

Regime classify_regime(const FieldState& s, const std::vector<double>& recent_power, double seed_power) {
  const VectorXc alpha = to_mode_domain(s.a, s.active);
  const double p_sub = alpha.squaredNorm();
  if (p_sub < 10.0 * seed_power) return Regime::noise;
  bool stationary = false;
  if (recent_power.size() >= 1000) {
    const auto [lo, hi] = std::minmax_element(recent_power.begin(), recent_power.end());
    const double mean = std::accumulate(recent_power.begin(), recent_power.end(), 0.0) / recent_power.size();
    stationary = mean > 0.0 && (*hi - *lo) / mean < 1e-4;
  }
  if (stationary && count_pulses(s.a) >= 1) return Regime::soliton_crystal;
  if (!stationary && equally_spaced_lines(alpha.cwiseAbs2()) >= 3) return Regime::turing;
  return Regime::unstable;
}

}  // namespace qfc
