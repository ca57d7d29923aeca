#include "qfc/run.hpp"

#include <atomic>
#include <chrono>
#include <ctime>
#include <deque>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "qfc/checkpoint.hpp"
#include "qfc/csv.hpp"
#include "qfc/errors.hpp"
#include "qfc/oracle.hpp"
#include "qfc/supermode.hpp"

#ifndef QFC_VERSION
#define QFC_VERSION "unknown"
#endif

namespace qfc {

namespace fs = std::filesystem;
using nlohmann::json;

std::string code_version() { return QFC_VERSION; }

Subcommand parse_subcommand(std::string_view name) {
  for (Subcommand s : {Subcommand::params, Subcommand::below, Subcommand::threshold, Subcommand::mi, Subcommand::comb,
                       Subcommand::sweep, Subcommand::squeeze, Subcommand::oracle})
    if (name == subcommand_name(s)) return s;
  throw ConfigError("unknown subcommand '" + std::string(name) + "'");
}

const char* subcommand_name(Subcommand s) {
  switch (s) {
    case Subcommand::params: return "params";
    case Subcommand::below: return "below";
    case Subcommand::threshold: return "threshold";
    case Subcommand::mi: return "mi";
    case Subcommand::comb: return "comb";
    case Subcommand::sweep: return "sweep";
    case Subcommand::squeeze: return "squeeze";
    case Subcommand::oracle: return "oracle";
  }
  return "?";
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DegenerateInputError*>(&e) ||
      dynamic_cast<const BelowOscillationError*>(&e))
    return 2;
  if (dynamic_cast<const DivergenceError*>(&e)) return 3;
  if (dynamic_cast<const StabilityError*>(&e)) return 4;
  return 1;
}

json error_record(const std::exception& e) {
  json r;
  r["exit_code"] = exit_code_for(e);
  r["message"] = e.what();
  if (auto* d = dynamic_cast<const DivergenceError*>(&e)) {
    r["type"] = "divergence";
    r["step"] = d->step();
  } else if (auto* s = dynamic_cast<const StabilityError*>(&e)) {
    r["type"] = "stability";
    r["max_real_eigenvalue"] = s->max_real_eigenvalue();
  } else if (dynamic_cast<const ConfigError*>(&e)) {
    r["type"] = "config";
  } else if (dynamic_cast<const DegenerateInputError*>(&e) || dynamic_cast<const BelowOscillationError*>(&e)) {
    r["type"] = "domain";
  } else {
    r["type"] = "internal";
  }
  return r;
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

struct Context {
  const RunConfig& cfg;
  const RunOptions& opt;
  std::ostream& log;
  ResonatorParams p;
  std::vector<std::string> files;
  json stages = json::array();
  json summary = json::object();

  std::string path(const std::string& name) const { return (fs::path(cfg.output_dir) / name).string(); }

  void save(const CsvTable& t, const std::string& name) {
    t.save(path(name));
    files.push_back(name);
  }

  template <typename F>
  void stage(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    json s{{"name", name}};
    try {
      f();
      s["status"] = "ok";
    } catch (...) {
      s["status"] = "failed";
      s["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      stages.push_back(s);
      throw;
    }
    s["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stages.push_back(s);
  }
};

void do_params(Context& c) {
  const ResonatorParams& p = c.p;
  const Threshold th = threshold_pump(c.cfg.sim.delta, c.cfg.sim.delta_p, p);
  const std::vector<std::tuple<const char*, double, const char*>> rows = {
      {"omega0", p.omega0, "rad/s"},
      {"omegap", p.omegap, "rad/s"},
      {"nu_f", p.nu_f, "Hz"},
      {"d1", p.d1, "rad/s"},
      {"d2", p.d2, "rad/s"},
      {"length", p.length, "m"},
      {"kp1", p.kp1, "s/m"},
      {"kp2", p.kp2, "s/m"},
      {"dkp", p.dkp, "s/m"},
      {"kpp1", p.kpp1, "s^2/m"},
      {"kpp2", p.kpp2, "s^2/m"},
      {"mu", p.mu, "rad/s"},
      {"gamma", p.gamma, "rad/s"},
      {"big_gamma", p.big_gamma, "rad/s"},
      {"big_gamma_pump", p.big_gamma_pump, "rad/s"},
      {"q0", p.q0, "1"},
      {"q_ex", p.q_ex, "1"},
      {"q_loaded", p.q_loaded, "1"},
      {"absorption", absorption_coefficient(p), "1/m"},
      {"g0", p.g0, "rad/s"},
      {"b_in_threshold", th.b_in_th, "sqrt(1/s)"},
      {"p_threshold", th.p_th, "W"},
  };
  CsvTable t({"quantity", "value", "unit"});
  for (const auto& [name, v, unit] : rows) {
    t.cell(name).cell(v).cell(unit).end_row();
    c.summary[name] = v;
    c.log << std::left << std::setw(16) << name << std::setprecision(6) << v << ' ' << unit << '\n';
  }
  c.save(t, "params.csv");
}

ThreeModeConfig below_config(const Context& c) {
  const BelowAnalysis& b = c.cfg.analysis.below;
  ThreeModeConfig t = three_mode_config(c.p, b.delta_s, b.delta_p, b.b_in, b.theta_in);
  t.delta_i = b.delta_i;
  return t;
}

void do_below(Context& c) {
  const BelowAnalysis& b = c.cfg.analysis.below;
  const ThreeModeConfig three = below_config(c);
  double lo = b.scan_min, hi = b.scan_max;
  if (lo == hi) {
    // Unset range: pick a natural one for the axis.
    switch (c.opt.scan) {
      case ScanAxis::pump_amplitude:
        lo = 0.0;
        hi = 0.99 * threshold_pump(three.delta_s, three.delta_p, c.p).b_in_th;
        break;
      case ScanAxis::coupling_ratio:
        lo = 0.2;
        hi = 5.0;
        break;
      case ScanAxis::readout_angle:
        lo = 0.0;
        hi = 2.0 * kPi;
        break;
    }
  }
  const std::vector<double> axis = linear_grid(lo, hi, b.scan_points);
  const std::vector<double> omega = linear_grid(0.0, b.omega_max, b.omega_points);
  EntanglementMap map;
  c.stage("entanglement_map", [&] { map = entanglement_map(c.opt.scan, axis, omega, three, b.theta_s, b.theta_i); });
  CsvTable t({"axis1_value", "omega_rad_s", "c_s"});
  double best = 1e300, best_axis = 0, best_omega = 0;
  for (std::size_t i = 0; i < axis.size(); ++i)
    for (std::size_t j = 0; j < omega.size(); ++j) {
      const double v = map.c_s(i, j);
      t.cell(axis[i]).cell(omega[j]).cell(v).end_row();
      if (v < best) {
        best = v;
        best_axis = axis[i];
        best_omega = omega[j];
      }
    }
  c.save(t, "duan_map.csv");
  c.summary["min_c_s"] = best;
  c.summary["min_axis_value"] = best_axis;
  c.summary["min_omega"] = best_omega;
  c.log << "min C_s = " << best << " at axis " << best_axis << ", omega " << best_omega << '\n';
}

void do_threshold(Context& c) {
  const ThresholdAnalysis& a = c.cfg.analysis.threshold;
  CsvTable t({"mode_l", "delta_rad_s", "b_in_th", "p_th_w"});
  double lowest = 1e300;
  int lowest_l = 0;
  for (double delta : linear_grid(a.delta_min, a.delta_max, a.delta_points))
    for (int l = 1; l <= a.mode_max; ++l) {
      const double dl = subharmonic_detuning(l, delta, c.p);
      const Threshold th = threshold_pump(dl, 2.0 * delta + a.pump_offset, c.p);
      t.cell(l).cell(delta).cell(th.b_in_th).cell(th.p_th).end_row();
      if (th.b_in_th < lowest) {
        lowest = th.b_in_th;
        lowest_l = l;
      }
    }
  c.save(t, "threshold.csv");
  c.summary["lowest_b_in_th"] = lowest;
  c.summary["lowest_mode_l"] = lowest_l;
  c.log << "lowest threshold B_in = " << lowest << " (l = " << lowest_l << ")\n";
}

void do_mi(Context& c) {
  const MiAnalysis& a = c.cfg.analysis.mi;
  const std::vector<double> deltas = linear_grid(a.delta_min, a.delta_max, a.delta_points);
  std::vector<int> modes;
  for (int l = 0; l <= a.mode_max; ++l) modes.push_back(l);
  MatrixXd g;
  c.stage("gain_map", [&] { g = gain_map(c.opt.branch, deltas, modes, a.b_in, c.p); });
  const char* branch = c.opt.branch == MiBranch::trivial ? "trivial" : "nontrivial";
  CsvTable t({"branch", "delta_rad_s", "mode_l", "re_lambda_plus"});
  double peak = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < deltas.size(); ++i)
    for (std::size_t j = 0; j < modes.size(); ++j) {
      t.cell(branch).cell(deltas[i]).cell(modes[j]).cell(g(i, j)).end_row();
      if (std::isfinite(g(i, j)) && !(peak >= g(i, j))) peak = g(i, j);
    }
  c.save(t, "mi_gain.csv");
  c.summary["branch"] = branch;
  c.summary["max_re_lambda_plus"] = std::isfinite(peak) ? json(peak) : json(nullptr);
  if (std::isfinite(peak))
    c.log << branch << " branch: max Re lambda+ = " << peak << '\n';
  else
    c.log << branch << " branch: no physical steady state on this grid\n";
}

// Per-step power window for regime labels on the final state.
struct PowerWindow {
  std::deque<double> recent;
  void push(const ModeState& s) {
    recent.push_back(s.alpha.squaredNorm());
    if (recent.size() > 1000) recent.pop_front();
  }
  std::vector<double> values() const { return {recent.begin(), recent.end()}; }
};

void write_spectra(Context& c, const FieldState& last) {
  const auto [sub, pump] = spectrum(last);
  for (const CombSpectrum* s : {&sub, &pump}) {
    CsvTable t({"mode_index", "power"});
    for (std::size_t i = 0; i < s->mode.size(); ++i) t.cell(s->mode[i]).cell(s->mode_power(i)).end_row();
    c.save(t, s->band == Band::subharmonic ? "spectrum_sub.csv" : "spectrum_pump.csv");
  }
}

void do_comb(Context& c) {
  const RunConfig& cfg = c.cfg;
  std::optional<ModeState> initial;
  if (c.opt.resume) {
    initial = read_checkpoint(*c.opt.resume);
    if (initial->alpha.size() != cfg.sim.n_modes)
      throw ConfigError("checkpoint has " + std::to_string(initial->alpha.size()) + " modes, config has " +
                        std::to_string(cfg.sim.n_modes));
    c.summary["resumed_from_t"] = initial->t;
  }
  const int m = grid_size_for(cfg.sim.n_modes);
  const int stride = std::max(1, m / 256);
  CsvTable space({"t_s", "tau_s", "power"});
  PowerWindow window;
  long step = 0;
  ModeState last;
  auto observer = [&](const ModeState& s) {
    window.push(s);
    last = s;
    ++step;
    if (cfg.spacetime_every > 0 && step % cfg.spacetime_every == 0) {
      const VectorXc a = to_time_domain(s.alpha, m);
      for (int k = 0; k < m; k += stride)
        space.cell(s.t).cell(k / (m * c.p.nu_f)).cell(std::norm(a(k))).end_row();
    }
  };
  Trajectory tr;
  c.stage(c.opt.sweep ? "sweep_detuning" : "simulate", [&] {
    tr = c.opt.sweep ? sweep_detuning(cfg.sim, c.p, initial, observer) : simulate(cfg.sim, c.p, initial, observer);
  });
  if (step == 0) last = initial ? *initial : seeded_state(cfg.sim);

  CsvTable powers({"t_s", "p_sub", "p_pump"});
  for (std::size_t i = 0; i < tr.t.size(); ++i) powers.cell(tr.t[i]).cell(tr.p_sub[i]).cell(tr.p_pump[i]).end_row();
  c.save(powers, "powers.csv");
  const FieldState final_field = to_field_state(last, m);
  write_spectra(c, final_field);
  if (cfg.spacetime_every > 0) c.save(space, "spacetime.csv");
  if (c.opt.sweep) {
    CsvTable r({"t_s", "delta_rad_s", "regime", "pulses"});
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i)
      r.cell(tr.snapshots[i].t)
          .cell(tr.snapshot_delta[i])
          .cell(regime_name(tr.labels[i]))
          .cell(count_pulses(tr.snapshots[i].a))
          .end_row();
    c.save(r, "regimes.csv");
  }
  write_checkpoint(c.path("comb_final.qfc"), last);
  c.files.push_back("comb_final.qfc");

  const double seed_power = cfg.sim.n_modes * cfg.sim.noise_amp * cfg.sim.noise_amp;
  const Regime regime = classify_regime(final_field, window.values(), seed_power);
  c.summary["t_end"] = last.t;
  c.summary["steps"] = tr.steps;
  c.summary["p_sub"] = last.alpha.squaredNorm();
  c.summary["p_pump"] = last.beta.squaredNorm();
  c.summary["pulses"] = count_pulses(final_field.a);
  c.summary["regime"] = regime_name(regime);
  c.log << "t = " << last.t << " s, P_sub = " << last.alpha.squaredNorm() << ", P_pump = " << last.beta.squaredNorm()
        << ", pulses = " << count_pulses(final_field.a) << ", regime = " << regime_name(regime) << '\n';
}

struct SweepRow {
  double p_sub = 0, p_pump = 0;
  int pulses = 0;
  Regime regime = Regime::noise;
};

void do_sweep(Context& c) {
  const std::vector<double>& values = c.cfg.analysis.sweep.b_in;
  std::vector<SweepRow> rows(values.size());
  std::vector<std::exception_ptr> errors(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < values.size();) {
      try {
        SimConfig sim = c.cfg.sim;  // private copy per job
        sim.b_in = values[i];
        PowerWindow window;
        ModeState last;
        const Trajectory tr = simulate(sim, c.p, std::nullopt, [&](const ModeState& s) {
          window.push(s);
          last = s;
        });
        const FieldState f = tr.snapshots.back();
        rows[i].p_sub = last.alpha.squaredNorm();
        rows[i].p_pump = last.beta.squaredNorm();
        rows[i].pulses = count_pulses(f.a);
        rows[i].regime = classify_regime(f, window.values(), sim.n_modes * sim.noise_amp * sim.noise_amp);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  c.stage("pump_sweep", [&] {
    const int n = std::min<int>(c.cfg.analysis.sweep.workers, static_cast<int>(values.size()));
    std::vector<std::thread> pool;
    for (int w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  });
  CsvTable t({"b_in", "p_sub", "p_pump", "pulses", "regime"});
  json list = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    t.cell(values[i]).cell(rows[i].p_sub).cell(rows[i].p_pump).cell(rows[i].pulses).cell(regime_name(rows[i].regime));
    t.end_row();
    list.push_back({{"b_in", values[i]}, {"pulses", rows[i].pulses}, {"regime", regime_name(rows[i].regime)}});
    c.log << "B_in = " << values[i] << ": pulses = " << rows[i].pulses << ", regime = " << regime_name(rows[i].regime)
          << '\n';
  }
  c.save(t, "sweep.csv");
  c.summary["runs"] = list;
}

void do_squeeze(Context& c) {
  if (!c.opt.checkpoint) throw ConfigError("squeeze needs --checkpoint");
  const ModeState s = read_checkpoint(*c.opt.checkpoint);
  const SimConfig& sim = c.cfg.sim;
  double delta = sim.delta, delta_p = sim.delta_p;
  if (sim.sweep) {
    delta = sim.sweep->delta_end;
    delta_p = 2.0 * delta + sim.sweep->pump_offset;
  }
  const MultimodeBackground bg = average_background({s}, delta, delta_p);
  const SqueezeAnalysis& a = c.cfg.analysis.squeeze;
  SqueezingOptions opt;
  opt.band = a.band;
  opt.coefficient_supermodes = a.coefficient_supermodes;
  opt.continuation.residual_tol = a.residual_tol;
  SqueezingSpectrum sq;
  c.stage("squeezing_spectrum",
          [&] { sq = squeezing_spectrum(bg, linear_grid(0.0, a.omega_max, a.omega_points), c.p, opt); });

  CsvTable t({"omega_rad_s", "supermode_index", "v_minus_db", "v_plus_db"});
  double best = 1e300;
  int best_k = 0;
  std::size_t best_w = 0;
  for (std::size_t i = 0; i < sq.omega.size(); ++i)
    for (int k = 0; k < sq.v_minus_db.cols(); ++k) {
      t.cell(sq.omega[i]).cell(k).cell(sq.v_minus_db(i, k)).cell(sq.v_plus_db(i, k)).end_row();
      if (sq.v_minus_db(i, k) < best) {
        best = sq.v_minus_db(i, k);
        best_k = k;
        best_w = i;
      }
    }
  c.save(t, "squeezing_spectrum.csv");

  CsvTable co({"band", "mode_l", "eta_abs", "phi_rad", "omega_rad_s", "supermode_index"});
  for (const SupermodeCoefficients& k : sq.coefficients)
    for (std::size_t r = 0; r < k.mode.size(); ++r)
      co.cell(k.band[r] == Band::subharmonic ? "sub" : "pump")
          .cell(absolute_mode(k.mode[r], k.band[r]))
          .cell(k.eta_abs(r))
          .cell(k.phi(r))
          .cell(k.omega)
          .cell(k.supermode)
          .end_row();
  c.save(co, "supermode_coeffs.csv");

  c.summary["band"] = band_name(a.band);
  c.summary["best_v_minus_db"] = best;
  c.summary["best_supermode"] = best_k;
  c.summary["best_omega"] = sq.omega[best_w];
  c.summary["reanchors"] = sq.stats.reanchors;
  c.summary["max_residual"] = sq.stats.max_residual;
  c.log << "most squeezed: " << best << " dB (supermode " << best_k << ", omega " << sq.omega[best_w] << ")\n";
}

void do_oracle(Context& c, int& exit_code) {
  std::vector<OracleCheck> checks;
  fs::create_directories(c.cfg.output_dir);
  c.stage("oracle", [&] { checks = run_oracle(c.cfg.resonator, c.cfg.output_dir); });
  CsvTable t({"check", "value", "tolerance", "passed", "detail"});
  int passed = 0;
  for (const OracleCheck& k : checks) {
    passed += k.passed;
    t.cell(k.name).cell(k.value).cell(k.tolerance).cell(k.passed ? "1" : "0").cell(k.detail.empty() ? "-" : "error");
    t.end_row();
    c.log << (k.passed ? "PASS " : "FAIL ") << k.name << " value=" << k.value << " tol=" << k.tolerance;
    if (!k.detail.empty()) c.log << " (" << k.detail << ")";
    c.log << '\n';
  }
  c.save(t, "oracle.csv");
  c.summary["passed"] = passed;
  c.summary["failed"] = static_cast<int>(checks.size()) - passed;
  c.log << passed << "/" << checks.size() << " checks passed\n";
  if (passed != static_cast<int>(checks.size())) exit_code = 1;
}

}  // namespace

RunOutcome run(Subcommand cmd, const RunConfig& cfg, const RunOptions& opt, std::ostream& log) {
  RunOutcome out;
  const std::string started = utc_now();
  Context c{cfg, opt, log, {}, {}, json::array(), json::object()};
  try {
    fs::create_directories(cfg.output_dir);
    c.p = make_params(cfg.resonator);
    switch (cmd) {
      case Subcommand::params: do_params(c); break;
      case Subcommand::below: do_below(c); break;
      case Subcommand::threshold: do_threshold(c); break;
      case Subcommand::mi: do_mi(c); break;
      case Subcommand::comb: do_comb(c); break;
      case Subcommand::sweep: do_sweep(c); break;
      case Subcommand::squeeze: do_squeeze(c); break;
      case Subcommand::oracle: do_oracle(c, out.exit_code); break;
    }
  } catch (const std::exception& e) {
    out.error = error_record(e);
    out.exit_code = exit_code_for(e);
  }

  json m;
  m["subcommand"] = subcommand_name(cmd);
  m["code_version"] = code_version();
  m["config_hash"] = "fnv1a64:" + hex64(fnv1a(cfg.source_text));
  m["seed"] = cfg.seed;
  m["started_utc"] = started;
  m["finished_utc"] = utc_now();
  m["status"] = out.exit_code == 0 ? "ok" : "error";
  m["exit_code"] = out.exit_code;
  m["files"] = c.files;
  m["stages"] = c.stages;
  json defaults = json::object();
  for (const auto& [k, v] : cfg.defaults_filled) defaults[k] = v;
  m["defaults_filled"] = defaults;
  m["summary"] = c.summary;
  if (!out.error.is_null()) m["error"] = out.error;
  if (opt.resume) m["resume"] = *opt.resume;
  if (opt.checkpoint) m["checkpoint"] = *opt.checkpoint;

  out.manifest_path = c.path(std::string("manifest_") + subcommand_name(cmd) + ".json");
  try {
    atomic_write(out.manifest_path, m.dump(2) + "\n");
  } catch (const std::exception& e) {
    if (out.exit_code == 0) {
      out.error = error_record(e);
      out.exit_code = 1;
    }
  }
  out.files = c.files;
  out.summary = c.summary;
  return out;
}

}  // namespace qfc
