#include "qfc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "qfc/errors.hpp"

namespace qfc {

namespace {

std::string at_line(const YAML::Node& n) {
  if (!n || n.Mark().is_null()) return "";
  return " (line " + std::to_string(n.Mark().line + 1) + ")";
}

// Reads one mapping, remembers which keys were consumed and rejects the rest.
class Section {
 public:
  Section(YAML::Node node, std::string prefix, RunConfig& cfg) : node_(std::move(node)), prefix_(std::move(prefix)), cfg_(cfg) {
    if (node_ && node_.IsNull()) node_ = YAML::Node(YAML::NodeType::Undefined);
    if (node_ && !node_.IsMap()) throw ConfigError("'" + prefix_ + "' must be a mapping" + at_line(node_));
  }

  bool has(const std::string& key) const { return static_cast<bool>(node(key)); }

  template <typename T>
  T required(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) throw ConfigError("missing required key '" + name(key) + "'" + at_line(node_));
    return as<T>(key);
  }

  template <typename T>
  T optional(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!has(key)) {
      std::ostringstream os;
      os.precision(17);
      os << fallback;
      cfg_.defaults_filled.emplace_back(name(key), os.str());
      return fallback;
    }
    return as<T>(key);
  }

  template <typename T>
  std::optional<T> maybe(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    return as<T>(key);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(node(key), name(key), cfg_);
  }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return node(key);
  }

  void reject_unknown() const {
    if (!node_) return;
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      if (!seen_.count(k)) throw ConfigError("unknown key '" + name(k) + "'" + at_line(kv.first));
    }
  }

  std::string name(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
  // Const lookup: never inserts, missing keys come back undefined.
  YAML::Node node(const std::string& key) const {
    if (!node_) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& c = node_;
    return c[key];
  }

 private:
  template <typename T>
  T as(const std::string& key) {
    const YAML::Node v = node(key);
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("key '" + name(key) + "' has the wrong type" + at_line(v));
    }
  }

  YAML::Node node_;
  std::string prefix_;
  RunConfig& cfg_;
  std::set<std::string> seen_;
};

void require(bool ok, Section& s, const std::string& key, const std::string& constraint) {
  if (!ok) throw ConfigError("'" + s.name(key) + "' must be " + constraint + at_line(s.node(key)));
}

BandSelection parse_band(const std::string& v, Section& s) {
  if (v == "all") return BandSelection::all;
  if (v == "sub") return BandSelection::subharmonic;
  if (v == "pump") return BandSelection::pump;
  throw ConfigError("'" + s.name("band") + "' must be one of all, sub, pump" + at_line(s.node("band")));
}

void apply_override(YAML::Node& root, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + kv + "' is not key=value");
  const std::string path = kv.substr(0, eq);
  YAML::Node value = YAML::Load(kv.substr(eq + 1));
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  YAML::Node cur = root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = cur[parts[i]];
    if (!next) {
      cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next = cur[parts[i]];
    }
    cur.reset(next);
  }
  cur[parts.back()] = value;
}

void read_resonator(Section s, RunConfig& c) {
  ResonatorSpec& r = c.resonator;
  r.omega0 = s.required<double>("omega0");
  r.omegap = s.required<double>("omegap");
  r.fsr_hz = s.maybe<double>("fsr_hz");
  r.kp1 = s.maybe<double>("kp1");
  r.radius = s.required<double>("radius");
  r.kpp1 = s.required<double>("kpp1");
  r.kp2 = s.optional<double>("kp2", 0.0);
  r.kpp2 = s.required<double>("kpp2");
  r.q0 = s.required<double>("q0");
  r.coupling_ratio = s.required<double>("coupling_ratio");
  r.a_eff = s.required<double>("a_eff");
  r.g0 = s.required<double>("g0");
  r.chi2 = s.optional<double>("chi2", 0.0);
  r.eps1 = s.optional<double>("eps1", 0.0);
  r.big_gamma_pump = s.maybe<double>("big_gamma_pump");
  s.reject_unknown();

  require(r.omega0 > 0, s, "omega0", "> 0");
  require(r.omegap > 0, s, "omegap", "> 0");
  require(r.radius > 0, s, "radius", "> 0");
  require(r.q0 > 0, s, "q0", "> 0");
  require(r.coupling_ratio > 0, s, "coupling_ratio", "> 0");
  require(r.g0 >= 0, s, "g0", ">= 0");
  require(r.a_eff > 0, s, "a_eff", "> 0");
  if (r.fsr_hz) require(*r.fsr_hz > 0, s, "fsr_hz", "> 0");
  if (r.kp1) require(*r.kp1 > 0, s, "kp1", "> 0");
  if (!r.fsr_hz && !r.kp1) throw ConfigError("'resonator' needs fsr_hz or kp1" + at_line(s.node("omega0")));
}

void read_sim(Section s, RunConfig& c) {
  SimConfig& m = c.sim;
  m.n_modes = s.optional<int>("n_modes", 16);
  m.dt = s.required<double>("dt");
  m.t_end = s.required<double>("t_end");
  m.b_in = s.optional<double>("b_in", 0.0);
  m.delta = s.optional<double>("delta", 0.0);
  m.delta_p = s.optional<double>("delta_p", 0.0);
  m.noise_amp = s.optional<double>("noise_amp", std::sqrt(0.5));
  m.record_every = s.optional<long>("record_every", 1000);
  m.power_every = s.optional<long>("power_every", 100);
  c.spacetime_every = s.optional<long>("spacetime_every", 0);
  if (s.has("sweep")) {
    Section w = s.child("sweep");
    DetuningRamp r;
    r.delta_start = w.required<double>("delta_start");
    r.delta_end = w.required<double>("delta_end");
    r.pump_offset = w.optional<double>("pump_offset", 0.0);
    w.reject_unknown();
    m.sweep = r;
  } else {
    s.child("sweep");
  }
  s.reject_unknown();

  require(m.n_modes >= 2, s, "n_modes", ">= 2");
  require(m.dt > 0, s, "dt", "> 0");
  require(m.t_end >= m.dt, s, "t_end", ">= dt");
  require(m.b_in >= 0, s, "b_in", ">= 0");
  require(m.noise_amp >= 0, s, "noise_amp", ">= 0");
  require(m.record_every >= 1, s, "record_every", ">= 1");
  require(m.power_every >= 1, s, "power_every", ">= 1");
  require(c.spacetime_every >= 0, s, "spacetime_every", ">= 0");
}

// dt must resolve the loss rate and the pump-mediated coupling rate.
void check_step_bound(const RunConfig& c, const ResonatorParams& p) {
  const double pump_rate = p.g0 * std::sqrt(2.0 * p.gamma) * c.sim.b_in / p.big_gamma_pump;
  const double rate = std::max(p.big_gamma_pump, pump_rate);
  if (c.sim.dt * rate > 0.5) {
    std::ostringstream os;
    os << "'sim.dt' must satisfy dt * max(loss rate, coupling rate) <= 0.5; got " << c.sim.dt * rate;
    throw ConfigError(os.str());
  }
}

void read_analysis(Section s, RunConfig& c) {
  AnalysisConfig& a = c.analysis;
  {
    Section b = s.child("below");
    a.below.delta_s = b.optional<double>("delta_s", 0.0);
    a.below.delta_i = b.optional<double>("delta_i", a.below.delta_s);
    a.below.delta_p = b.optional<double>("delta_p", 0.0);
    a.below.b_in = b.optional<double>("b_in", 0.0);
    a.below.theta_in = b.optional<double>("theta_in", 0.0);
    a.below.theta_s = b.optional<double>("theta_s", 0.0);
    a.below.theta_i = b.optional<double>("theta_i", 0.0);
    a.below.omega_max = b.optional<double>("omega_max", 2e9);
    a.below.omega_points = b.optional<int>("omega_points", 64);
    a.below.scan_min = b.optional<double>("scan_min", 0.0);
    a.below.scan_max = b.optional<double>("scan_max", 0.0);
    a.below.scan_points = b.optional<int>("scan_points", 64);
    b.reject_unknown();
    require(a.below.b_in >= 0, b, "b_in", ">= 0");
    require(a.below.omega_points >= 1, b, "omega_points", ">= 1");
    require(a.below.scan_points >= 1, b, "scan_points", ">= 1");
  }
  {
    Section t = s.child("threshold");
    a.threshold.mode_max = t.optional<int>("mode_max", 4);
    a.threshold.delta_min = t.optional<double>("delta_min", 0.0);
    a.threshold.delta_max = t.optional<double>("delta_max", a.threshold.delta_min);
    a.threshold.delta_points = t.optional<int>("delta_points", 1);
    a.threshold.pump_offset = t.optional<double>("pump_offset", 0.0);
    t.reject_unknown();
    require(a.threshold.mode_max >= 1, t, "mode_max", ">= 1");
    require(a.threshold.delta_points >= 1, t, "delta_points", ">= 1");
  }
  {
    Section m = s.child("mi");
    a.mi.b_in = m.optional<double>("b_in", c.sim.b_in);
    a.mi.delta_min = m.optional<double>("delta_min", 0.0);
    a.mi.delta_max = m.optional<double>("delta_max", a.mi.delta_min);
    a.mi.delta_points = m.optional<int>("delta_points", 32);
    a.mi.mode_max = m.optional<int>("mode_max", 50);
    m.reject_unknown();
    require(a.mi.b_in >= 0, m, "b_in", ">= 0");
    require(a.mi.delta_points >= 1, m, "delta_points", ">= 1");
    require(a.mi.mode_max >= 0, m, "mode_max", ">= 0");
  }
  {
    Section q = s.child("squeeze");
    a.squeeze.omega_max = q.optional<double>("omega_max", 2e9);
    a.squeeze.omega_points = q.optional<int>("omega_points", 64);
    a.squeeze.band = parse_band(q.optional<std::string>("band", "all"), q);
    a.squeeze.coefficient_supermodes = q.optional<int>("coefficient_supermodes", 1);
    a.squeeze.residual_tol = q.optional<double>("residual_tol", 1e-6);
    q.reject_unknown();
    require(a.squeeze.omega_max >= 0, q, "omega_max", ">= 0");
    require(a.squeeze.omega_points >= 1, q, "omega_points", ">= 1");
    require(a.squeeze.coefficient_supermodes >= 0, q, "coefficient_supermodes", ">= 0");
    require(a.squeeze.residual_tol > 0, q, "residual_tol", "> 0");
  }
  {
    Section w = s.child("sweep");
    if (w.has("b_in")) {
      a.sweep.b_in = w.required<std::vector<double>>("b_in");
    } else {
      w.optional<double>("b_in", c.sim.b_in);
      a.sweep.b_in = {c.sim.b_in};
    }
    a.sweep.workers = w.optional<int>("workers", 1);
    w.reject_unknown();
    require(a.sweep.workers >= 1, w, "workers", ">= 1");
    for (double b : a.sweep.b_in) require(b >= 0, w, "b_in", "non-negative");
  }
  s.reject_unknown();
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("parse error at line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("config must be a mapping at the top level");
  for (const std::string& o : overrides) apply_override(root, o);

  RunConfig c;
  Section top(root, "", c);
  read_resonator(top.child("resonator"), c);
  read_sim(top.child("sim"), c);
  c.output_dir = top.optional<std::string>("output_dir", "out");
  c.seed = top.optional<std::uint64_t>("seed", 1);
  c.sim.noise_seed = c.seed;
  read_analysis(top.child("analysis"), c);
  top.reject_unknown();

  const ResonatorParams p = make_params(c.resonator);
  check_step_bound(c, p);

  YAML::Emitter out;
  out << root;
  c.source_text = out.c_str();
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string emit_config(const RunConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;

  const ResonatorSpec& r = c.resonator;
  e << YAML::Key << "resonator" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "omega0" << YAML::Value << r.omega0;
  e << YAML::Key << "omegap" << YAML::Value << r.omegap;
  if (r.fsr_hz) e << YAML::Key << "fsr_hz" << YAML::Value << *r.fsr_hz;
  if (r.kp1) e << YAML::Key << "kp1" << YAML::Value << *r.kp1;
  e << YAML::Key << "radius" << YAML::Value << r.radius;
  e << YAML::Key << "kpp1" << YAML::Value << r.kpp1;
  e << YAML::Key << "kp2" << YAML::Value << r.kp2;
  e << YAML::Key << "kpp2" << YAML::Value << r.kpp2;
  e << YAML::Key << "q0" << YAML::Value << r.q0;
  e << YAML::Key << "coupling_ratio" << YAML::Value << r.coupling_ratio;
  e << YAML::Key << "a_eff" << YAML::Value << r.a_eff;
  e << YAML::Key << "g0" << YAML::Value << r.g0;
  e << YAML::Key << "chi2" << YAML::Value << r.chi2;
  e << YAML::Key << "eps1" << YAML::Value << r.eps1;
  if (r.big_gamma_pump) e << YAML::Key << "big_gamma_pump" << YAML::Value << *r.big_gamma_pump;
  e << YAML::EndMap;

  const SimConfig& m = c.sim;
  e << YAML::Key << "sim" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_modes" << YAML::Value << m.n_modes;
  e << YAML::Key << "dt" << YAML::Value << m.dt;
  e << YAML::Key << "t_end" << YAML::Value << m.t_end;
  e << YAML::Key << "b_in" << YAML::Value << m.b_in;
  e << YAML::Key << "delta" << YAML::Value << m.delta;
  e << YAML::Key << "delta_p" << YAML::Value << m.delta_p;
  e << YAML::Key << "noise_amp" << YAML::Value << m.noise_amp;
  e << YAML::Key << "record_every" << YAML::Value << m.record_every;
  e << YAML::Key << "power_every" << YAML::Value << m.power_every;
  e << YAML::Key << "spacetime_every" << YAML::Value << c.spacetime_every;
  if (m.sweep) {
    e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "delta_start" << YAML::Value << m.sweep->delta_start;
    e << YAML::Key << "delta_end" << YAML::Value << m.sweep->delta_end;
    e << YAML::Key << "pump_offset" << YAML::Value << m.sweep->pump_offset;
    e << YAML::EndMap;
  }
  e << YAML::EndMap;

  const AnalysisConfig& a = c.analysis;
  e << YAML::Key << "analysis" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "below" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "delta_s" << YAML::Value << a.below.delta_s;
  e << YAML::Key << "delta_i" << YAML::Value << a.below.delta_i;
  e << YAML::Key << "delta_p" << YAML::Value << a.below.delta_p;
  e << YAML::Key << "b_in" << YAML::Value << a.below.b_in;
  e << YAML::Key << "theta_in" << YAML::Value << a.below.theta_in;
  e << YAML::Key << "theta_s" << YAML::Value << a.below.theta_s;
  e << YAML::Key << "theta_i" << YAML::Value << a.below.theta_i;
  e << YAML::Key << "omega_max" << YAML::Value << a.below.omega_max;
  e << YAML::Key << "omega_points" << YAML::Value << a.below.omega_points;
  e << YAML::Key << "scan_min" << YAML::Value << a.below.scan_min;
  e << YAML::Key << "scan_max" << YAML::Value << a.below.scan_max;
  e << YAML::Key << "scan_points" << YAML::Value << a.below.scan_points;
  e << YAML::EndMap;
  e << YAML::Key << "threshold" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "mode_max" << YAML::Value << a.threshold.mode_max;
  e << YAML::Key << "delta_min" << YAML::Value << a.threshold.delta_min;
  e << YAML::Key << "delta_max" << YAML::Value << a.threshold.delta_max;
  e << YAML::Key << "delta_points" << YAML::Value << a.threshold.delta_points;
  e << YAML::Key << "pump_offset" << YAML::Value << a.threshold.pump_offset;
  e << YAML::EndMap;
  e << YAML::Key << "mi" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "b_in" << YAML::Value << a.mi.b_in;
  e << YAML::Key << "delta_min" << YAML::Value << a.mi.delta_min;
  e << YAML::Key << "delta_max" << YAML::Value << a.mi.delta_max;
  e << YAML::Key << "delta_points" << YAML::Value << a.mi.delta_points;
  e << YAML::Key << "mode_max" << YAML::Value << a.mi.mode_max;
  e << YAML::EndMap;
  e << YAML::Key << "squeeze" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "omega_max" << YAML::Value << a.squeeze.omega_max;
  e << YAML::Key << "omega_points" << YAML::Value << a.squeeze.omega_points;
  e << YAML::Key << "band" << YAML::Value << band_name(a.squeeze.band);
  e << YAML::Key << "coefficient_supermodes" << YAML::Value << a.squeeze.coefficient_supermodes;
  e << YAML::Key << "residual_tol" << YAML::Value << a.squeeze.residual_tol;
  e << YAML::EndMap;
  e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "b_in" << YAML::Value << YAML::Flow << a.sweep.b_in;
  e << YAML::Key << "workers" << YAML::Value << a.sweep.workers;
  e << YAML::EndMap;
  e << YAML::EndMap;

  e << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::EndMap;
  return e.c_str();
}

}  // namespace qfc
