#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qfc/checkpoint.hpp"
#include "qfc/config.hpp"
#include "qfc/csv.hpp"
#include "qfc/errors.hpp"
#include "qfc/oracle.hpp"
#include "qfc/run.hpp"

using namespace qfc;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(resonator:
  omega0: 1.20688e15
  omegap: 2.41406e15
  kp1: 7.8799e-9
  radius: 100.0e-6
  kpp1: -0.0219e-24
  kpp2: 0.3624e-24
  q0: 3.7e6
  coupling_ratio: 1.222
  a_eff: 0.997e-12
  g0: 5.0e5
sim:
  dt: 1.0e-13
  t_end: 1.0e-11
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("qfc_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string config_path(const char* name) { return std::string(QFC_SOURCE_DIR) + "/configs/" + name; }

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(text, overrides);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal config fills defaults and records them") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.sim.n_modes == 16);
  CHECK(c.output_dir == "out");
  CHECK(c.seed == 1);
  bool saw_n_modes = false;
  for (const auto& [key, value] : c.defaults_filled) saw_n_modes |= key == "sim.n_modes";
  CHECK(saw_n_modes);

  RunConfig d = parse_config(kMinimal, {"output_dir=" + scratch("defaults").string()});
  std::ostringstream log;
  const RunOutcome r = run(Subcommand::params, d, {}, log);
  REQUIRE(r.exit_code == 0);
  const auto m = nlohmann::json::parse(slurp(r.manifest_path));
  CHECK(m["defaults_filled"].contains("sim.n_modes"));
}

TEST_CASE("validation errors name the key") {
  std::string bad = kMinimal;
  bad.replace(bad.find("q0: 3.7e6"), 9, "q0: -3.7e6");
  CHECK(error_of(bad).find("resonator.q0") != std::string::npos);

  CHECK(error_of(std::string(kMinimal) + "bogus: 1\n").find("bogus") != std::string::npos);
  const std::string unknown = error_of(std::string(kMinimal) + "  typo_key: 3\n");
  CHECK(unknown.find("typo_key") != std::string::npos);
  CHECK(unknown.find("line 15") != std::string::npos);

  CHECK(error_of(kMinimal, {"sim.dt=1e-6"}).find("dt") != std::string::npos);
  CHECK(error_of("resonator: [1, 2\n").find("line") != std::string::npos);
  CHECK_FALSE(error_of(kMinimal, {"sim.b_in=1e8"}).size());
}

TEST_CASE("shipped device config parses and round-trips") {
  const RunConfig c = load_config(config_path("ln_device.yaml"));
  CHECK(c.resonator.omega0 == 1.20688e15);
  CHECK(c.resonator.omegap == 2.41406e15);
  CHECK(c.resonator.q0 == 3.7e6);
  CHECK(c.resonator.coupling_ratio == 1.222);
  CHECK(c.resonator.a_eff == 0.997e-12);
  CHECK(*c.resonator.kp1 == 7.8799e-9);
  CHECK(c.resonator.kpp1 == -0.0219e-24);
  CHECK(c.resonator.kp2 == 8.0856e-9);
  CHECK(c.resonator.kpp2 == 0.3624e-24);

  const RunConfig again = parse_config(emit_config(c));
  CHECK(emit_config(again) == emit_config(c));
  CHECK(again.resonator.omega0 == c.resonator.omega0);
  CHECK(again.sim.n_modes == c.sim.n_modes);
  CHECK(again.analysis.sweep.b_in == c.analysis.sweep.b_in);
}

TEST_CASE("checkpoint round trip and rejection") {
  const fs::path d = scratch("ckpt");
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  ModeState s;
  s.alpha.resize(12);
  s.beta.resize(12);
  for (int i = 0; i < 12; ++i) {
    s.alpha(i) = cplx(g(rng), g(rng));
    s.beta(i) = cplx(g(rng), g(rng));
  }
  s.t = 3.5e-9;
  const std::string path = (d / "a.qfc").string();
  write_checkpoint(path, s);
  const ModeState r = read_checkpoint(path);
  CHECK(r.t == s.t);
  CHECK((r.alpha - s.alpha).norm() < 1e-12);
  CHECK((r.beta - s.beta).norm() < 1e-12);

  const std::string bytes = slurp(path);
  CHECK(bytes.substr(0, 4) == "QFC1");
  std::ofstream(d / "trunc.qfc", std::ios::binary) << bytes.substr(0, bytes.size() - 8);
  CHECK_THROWS(read_checkpoint((d / "trunc.qfc").string()));
  std::string wrong = bytes;
  wrong[0] = 'X';
  std::ofstream(d / "magic.qfc", std::ios::binary) << wrong;
  CHECK_THROWS(read_checkpoint((d / "magic.qfc").string()));
  std::ofstream(d / "long.qfc", std::ios::binary) << bytes << "extra";
  CHECK_THROWS(read_checkpoint((d / "long.qfc").string()));
}

TEST_CASE("csv formatting") {
  CsvTable t({"a", "b"});
  t.cell(0.1).cell(3).end_row();
  t.cell(1e-300).cell("x").end_row();
  CHECK(t.text() == "a,b\n0.1,3\n1e-300,x\n");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
}

TEST_CASE("params reproduces the device listing") {
  RunConfig c = load_config(config_path("ln_device.yaml"), {"output_dir=" + scratch("params").string()});
  std::ostringstream log;
  const RunOutcome r = run(Subcommand::params, c, {}, log);
  REQUIRE(r.exit_code == 0);
  std::istringstream in(slurp(fs::path(c.output_dir) / "params.csv"));
  std::string line;
  std::map<std::string, double> v;
  std::getline(in, line);
  CHECK(line == "quantity,value,unit");
  while (std::getline(in, line)) {
    const auto a = line.find(','), b = line.find(',', a + 1);
    v[line.substr(0, a)] = std::stod(line.substr(a + 1, b - a - 1));
  }
  CHECK(v.at("mu") == doctest::Approx(3.27e8).epsilon(1e-2));
  CHECK(v.at("q_ex") == doctest::Approx(3.03e6).epsilon(1e-2));
  CHECK(v.at("nu_f") == doctest::Approx(201.976e9).epsilon(1e-3));
}

TEST_CASE("oracle subcommand passes on the shipped device") {
  for (const OracleCheck& c : run_oracle(load_config(config_path("small.yaml")).resonator, scratch("oracle").string())) {
    INFO(c.name << ": " << c.value << " " << c.detail);
    CHECK(c.passed);
  }
}

TEST_CASE("comb output is byte-identical for the same seed") {
  auto once = [](const std::string& tag) {
    RunConfig c = load_config(config_path("small.yaml"), {"output_dir=" + scratch(tag).string(), "sim.t_end=2e-11"});
    std::ostringstream log;
    const RunOutcome r = run(Subcommand::comb, c, {}, log);
    REQUIRE(r.exit_code == 0);
    return slurp(fs::path(c.output_dir) / "powers.csv");
  };
  const std::string a = once("comb_a"), b = once("comb_b");
  CHECK(a.size() > 20);
  CHECK(a == b);
}

TEST_CASE("errors map to exit codes and records") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(DivergenceError("x", 3)) == 3);
  CHECK(exit_code_for(StabilityError("x", 0.1)) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
  const auto rec = error_record(StabilityError("unstable", 0.25));
  CHECK(rec["exit_code"] == 4);
  CHECK(rec["message"] == "unstable");

  // Squeeze on an above-threshold pump-only checkpoint is rejected by the gate.
  const fs::path d = scratch("gate");
  ModeState s;
  s.alpha = VectorXc::Zero(4);
  s.beta = VectorXc::Zero(4);
  s.beta(1) = cplx(1e10, 0);
  write_checkpoint((d / "hot.qfc").string(), s);
  RunConfig c = load_config(config_path("small.yaml"), {"output_dir=" + d.string(), "analysis.squeeze.omega_points=2"});
  RunOptions o;
  o.checkpoint = (d / "hot.qfc").string();
  std::ostringstream log;
  const RunOutcome r = run(Subcommand::squeeze, c, o, log);
  CHECK(r.exit_code == 4);
  const auto m = nlohmann::json::parse(slurp(r.manifest_path));
  CHECK(m["status"] != "ok");
  CHECK(m["exit_code"] == 4);
}
