// qcs: command-line front end for the quantum frequency comb toolkit.
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qfc/config.hpp"
#include "qfc/csv.hpp"
#include "qfc/errors.hpp"
#include "qfc/run.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> set;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "YAML config file")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory (overrides output_dir)");
  sub->add_option("--seed", c.seed, "random seed (overrides seed)");
  sub->add_option("--set", c.set, "override a config key, e.g. --set sim.b_in=3e8")->take_all();
}

int fail(const std::exception& e) {
  std::cerr << qfc::error_record(e).dump() << '\n';
  return qfc::exit_code_for(e);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum frequency comb simulation and analysis"};
  app.require_subcommand(1);
  Common common;
  qfc::RunOptions opt;

  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"params", "below", "threshold", "mi", "comb", "sweep", "squeeze", "oracle"}) {
    subs[name] = app.add_subcommand(name);
    add_common(subs[name], common);
  }
  subs["params"]->description("derived device parameters");
  subs["below"]->description("below-threshold Duan criterion map");
  subs["threshold"]->description("per-pair oscillation thresholds");
  subs["mi"]->description("modulation-instability gain map");
  subs["comb"]->description("mean-field comb evolution");
  subs["sweep"]->description("comb runs over a list of pump amplitudes");
  subs["squeeze"]->description("multimode squeezing spectrum on a comb background");
  subs["oracle"]->description("small-N cross-module consistency checks");

  const std::map<std::string, qfc::ScanAxis> axes{{"pump", qfc::ScanAxis::pump_amplitude},
                                                  {"coupling", qfc::ScanAxis::coupling_ratio},
                                                  {"angle", qfc::ScanAxis::readout_angle}};
  subs["below"]->add_option("--scan", opt.scan, "scan axis")->transform(CLI::CheckedTransformer(axes));
  const std::map<std::string, qfc::MiBranch> branches{{"trivial", qfc::MiBranch::trivial},
                                                      {"nontrivial", qfc::MiBranch::nontrivial}};
  subs["mi"]->add_option("--branch", opt.branch, "steady-state branch")->transform(CLI::CheckedTransformer(branches));
  subs["comb"]->add_option("--resume", opt.resume, "continue from a checkpoint")->check(CLI::ExistingFile);
  subs["comb"]->add_flag("--sweep", opt.sweep, "ramp the detuning as configured in sim.sweep");

  std::optional<double> omega_max;
  std::optional<int> omega_points;
  std::optional<std::string> band;
  subs["squeeze"]->add_option("--checkpoint", opt.checkpoint, "comb background")->required()->check(CLI::ExistingFile);
  subs["squeeze"]->add_option("--omega-max", omega_max, "largest analysis frequency, rad/s");
  subs["squeeze"]->add_option("--omega-points", omega_points, "number of frequency points");
  subs["squeeze"]->add_option("--band", band, "band selection")->check(CLI::IsMember({"all", "sub", "pump"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    std::vector<std::string> overrides = common.set;
    if (common.out) overrides.push_back("output_dir=" + *common.out);
    if (common.seed) overrides.push_back("seed=" + std::to_string(*common.seed));
    if (omega_max) overrides.push_back("analysis.squeeze.omega_max=" + qfc::format_double(*omega_max));
    if (omega_points) overrides.push_back("analysis.squeeze.omega_points=" + std::to_string(*omega_points));
    if (band) overrides.push_back("analysis.squeeze.band=" + *band);

    const qfc::RunConfig cfg = qfc::load_config(common.config, overrides);
    const qfc::RunOutcome r = qfc::run(qfc::parse_subcommand(name), cfg, opt, std::cout);
    if (!r.error.is_null()) std::cerr << r.error.dump() << '\n';
    std::cout << "manifest: " << r.manifest_path << '\n';
    return r.exit_code;
  } catch (const std::exception& e) {
    return fail(e);
  }
}
