// kgelab: scenario runner for the coupled Klein-Gordon lab.
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kgelab/scenario.hpp"

using namespace kgelab;

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<long> seed;
  std::optional<int> starts;
  std::string d_file;
  std::string csv;
};

ScenarioConfig load_scenario(const Flags& f) {
  Config raw = Config::load(f.config);
  if (!f.out.empty()) raw.set("output.dir", f.out);
  if (f.seed) raw.set("seed", std::to_string(*f.seed));
  if (f.starts) raw.set("groundstate.starts", std::to_string(*f.starts));
  return ScenarioConfig::from_config(raw);
}

std::optional<double> level(const Flags& f) {
  if (f.d_file.empty()) return std::nullopt;
  return read_d_file(f.d_file);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for coupled nonlinear Klein-Gordon systems"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "scenario config file")->required()->check(
        CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory (overrides output.dir)");
    sub->add_option("--seed", f.seed, "seed for randomized constructions");
  };

  auto* gs = app.add_subcommand("ground-state", "minimize J on the Nehari manifold");
  add_common(gs);
  gs->add_option("--starts", f.starts, "number of multi-start seeds")->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("simulate", "evolve the configured initial data");
  add_common(sim);
  sim->add_option("--d-file", f.d_file, "ground-state JSON supplying d");

  auto* cls = app.add_subcommand("classify", "evaluate the blow-up and global-existence hypotheses");
  add_common(cls);
  cls->add_option("--d-file", f.d_file, "ground-state JSON supplying d");

  auto* cert = app.add_subcommand("certify", "check a trajectory for blow-up evidence");
  add_common(cert);
  cert->add_option("--csv", f.csv, "existing diagnostics CSV (simulates when omitted)");
  cert->add_option("--d-file", f.d_file, "ground-state JSON supplying d");

  auto* ver = app.add_subcommand("verify", "run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_code::config_error;
  }

  try {
    if (*ver) {
      const auto rows = run_verify(std::cout);
      for (const auto& r : rows)
        if (!r.pass) return 1;
      return 0;
    }
    const ScenarioConfig cfg = load_scenario(f);
    if (*gs) return run_ground_state(cfg, std::cout).exit;
    if (*sim) return run_simulate(cfg, std::cout, level(f)).exit;
    if (*cls) {
      run_classify(cfg, level(f), std::cout);
      return exit_code::ok;
    }
    if (*cert) return run_certify(cfg, f.csv, std::cout).exit;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code::config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code::config_error;
  }
  return exit_code::ok;
}
