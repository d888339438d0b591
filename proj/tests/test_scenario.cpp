#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "kgelab/scenario.hpp"

using namespace kgelab;
namespace fs = std::filesystem;

namespace {

const char* kBase =
    "[model]\nm1 = 1\nm2 = 1\na1 = 1\na2 = 1\np = 2\nq = 2\n"
    "[grid]\ndim = 2\npoints = 32\nlengths = 20\n";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("kgelab-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ScenarioConfig scenario(const std::string& extra, const fs::path& out) {
  auto c = Config::parse_string(std::string(kBase) + extra);
  c.set("output.dir", out.string());
  return ScenarioConfig::from_config(c);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("missing model.m1 is a config error naming the key") {
  const auto c = Config::parse_string("[model]\nm2 = 1\na1 = 1\na2 = 1\np = 2\nq = 2\n[grid]\npoints = 32\nlengths = 20\n");
  try {
    ScenarioConfig::from_config(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("'model.m1'") != std::string::npos);
  }
}

TEST_CASE("module validators run at load time") {
  auto bad = [](const std::string& text) {
    return ScenarioConfig::from_config(Config::parse_string(text));
  };
  const std::string model = "[model]\nm1 = 1\nm2 = 1\na1 = 1\na2 = 1\n";
  CHECK_THROWS_AS(bad(model + "p = 1\nq = 2\n[grid]\npoints = 32\nlengths = 20\n"), ConfigError);
  CHECK_THROWS_AS(bad(model + "p = 2\nq = 2\n[grid]\npoints = 30\nlengths = 20\n"), ConfigError);
  CHECK_THROWS_AS(bad(model + "p = 2\nq = 2\n[grid]\npoints = 32\nlengths = 20\n[initial]\nkind = nope\n"),
                  ConfigError);
  CHECK_THROWS_AS(bad(model + "p = 2\nq = 2\n[grid]\npoints = 32\nlengths = 20\n[initial]\nkind = file\nfiles = /no/a,/no/b,/no/c,/no/d\n"),
                  ConfigError);
  CHECK_THROWS_AS(bad(model + "p = 2\nq = 2\n[grid]\npoints = 32\nlengths = 20\n[integrator]\nsample_every = 0\n"),
                  ConfigError);
  CHECK_THROWS_AS(bad(model + "p = 2\nq = 2\n[grid]\npoints = 32\nlengths = 20\n[potential]\nkind = harmonic\nstrength1 = -1\n"),
                  ConfigError);
}

TEST_CASE("scalar grid entries are replicated across the dimension") {
  const auto s = ScenarioConfig::from_config(Config::parse_string(kBase));
  CHECK(s.points == std::vector<int>{32, 32});
  CHECK(s.lengths == std::vector<double>{20.0, 20.0});
  CHECK(s.model().n == 2);
  CHECK(s.bump_width() == 2.0);
}

TEST_CASE("config round trip keeps every resolved value") {
  const auto a = ScenarioConfig::from_config(Config::parse_string(
      std::string(kBase) +
      "[potential]\nkind = gaussian_well\ndepth1 = 0.5\nwidth = 3\n"
      "[integrator]\ndt = 0.002\nt_end = 3\nsample_every = 7\naux = none\n"
      "[initial]\nkind = gaussian_bumps\namp_u = 0.3\nvel_v = -0.1\n"
      "[groundstate]\nstarts = 2\n"
      "seed = 12\n"));
  const Config once = a.to_config();
  const auto b = ScenarioConfig::from_config(Config::parse_string(once.to_string()));
  CHECK(b.to_config().entries() == once.entries());
  CHECK(b.depth2 == 0.5);
  CHECK(b.integrator.dt.value() == 0.002);
  CHECK_FALSE(b.aux_auto);
  CHECK(b.vel_v == -0.1);
  CHECK(b.starts == 2);
}

TEST_CASE("small-data simulate: exit 0, low drift, deterministic CSV") {
  const std::string extra =
      "[integrator]\ndt = 0.001\nt_end = 2\nsample_every = 20\n"
      "[initial]\nkind = gaussian_bumps\namp_u = 0.2\namp_v = 0.15\nwidth = 2\nvel_u = 0.1\n";
  const auto d1 = scratch("sim1"), d2 = scratch("sim2");
  std::ostringstream log;
  const auto r1 = run_simulate(scenario(extra, d1), log);
  const auto r2 = run_simulate(scenario(extra, d2), log);
  CHECK(r1.exit == exit_code::ok);
  CHECK(r1.trajectory.max_drift < 1e-6);
  CHECK(slurp(d1 / "diagnostics.csv") == slurp(d2 / "diagnostics.csv"));
  std::ifstream js(d1 / "summary.json");
  const auto j = nlohmann::json::parse(js);
  CHECK(j["terminal"] == "completed");
  CHECK(j["E_drift"].get<double>() < 1e-6);

  // The CSV reads back into the same samples.
  const auto tr = read_trajectory_csv((d1 / "diagnostics.csv").string(), 1e8);
  REQUIRE(tr.samples.size() == r1.trajectory.samples.size());
  CHECK(tr.terminal == Terminal::completed);
  CHECK(tr.samples.back().report.E == r1.trajectory.samples.back().report.E);
  CHECK(tr.samples.back().g.Gsecond == r1.trajectory.samples.back().g.Gsecond);
}

TEST_CASE("negative-energy simulate and certify") {
  const std::string extra =
      "[integrator]\ndt = 0.0005\nt_end = 2\nsample_every = 4\n"
      "[initial]\nkind = negative_energy_construct\nwidth = 2\n";
  const auto dir = scratch("neg");
  std::ostringstream log;
  const auto cfg = scenario(extra, dir);
  const auto r = run_simulate(cfg, log);
  CHECK(r.exit == exit_code::blowup);
  REQUIRE(r.detection.has_value());
  REQUIRE(r.classification.tmax_bound.has_value());
  CHECK(r.detection->estimated_time.value() <= *r.classification.tmax_bound);

  const auto cert = run_certify(cfg, (dir / "diagnostics.csv").string(), log);
  CHECK(cert.exit == exit_code::ok);
  CHECK(cert.detection.consistent_with_blowup);
  CHECK(fs::exists(dir / "certify.json"));
}

TEST_CASE("ground-state run persists artifacts and is reproducible") {
  const auto d1 = scratch("gs1"), d2 = scratch("gs2");
  std::ostringstream log;
  const std::string extra = "[groundstate]\nstarts = 2\nseed = 4\n";
  const auto a = run_ground_state(scenario(extra, d1), log);
  const auto b = run_ground_state(scenario(extra, d2), log);
  REQUIRE(a.exit == exit_code::ok);
  CHECK(a.best().d > 0.0);
  CHECK(a.best().d == b.best().d);
  CHECK(fs::exists(d1 / "Phi.snap"));
  CHECK(fs::exists(d1 / "Psi.snap"));
  CHECK(read_d_file((d1 / "groundstate.json").string()) == a.best().d);
  CHECK(log.str().find("d = ") != std::string::npos);

  // Gamma-perturbed data loaded from those artifacts.
  const auto cdir = scratch("cls");
  const auto cfg = scenario("[initial]\nkind = gamma_perturbed\ngamma = 1.2\nground_state_dir = " +
                                d1.string() + "\n",
                            cdir);
  const auto rep = run_classify(cfg, read_d_file((d1 / "groundstate.json").string()), log);
  CHECK(rep.thm41 == Verdict::holds);
  CHECK(rep.cross0 == 0.0);
  CHECK(fs::exists(cdir / "classification.json"));
}

TEST_CASE("ground-state run outside the window is refused") {
  auto c = Config::parse_string(
      "[model]\nm1 = 1\nm2 = 1\na1 = 1\na2 = 1\np = 3\nq = 3\n[grid]\ndim = 3\npoints = 8\nlengths = 10\n");
  // Locally admissible, but 3 >= 2/(n-2) puts it outside the ground-state window.
  const auto cfg = ScenarioConfig::from_config(c);
  std::ostringstream log;
  CHECK_THROWS_AS(run_ground_state(cfg, log), ConfigError);
}

TEST_CASE("non-converged ground state gives a distinct exit") {
  const auto dir = scratch("gsfail");
  std::ostringstream log;
  const auto r = run_ground_state(scenario("[groundstate]\nstarts = 1\nmax_iters = 2\n", dir), log);
  CHECK(r.exit == exit_code::not_converged);
  CHECK_FALSE(fs::exists(dir / "groundstate.json"));
}

TEST_CASE("exit codes are stable") {
  CHECK(exit_code::ok == 0);
  CHECK(exit_code::config_error == 1);
  CHECK(exit_code::blowup == 2);
  CHECK(exit_code::unstable == 3);
  CHECK(exit_code::not_converged == 4);
  CHECK(exit_code::not_certified == 5);
}
