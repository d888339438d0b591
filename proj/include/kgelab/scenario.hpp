#ifndef KGELAB_SCENARIO_HPP
#define KGELAB_SCENARIO_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kgelab/blowup.hpp"
#include "kgelab/config.hpp"
#include "kgelab/groundstate.hpp"

namespace kgelab {

enum class InitialKind {
  gaussian_bumps,
  gamma_perturbed,
  file,
  zero_energy_construct,
  negative_energy_construct,
  thm61_construct,
};

std::string to_string(InitialKind kind);
InitialKind initial_kind_from_string(const std::string& name);

/// Exit codes of the command-line runner.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 1;
inline constexpr int blowup = 2;
inline constexpr int unstable = 3;
inline constexpr int not_converged = 4;
inline constexpr int not_certified = 5;
}  // namespace exit_code

/// Fully resolved scenario. from_config validates every block before any
/// computation; to_config writes every resolved value back out.
struct ScenarioConfig {
  // model
  double m1 = 1.0, m2 = 1.0, a1 = 1.0, a2 = 1.0, p = 2.0, q = 2.0;
  ModelOptions options{};
  // grid
  std::vector<int> points;
  std::vector<double> lengths;
  // potential
  PotentialKind potential_kind = PotentialKind::zero;
  std::vector<std::string> potential_files;
  double strength1 = 0.0, strength2 = 0.0;
  double depth1 = 0.0, depth2 = 0.0, well_width = 1.0;
  // integrator
  IntegratorConfig integrator{};
  bool aux_auto = true;
  // initial data
  InitialKind initial_kind = InitialKind::gaussian_bumps;
  double amp_u = 0.1, amp_v = 0.1;
  double width = 0.0;  // 0: a tenth of the smallest box length
  double vel_u = 0.0, vel_v = 0.0;
  double gamma = 1.1;
  std::vector<std::string> initial_files;  // u, ut, v, vt snapshots
  std::string ground_state_dir;
  // ground state
  GroundStateOptions ground_state{};
  int starts = 3;
  // output
  std::string out_dir = "kgelab-out";
  std::string csv = "diagnostics.csv";
  long snapshot_every = 0;
  long seed = 0;

  static ScenarioConfig from_config(const Config& cfg);
  Config to_config() const;

  int dim() const { return static_cast<int>(points.size()); }
  ModelParams model() const;
  Grid grid() const;
  PotentialPair potential(const Grid& grid) const;
  double bump_width() const;
};

struct GroundStateRun {
  int best_start = -1;  // -1 when no start converged
  std::vector<GroundStateResult> all;
  int exit = exit_code::ok;

  /// Lowest converged level, or the first start when none converged.
  const GroundStateResult& best() const { return all.at(best_start < 0 ? 0 : best_start); }
};

/// Multi-start ground-state computation. Persists Phi.snap, Psi.snap and
/// groundstate.json of the lowest converged level into cfg.out_dir.
GroundStateRun run_ground_state(const ScenarioConfig& cfg, std::ostream& log);

/// Initial data for the configured kind. `d` receives the ground-state level
/// when the construction computed or loaded one.
StateVector build_initial_state(const ScenarioConfig& cfg, std::ostream& log,
                                std::optional<double>* d = nullptr);

/// Reads the "d" entry of a ground-state JSON record.
double read_d_file(const std::string& path);

struct SimulateRun {
  Trajectory trajectory;
  ClassificationReport classification;
  std::optional<DetectionReport> detection;
  int exit = exit_code::ok;
};

/// Simulates the configured scenario, streaming the diagnostics CSV and
/// writing summary.json plus periodic snapshots.
SimulateRun run_simulate(const ScenarioConfig& cfg, std::ostream& log,
                         std::optional<double> d = std::nullopt);

ClassificationReport run_classify(const ScenarioConfig& cfg, std::optional<double> d,
                                  std::ostream& log);

struct CertifyRun {
  DetectionReport detection;
  std::optional<double> tmax_bound;
  int exit = exit_code::ok;
};

/// Certifies blow-up from an existing diagnostics CSV, or simulates first
/// when csv_path is empty.
CertifyRun run_certify(const ScenarioConfig& cfg, const std::string& csv_path,
                       std::ostream& log);

/// Loads a diagnostics CSV; the terminal tag comes from a summary.json next
/// to it when present, otherwise from the last sample's sup norms.
Trajectory read_trajectory_csv(const std::string& path, double blowup_threshold);

struct VerifyRow {
  std::string name;
  std::string tolerance;
  double observed = 0.0;
  bool pass = false;
};

/// Cross-module identity and property checks at desk scale.
std::vector<VerifyRow> run_verify(std::ostream& log);

}  // namespace kgelab

#endif  // KGELAB_SCENARIO_HPP
