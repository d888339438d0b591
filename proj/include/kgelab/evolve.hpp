#ifndef KGELAB_EVOLVE_HPP
#define KGELAB_EVOLVE_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kgelab/auxiliary.hpp"

namespace kgelab {

struct IntegratorConfig {
  /// Time step; empty means the stability bound cfl_safety * 2 / omega_max.
  std::optional<double> dt;
  double t_end = 1.0;
  double cfl_safety = 0.5;
  double blowup_threshold = 1e8;
  int sample_every = 1;
  /// Relative energy drift that marks a run unstable.
  double drift_tol = 1e-5;

  void validate() const;
};

/// sqrt(sum_j (pi/h_j)^2 + max(m1^2, m2^2) + max sup K_i): the largest linear
/// frequency the grid resolves.
double max_linear_frequency(const Grid& grid, const ModelParams& params,
                            const PotentialPair& pot);

/// cfl_safety * 2 / omega_max.
double stable_time_step(const Grid& grid, const ModelParams& params, const PotentialPair& pot,
                        double cfl_safety);

enum class Terminal { completed, blowup_detected, overflow, unstable };
std::string to_string(Terminal t);

struct TrajectorySample {
  double t = 0.0;
  FunctionalReport report;
  GDiagnostics g;
  double sup_u = 0.0;
  double sup_v = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  Terminal terminal = Terminal::completed;
  double dt = 0.0;
  long steps = 0;
  double t_final = 0.0;
  /// Time at which the sup norm first crossed the threshold, if it did.
  std::optional<double> crossing_time;
  /// Largest relative energy drift over the samples checked by the drift gate.
  double max_drift = 0.0;
  /// Time from which the drift gate was lifted (blow-up approach), if ever.
  std::optional<double> drift_exempt_from;
  std::optional<AuxiliaryParams> aux;
};

/// Optional callbacks invoked during simulate.
struct SimulationHooks {
  std::function<void(const TrajectorySample&)> on_sample;
  std::function<void(const StateVector&, long step)> on_checkpoint;
  long checkpoint_every = 0;  // steps; 0 disables
};

/// One Stoermer-Verlet (velocity Verlet) step. A non-finite result comes back
/// with every field flagged as overflowed.
StateVector step_leapfrog(const StateVector& state, double dt, const ModelParams& params,
                          const PotentialPair& pot);

/// Relative energy drift |E - E0| / ref. ref is |E0| unless E0 is small
/// against the individual energy terms, then their sum.
double energy_drift(double E, double E0, double energy_scale0);

/// Sum of the magnitudes of the energy terms: kinetic/2 + Q/2 + a2' N.
double energy_scale(const FunctionalReport& r, const ModelParams& params);

/// Advances state0 until t_end or a terminal condition.
///
/// Samples every sample_every steps (plus the initial and final state). A
/// sup norm above blowup_threshold stops the run as blowup_detected with the
/// crossing state as last sample; non-finite values stop it as overflow with
/// an infinite sentinel sample. A relative energy drift above drift_tol stops
/// it as unstable, unless the run is already on a blow-up course (I < 0 and
/// G'' positive and growing over three consecutive samples).
Trajectory simulate(const StateVector& state0, const IntegratorConfig& config,
                    const ModelParams& params, const PotentialPair& pot,
                    const std::optional<AuxiliaryParams>& aux = std::nullopt,
                    const SimulationHooks& hooks = {});

/// CSV column header of the diagnostics file.
std::string diagnostics_csv_header();
/// One CSV line (no newline) for a sample.
std::string diagnostics_csv_row(const TrajectorySample& s);

}  // namespace kgelab

#endif  // KGELAB_EVOLVE_HPP
