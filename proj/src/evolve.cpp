#include "kgelab/evolve.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kgelab {

void IntegratorConfig::validate() const {
  if (dt && !(*dt > 0.0 && std::isfinite(*dt)))
    throw std::invalid_argument("integrator: dt must be positive");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw std::invalid_argument("integrator: t_end must be positive");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0))
    throw std::invalid_argument("integrator: cfl_safety must lie in (0, 1]");
  if (!(blowup_threshold > 0.0)) throw std::invalid_argument("integrator: blowup_threshold");
  if (sample_every < 1) throw std::invalid_argument("integrator: sample_every must be >= 1");
  if (!(drift_tol > 0.0)) throw std::invalid_argument("integrator: drift_tol must be positive");
}

double max_linear_frequency(const Grid& grid, const ModelParams& params,
                            const PotentialPair& pot) {
  double w2 = 0.0;
  for (int a = 0; a < grid.dim(); ++a) {
    const double k = std::numbers::pi / grid.spacing(a);
    w2 += k * k;
  }
  w2 += std::max(params.m1 * params.m1, params.m2 * params.m2);
  w2 += pot.sup();
  return std::sqrt(w2);
}

double stable_time_step(const Grid& grid, const ModelParams& params, const PotentialPair& pot,
                        double cfl_safety) {
  return cfl_safety * 2.0 / max_linear_frequency(grid, params, pot);
}

std::string to_string(Terminal t) {
  switch (t) {
    case Terminal::completed: return "completed";
    case Terminal::blowup_detected: return "blowup_detected";
    case Terminal::overflow: return "overflow";
    case Terminal::unstable: return "unstable";
  }
  return "completed";
}

namespace {

StateVector overflowed_copy(StateVector s) {
  s.u.mark_overflowed();
  s.ut.mark_overflowed();
  s.v.mark_overflowed();
  s.vt.mark_overflowed();
  return s;
}

/// Velocity Verlet with the acceleration at the start of the step supplied
/// and the one at the end returned through `acc`.
StateVector verlet_step(const StateVector& s, std::pair<ScalarField, ScalarField>& acc, double dt,
                        const ModelParams& params, const PotentialPair& pot) {
  if (acc.first.overflowed() || acc.second.overflowed()) return overflowed_copy(s);
  const double half = 0.5 * dt;
  StateVector next{axpy(s.u, dt, s.ut), s.ut, axpy(s.v, dt, s.vt), s.vt, s.t + dt};
  const std::size_t n = s.u.size();
  for (std::size_t i = 0; i < n; ++i) {
    next.ut[i] += half * acc.first[i];
    next.vt[i] += half * acc.second[i];
    next.u[i] += dt * half * acc.first[i];
    next.v[i] += dt * half * acc.second[i];
  }
  if (!next.u.all_finite() || !next.v.all_finite()) return overflowed_copy(std::move(next));
  acc = acceleration(next, params, pot);
  if (acc.first.overflowed() || acc.second.overflowed()) return overflowed_copy(std::move(next));
  for (std::size_t i = 0; i < n; ++i) {
    next.ut[i] += half * acc.first[i];
    next.vt[i] += half * acc.second[i];
  }
  if (!next.ut.all_finite() || !next.vt.all_finite()) return overflowed_copy(std::move(next));
  return next;
}

TrajectorySample make_sample(const StateVector& s, const ModelParams& params,
                             const PotentialPair& pot,
                             const std::optional<AuxiliaryParams>& aux) {
  TrajectorySample out;
  out.t = s.t;
  out.report = functional_report(s, params, pot);
  out.g = g_diagnostics(s, out.report, s.t, aux, params);
  out.sup_u = s.u.sup_norm();
  out.sup_v = s.v.sup_norm();
  return out;
}

TrajectorySample overflow_sample(double t) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  TrajectorySample out;
  out.t = t;
  out.report.E = out.report.J = out.report.I = out.report.Q = out.report.N = inf;
  out.report.kinetic = out.report.l2_weighted = out.report.h1k_u = out.report.h1k_v = inf;
  out.report.overflowed = true;
  out.g = {inf, inf, inf};
  out.sup_u = out.sup_v = inf;
  return out;
}

}  // namespace

StateVector step_leapfrog(const StateVector& state, double dt, const ModelParams& params,
                          const PotentialPair& pot) {
  state.check_grids();
  if (state.overflowed() || !state.all_finite()) return overflowed_copy(state);
  auto acc = acceleration(state, params, pot);
  return verlet_step(state, acc, dt, params, pot);
}

double energy_scale(const FunctionalReport& r, const ModelParams& params) {
  return 0.5 * r.kinetic + 0.5 * r.Q + params.a2prime * r.N;
}

double energy_drift(double E, double E0, double energy_scale0) {
  const double ref = std::abs(E0) > 1e-8 * energy_scale0 ? std::abs(E0) : energy_scale0;
  if (!(ref > 0.0)) return std::abs(E - E0) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(E - E0) / ref;
}

Trajectory simulate(const StateVector& state0, const IntegratorConfig& config,
                    const ModelParams& params, const PotentialPair& pot,
                    const std::optional<AuxiliaryParams>& aux, const SimulationHooks& hooks) {
  config.validate();
  state0.check_grids();
  require_same_grid(state0.u, pot.K1());
  if (state0.overflowed() || !state0.all_finite())
    throw DomainError("simulate: initial state is not finite");

  const double bound = stable_time_step(state0.grid(), params, pot, config.cfl_safety);
  double dt = config.dt.value_or(bound);
  if (dt > bound * (1.0 + 1e-12))
    throw std::invalid_argument("simulate: dt exceeds the leapfrog stability bound");
  const long n_steps = std::max<long>(1, static_cast<long>(std::ceil(config.t_end / dt - 1e-9)));
  dt = config.t_end / static_cast<double>(n_steps);

  Trajectory traj;
  traj.dt = dt;
  traj.aux = aux;

  auto record = [&](TrajectorySample s) {
    if (hooks.on_sample) hooks.on_sample(s);
    traj.samples.push_back(std::move(s));
  };

  StateVector state = state0;
  const double t0 = state0.t;
  record(make_sample(state, params, pot, aux));
  const double E0 = traj.samples.front().report.E;
  const double scale0 = energy_scale(traj.samples.front().report, params);

  int growing = 0;
  auto update_exemption = [&](const TrajectorySample& s) {
    if (traj.drift_exempt_from) return;
    const auto& prev = traj.samples[traj.samples.size() - 2].g;
    const bool on_course = s.report.I < 0.0 && s.g.Gsecond > 0.0 && s.g.Gsecond > prev.Gsecond;
    growing = on_course ? growing + 1 : 0;
    if (growing >= 3) traj.drift_exempt_from = s.t;
  };

  auto acc = acceleration(state, params, pot);
  for (long step = 1; step <= n_steps; ++step) {
    state = verlet_step(state, acc, dt, params, pot);
    state.t = t0 + step * dt;
    traj.steps = step;
    traj.t_final = state.t;

    if (state.overflowed()) {
      traj.terminal = Terminal::overflow;
      record(overflow_sample(state.t));
      return traj;
    }
    const double sup = std::max(state.u.sup_norm(), state.v.sup_norm());
    if (sup > config.blowup_threshold) {
      traj.terminal = Terminal::blowup_detected;
      traj.crossing_time = state.t;
      record(make_sample(state, params, pot, aux));
      return traj;
    }
    if (hooks.on_checkpoint && hooks.checkpoint_every > 0 && step % hooks.checkpoint_every == 0)
      hooks.on_checkpoint(state, step);

    if (step % config.sample_every == 0 || step == n_steps) {
      record(make_sample(state, params, pot, aux));
      const auto& s = traj.samples.back();
      update_exemption(s);
      if (!traj.drift_exempt_from) {
        const double drift = energy_drift(s.report.E, E0, scale0);
        traj.max_drift = std::max(traj.max_drift, drift);
        if (drift > config.drift_tol) {
          traj.terminal = Terminal::unstable;
          return traj;
        }
      }
    }
  }
  traj.terminal = Terminal::completed;
  return traj;
}

std::string diagnostics_csv_header() {
  return "t,E,J,I,Q,N,kinetic,G,Gprime,Gsecond,l2w,sup_u,sup_v";
}

std::string diagnostics_csv_row(const TrajectorySample& s) {
  const double cols[] = {s.t,         s.report.E,       s.report.J, s.report.I,
                         s.report.Q,  s.report.N,       s.report.kinetic, s.g.G,
                         s.g.Gprime,  s.g.Gsecond,      s.report.l2_weighted,
                         s.sup_u,     s.sup_v};
  std::string row;
  char buf[32];
  bool first = true;
  for (double c : cols) {
    if (!first) row += ',';
    std::snprintf(buf, sizeof buf, "%.17g", c);
    row += buf;
    first = false;
  }
  return row;
}

}  // namespace kgelab
