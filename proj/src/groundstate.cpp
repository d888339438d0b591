#include "kgelab/groundstate.hpp"

#include <algorithm>
#include <cmath>

namespace kgelab {

namespace {

struct RayData {
  double Q = 0.0;
  double N = 0.0;
};

RayData ray_data(const ScalarField& phi, const ScalarField& psi, const ModelParams& params,
                 const PotentialPair& pot) {
  RayData r{quadratic_form(phi, psi, params, pot), coupling_integral(phi, psi, params)};
  if (!std::isfinite(r.Q) || !std::isfinite(r.N))
    throw DomainError("nehari projection: non-finite Q or N");
  if (!(r.N > 0.0) || !(r.Q > 0.0))
    throw NoProjectionError("nehari projection: coupling integral vanishes (disjoint supports)");
  return r;
}

double scale_from(const RayData& r, const ModelParams& params) {
  return std::pow(r.Q / (params.degree() * params.a2prime * r.N), 1.0 / (params.p + params.q));
}

double objective_from(const RayData& r, const ModelParams& params) {
  const double lambda = scale_from(r, params);
  return (params.p + params.q) / (2.0 * params.degree()) * lambda * lambda * r.Q;
}

/// L2 gradient of J: (alpha(-Lap + m1^2 + K1) phi - a2'(p+1) f1, (-Lap + m2^2 + K2) psi - a2'(q+1) f2).
std::pair<ScalarField, ScalarField> action_gradient(const ScalarField& phi,
                                                    const ScalarField& psi,
                                                    const ModelParams& params,
                                                    const PotentialPair& pot) {
  ScalarField g1 = laplacian(phi);
  ScalarField g2 = laplacian(psi);
  const ScalarField f1 = u_nonlinearity(phi, psi, params);
  const ScalarField f2 = v_nonlinearity(phi, psi, params);
  const double m1sq = params.m1 * params.m1;
  const double m2sq = params.m2 * params.m2;
  const double c1 = params.a2prime * (params.p + 1.0);
  const double c2 = params.a2prime * (params.q + 1.0);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    g1[i] = params.alpha * (-g1[i] + (m1sq + pot.K1()[i]) * phi[i]) - c1 * f1[i];
    g2[i] = -g2[i] + (m2sq + pot.K2()[i]) * psi[i] - c2 * f2[i];
  }
  return {std::move(g1), std::move(g2)};
}

double residual_from_gradient(const ScalarField& g1, const ScalarField& g2,
                              const ScalarField& phi, const ScalarField& psi) {
  double defect = std::max(g1.sup_norm(), g2.sup_norm());
  double scale = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i)
    scale = std::max(scale, std::abs(phi[i]) + std::abs(psi[i]) + 1.0);
  return defect / scale;
}

}  // namespace

double nehari_scale(const ScalarField& phi, const ScalarField& psi, const ModelParams& params,
                    const PotentialPair& pot) {
  return scale_from(ray_data(phi, psi, params, pot), params);
}

double reduced_objective(const ScalarField& phi, const ScalarField& psi,
                         const ModelParams& params, const PotentialPair& pot) {
  return objective_from(ray_data(phi, psi, params, pot), params);
}

std::pair<ScalarField, ScalarField> nehari_project(const ScalarField& phi,
                                                   const ScalarField& psi,
                                                   const ModelParams& params,
                                                   const PotentialPair& pot) {
  const double lambda = nehari_scale(phi, psi, params, pot);
  return {lambda * phi, lambda * psi};
}

double el_residual(const ScalarField& phi, const ScalarField& psi, const ModelParams& params,
                   const PotentialPair& pot) {
  if (phi.overflowed() || psi.overflowed() || !phi.all_finite() || !psi.all_finite())
    return std::numeric_limits<double>::infinity();
  const auto [g1, g2] = action_gradient(phi, psi, params, pot);
  return residual_from_gradient(g1, g2, phi, psi);
}

void to_json(nlohmann::json& j, const GroundStateResult& r) {
  j = nlohmann::json{{"d", r.d},
                     {"residual", r.residual},
                     {"iterations", r.iterations},
                     {"converged", r.converged}};
}

std::pair<ScalarField, ScalarField> default_initial_guess(const Grid& grid) {
  const double L = *std::min_element(grid.lengths().begin(), grid.lengths().end());
  const double w2 = (L / 10.0) * (L / 10.0);
  auto bump = ScalarField::from_function(grid, [w2](std::span<const double> x) {
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    return std::exp(-r2 / w2);
  });
  return {bump, bump};
}

GroundStateResult minimize_ground_state(const std::pair<ScalarField, ScalarField>& init,
                                        const ModelParams& params, const PotentialPair& pot,
                                        const GroundStateOptions& opts) {
  if (!params.options.outside_theorem_range) {
    const auto verdict = validate_exponents(params.p, params.q, params.n);
    if (!verdict.ground_state_ok)
      throw std::invalid_argument("ground state: " + verdict.reason);
  }
  if (init.first.grid().dim() != params.n)
    throw std::invalid_argument("ground state: grid dimension differs from model dimension");
  require_same_grid(init.first, init.second);
  require_same_grid(init.first, pot.K1());

  const double m1sq = params.m1 * params.m1;
  const double m2sq = params.m2 * params.m2;

  GroundStateResult res{init.first, init.second, 0.0, 0.0, 0, false, {}};
  {
    RayData r = ray_data(init.first, init.second, params, pot);
    const double lambda = scale_from(r, params);
    res.Phi *= lambda;
    res.Psi *= lambda;
    res.d = objective_from(r, params);
  }
  res.objective_history.push_back(res.d);

  for (res.iterations = 0;; ++res.iterations) {
    auto [g1, g2] = action_gradient(res.Phi, res.Psi, params, pot);
    res.residual = residual_from_gradient(g1, g2, res.Phi, res.Psi);
    if (res.residual < opts.tol_residual) {
      res.converged = true;
      break;
    }
    if (res.iterations >= opts.max_iters) break;

    ScalarField dir1 = inverse_helmholtz(g1, m1sq);
    dir1 *= 1.0 / params.alpha;
    const ScalarField dir2 = inverse_helmholtz(g2, m2sq);

    bool accepted = false;
    for (double step = 1.0; step >= opts.min_step; step *= 0.5) {
      ScalarField trial1 = axpy(res.Phi, -step, dir1);
      ScalarField trial2 = axpy(res.Psi, -step, dir2);
      RayData r{quadratic_form(trial1, trial2, params, pot),
                coupling_integral(trial1, trial2, params)};
      if (!(r.N > 0.0) || !(r.Q > 0.0) || !std::isfinite(r.Q) || !std::isfinite(r.N)) continue;
      const double value = objective_from(r, params);
      if (value <= res.d) {
        const double lambda = scale_from(r, params);
        trial1 *= lambda;
        trial2 *= lambda;
        res.Phi = std::move(trial1);
        res.Psi = std::move(trial2);
        res.d = value;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no descent left at this resolution
    res.objective_history.push_back(res.d);
  }

  // Report d as J of the returned pair.
  res.d = action_J(res.Phi, res.Psi, params, pot);
  if (!(res.d > 0.0)) res.converged = false;
  return res;
}

}  // namespace kgelab
