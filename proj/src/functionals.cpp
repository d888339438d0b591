#include "kgelab/functionals.hpp"

#include <cmath>
#include <limits>

namespace kgelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool unusable(const ScalarField& f) { return f.overflowed() || !f.all_finite(); }

double assemble_energy(double kinetic, double Q, double N, const ModelParams& params) {
  return 0.5 * kinetic + 0.5 * Q - params.a2prime * N;
}

double assemble_J(double Q, double N, const ModelParams& params) {
  return 0.5 * Q - params.a2prime * N;
}

double assemble_I(double Q, double N, const ModelParams& params) {
  return Q - params.degree() * params.a2prime * N;
}

}  // namespace

void to_json(nlohmann::json& j, const FunctionalReport& r) {
  j = nlohmann::json{{"E", r.E},
                     {"J", r.J},
                     {"I", r.I},
                     {"Q", r.Q},
                     {"N", r.N},
                     {"kinetic", r.kinetic},
                     {"l2_weighted", r.l2_weighted},
                     {"h1k_u", r.h1k_u},
                     {"h1k_v", r.h1k_v},
                     {"overflowed", r.overflowed}};
}

double energy_norm_sq(const ScalarField& f, double mass, const ScalarField& K) {
  if (unusable(f)) return kInf;
  require_same_grid(f, K);
  const double grad = gradient_norm_sq(f);
  const double l2 = integrate_product(f, f);
  double pot = 0.0;
  {
    ScalarField kf = hadamard(K, f);
    pot = integrate_product(kf, f);
  }
  return grad + mass * mass * l2 + pot;
}

double quadratic_form(const ScalarField& phi, const ScalarField& psi, const ModelParams& params,
                      const PotentialPair& pot) {
  return params.alpha * energy_norm_sq(phi, params.m1, pot.K1()) +
         energy_norm_sq(psi, params.m2, pot.K2());
}

double coupling_integral(const ScalarField& phi, const ScalarField& psi,
                         const ModelParams& params) {
  if (unusable(phi) || unusable(psi)) return kInf;
  require_same_grid(phi, psi);
  ScalarField integrand(phi.grid());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double a = std::abs(phi[i]);
    const double b = std::abs(psi[i]);
    integrand[i] = (a == 0.0 || b == 0.0)
                       ? 0.0
                       : std::pow(a, params.p + 1.0) * std::pow(b, params.q + 1.0);
  }
  const double N = integrate(integrand);
  return std::isfinite(N) ? N : kInf;
}

double kinetic_term(const StateVector& state, const ModelParams& params) {
  if (unusable(state.ut) || unusable(state.vt)) return kInf;
  return params.alpha * integrate_product(state.ut, state.ut) +
         integrate_product(state.vt, state.vt);
}

double weighted_l2(const ScalarField& u, const ScalarField& v, const ModelParams& params) {
  if (unusable(u) || unusable(v)) return kInf;
  return params.alpha * integrate_product(u, u) + integrate_product(v, v);
}

double energy(const StateVector& state, const ModelParams& params, const PotentialPair& pot) {
  return functional_report(state, params, pot).E;
}

double action_J(const ScalarField& phi, const ScalarField& psi, const ModelParams& params,
                const PotentialPair& pot) {
  if (unusable(phi) || unusable(psi)) return kInf;
  return assemble_J(quadratic_form(phi, psi, params, pot), coupling_integral(phi, psi, params),
                    params);
}

double nehari_I(const ScalarField& phi, const ScalarField& psi, const ModelParams& params,
                const PotentialPair& pot) {
  if (unusable(phi) || unusable(psi)) return kInf;
  return assemble_I(quadratic_form(phi, psi, params, pot), coupling_integral(phi, psi, params),
                    params);
}

FunctionalReport functional_report(const StateVector& state, const ModelParams& params,
                                   const PotentialPair& pot) {
  FunctionalReport r;
  state.check_grids();
  if (state.overflowed() || !state.all_finite()) {
    r.E = r.J = r.I = r.Q = r.N = r.kinetic = r.l2_weighted = r.h1k_u = r.h1k_v = kInf;
    r.overflowed = true;
    return r;
  }
  r.h1k_u = energy_norm_sq(state.u, params.m1, pot.K1());
  r.h1k_v = energy_norm_sq(state.v, params.m2, pot.K2());
  r.Q = params.alpha * r.h1k_u + r.h1k_v;
  r.N = coupling_integral(state.u, state.v, params);
  r.kinetic = kinetic_term(state, params);
  r.l2_weighted = weighted_l2(state.u, state.v, params);
  r.E = assemble_energy(r.kinetic, r.Q, r.N, params);
  r.J = assemble_J(r.Q, r.N, params);
  r.I = assemble_I(r.Q, r.N, params);
  r.overflowed = !std::isfinite(r.E) || !std::isfinite(r.N);
  return r;
}

}  // namespace kgelab
