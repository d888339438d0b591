#ifndef KGELAB_FUNCTIONALS_HPP
#define KGELAB_FUNCTIONALS_HPP

#include "json.hpp"
#include "kgelab/model.hpp"

namespace kgelab {

/// Every scalar the blow-up and global-existence statements are phrased in.
///
/// Q is the full quadratic form
///   alpha (|grad u|^2 + m1^2 u^2 + K1 u^2) + |grad v|^2 + m2^2 v^2 + K2 v^2
/// and N the coupling integral of |u|^{p+1} |v|^{q+1}. E, J and I are
/// assembled from Q, N and the kinetic term only.
struct FunctionalReport {
  double E = 0.0;
  double J = 0.0;
  double I = 0.0;
  double Q = 0.0;
  double N = 0.0;
  double kinetic = 0.0;      // integral of alpha u_t^2 + v_t^2
  double l2_weighted = 0.0;  // alpha ||u||^2 + ||v||^2
  double h1k_u = 0.0;        // squared energy-space norm of u (with m1, K1)
  double h1k_v = 0.0;        // squared energy-space norm of v (with m2, K2)
  bool overflowed = false;
};

void to_json(nlohmann::json& j, const FunctionalReport& r);

/// ||grad f||^2 + mass^2 ||f||^2 + int K f^2.
double energy_norm_sq(const ScalarField& f, double mass, const ScalarField& K);

/// alpha * ||phi||_{H1,K1}^2 + ||psi||_{H1,K2}^2.
double quadratic_form(const ScalarField& phi, const ScalarField& psi, const ModelParams& params,
                      const PotentialPair& pot);

/// int |phi|^{p+1} |psi|^{q+1} dx.
double coupling_integral(const ScalarField& phi, const ScalarField& psi,
                         const ModelParams& params);

double kinetic_term(const StateVector& state, const ModelParams& params);
double weighted_l2(const ScalarField& u, const ScalarField& v, const ModelParams& params);

double energy(const StateVector& state, const ModelParams& params, const PotentialPair& pot);
double action_J(const ScalarField& phi, const ScalarField& psi, const ModelParams& params,
                const PotentialPair& pot);
double nehari_I(const ScalarField& phi, const ScalarField& psi, const ModelParams& params,
                const PotentialPair& pot);

FunctionalReport functional_report(const StateVector& state, const ModelParams& params,
                                   const PotentialPair& pot);

}  // namespace kgelab

#endif  // KGELAB_FUNCTIONALS_HPP
