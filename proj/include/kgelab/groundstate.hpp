#ifndef KGELAB_GROUNDSTATE_HPP
#define KGELAB_GROUNDSTATE_HPP

#include <stdexcept>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kgelab/functionals.hpp"

namespace kgelab {

/// The pair has no coupling overlap (N = 0), so no ray meets the Nehari manifold.
class NoProjectionError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Scale lambda1 > 0 with I(lambda1 phi, lambda1 psi) = 0:
///   lambda1 = (Q / ((p+q+2) a2' N))^{1/(p+q)}.
double nehari_scale(const ScalarField& phi, const ScalarField& psi, const ModelParams& params,
                    const PotentialPair& pot);

/// J at the Nehari projection of the ray through (phi, psi),
/// (p+q) / (2(p+q+2)) * lambda1^2 * Q. Invariant under rescaling of the pair.
double reduced_objective(const ScalarField& phi, const ScalarField& psi,
                         const ModelParams& params, const PotentialPair& pot);

/// (lambda1 phi, lambda1 psi).
std::pair<ScalarField, ScalarField> nehari_project(const ScalarField& phi,
                                                   const ScalarField& psi,
                                                   const ModelParams& params,
                                                   const PotentialPair& pot);

/// Sup-norm defect of the stationary (Euler-Lagrange) system, divided by
/// sup(|phi| + |psi| + 1).
double el_residual(const ScalarField& phi, const ScalarField& psi, const ModelParams& params,
                   const PotentialPair& pot);

struct GroundStateOptions {
  double tol_residual = 1e-6;
  int max_iters = 5000;
  /// Smallest step tried by the backtracking line search.
  double min_step = 1e-12;
};

struct GroundStateResult {
  ScalarField Phi;
  ScalarField Psi;
  double d = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Reduced objective after every accepted step (first entry: projected start).
  std::vector<double> objective_history;
};

void to_json(nlohmann::json& j, const GroundStateResult& r);

/// Centred Gaussian exp(-|x|^2 / w^2) on both components, w = min(L)/10.
std::pair<ScalarField, ScalarField> default_initial_guess(const Grid& grid);

/// Minimises J over the Nehari manifold by preconditioned gradient descent on
/// the reduced objective, projecting back onto the manifold after every step.
///
/// The preconditioner is the inverse of the constant-coefficient part of the
/// quadratic form, alpha(-Lap + m1^2) and (-Lap + m2^2). Steps start at 1 and
/// halve until the objective does not increase. Throws std::invalid_argument
/// when the parameters lie outside the ground-state window (unless the model
/// was built with outside_theorem_range) and NoProjectionError for a
/// degenerate iterate.
GroundStateResult minimize_ground_state(const std::pair<ScalarField, ScalarField>& init,
                                        const ModelParams& params, const PotentialPair& pot,
                                        const GroundStateOptions& opts = {});

}  // namespace kgelab

#endif  // KGELAB_GROUNDSTATE_HPP
