#ifndef KGELAB_AUXILIARY_HPP
#define KGELAB_AUXILIARY_HPP

#include <optional>

#include "kgelab/functionals.hpp"

namespace kgelab {

/// Quadratic term b (t + T1)^2 added to the weighted L2 norm in the
/// concavity argument.
struct AuxiliaryParams {
  double b = 0.0;
  double T1 = 0.0;
};

/// G, G' and G'' of the concavity function at one instant.
struct GDiagnostics {
  double G = 0.0;
  double Gprime = 0.0;
  double Gsecond = 0.0;
};

/// G   = alpha ||u||^2 + ||v||^2            (+ b (t+T1)^2)
/// G'  = 2 int (alpha u u_t + v v_t)        (+ 2 b (t+T1))
/// G'' = 2 (int (alpha u_t^2 + v_t^2) - I)  (+ 2 b)
/// All three are evaluated from the state; nothing is differenced in time.
GDiagnostics g_diagnostics(const StateVector& state, double t,
                           const std::optional<AuxiliaryParams>& aux, const ModelParams& params,
                           const PotentialPair& pot);

/// Same, reusing an already computed report for the state.
GDiagnostics g_diagnostics(const StateVector& state, const FunctionalReport& report, double t,
                           const std::optional<AuxiliaryParams>& aux, const ModelParams& params);

}  // namespace kgelab

#endif  // KGELAB_AUXILIARY_HPP
