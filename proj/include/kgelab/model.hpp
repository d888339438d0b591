#ifndef KGELAB_MODEL_HPP
#define KGELAB_MODEL_HPP

#include <string>
#include <utility>

#include "kgelab/grid_fields.hpp"

namespace kgelab {

/// Outcome of the exponent admissibility check.
struct ExponentVerdict {
  bool valid = false;            // local theory admits (p, q) in dimension n
  bool ground_state_ok = false;  // ground-state existence window
  std::string reason;
};

/// Checks 1 < p, q (n <= 2) or the two-sided subcritical conditions (n >= 3).
///
/// For n >= 3 the pair must satisfy
///   q < p+1 < (n+2)/(n-2)  or  p+1 < q < (n+2)/(n-2), and
///   p < q+1 < (n+2)/(n-2)  or  q+1 < p < (n+2)/(n-2).
/// ground_state_ok covers n = 2 (any p, q > 1) and n = 3 (1 < p, q < 2).
ExponentVerdict validate_exponents(double p, double q, int n);

struct ModelOptions {
  /// Forces both couplings to zero; only for integrator-order checks.
  bool linear_test_mode = false;
  /// Admits n = 1 ground states and p = 1 or q = 1 (cubic reference problem).
  bool outside_theorem_range = false;
};

/// Coupled Klein-Gordon parameters plus the derived coefficients of the
/// weighted form: alpha = a2 (p+1) / (a1 (q+1)), a2' = a2 / (q+1).
struct ModelParams {
  double m1 = 1.0;
  double m2 = 1.0;
  double a1 = 1.0;
  double a2 = 1.0;
  double p = 2.0;
  double q = 2.0;
  int n = 1;
  double alpha = 1.0;
  double a2prime = 1.0 / 3.0;
  ModelOptions options{};

  static ModelParams make(double m1, double m2, double a1, double a2, double p, double q, int n,
                          ModelOptions options = {});

  double min_mass_sq() const;
  /// Coefficient of the u-nonlinearity after dividing by alpha (equals a1).
  double u_coupling() const;
  /// Coefficient of the v-nonlinearity (equals a2).
  double v_coupling() const;
  /// p + q + 2, the homogeneity degree of the coupling integral.
  double degree() const { return p + q + 2.0; }
};

enum class PotentialKind { zero, harmonic, gaussian_well, file };

std::string to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& name);

/// Nonnegative potentials sampled once on the grid.
class PotentialPair {
public:
  PotentialPair(ScalarField K1, ScalarField K2, PotentialKind kind);

  static PotentialPair zero(const Grid& grid);
  /// K_i = strength_i * |x|^2.
  static PotentialPair harmonic(const Grid& grid, double strength1, double strength2);
  /// K_i = depth_i * (1 - exp(-|x|^2 / width^2)); zero at the centre, depth far out.
  static PotentialPair gaussian_well(const Grid& grid, double depth1, double depth2,
                                     double width);
  /// Loads two snapshots; rejects any negative sample.
  static PotentialPair from_files(const std::string& path1, const std::string& path2);

  const ScalarField& K1() const { return k1_; }
  const ScalarField& K2() const { return k2_; }
  PotentialKind kind() const { return kind_; }
  double sup() const;
  bool is_zero() const { return kind_ == PotentialKind::zero; }

private:
  ScalarField k1_;
  ScalarField k2_;
  PotentialKind kind_;
};

/// (u, u_t, v, v_t) at time t.
struct StateVector {
  ScalarField u;
  ScalarField ut;
  ScalarField v;
  ScalarField vt;
  double t = 0.0;

  static StateVector zero(const Grid& grid);
  const Grid& grid() const { return u.grid(); }
  bool overflowed() const;
  bool all_finite() const;
  /// Throws DomainError unless all four fields share one grid.
  void check_grids() const;
};

/// sign(x) |x|^e, with 0 at x = 0.
double signed_power(double x, double e);

/// Pointwise |v|^{q+1} |u|^{p-1} u.
ScalarField u_nonlinearity(const ScalarField& u, const ScalarField& v, const ModelParams& params);
/// Pointwise |u|^{p+1} |v|^{q-1} v.
ScalarField v_nonlinearity(const ScalarField& u, const ScalarField& v, const ModelParams& params);

/// (u_tt, v_tt) of the evolution system. Sets the overflow flag on both
/// outputs if any value becomes non-finite.
std::pair<ScalarField, ScalarField> acceleration(const StateVector& state,
                                                 const ModelParams& params,
                                                 const PotentialPair& pot);

}  // namespace kgelab

#endif  // KGELAB_MODEL_HPP
