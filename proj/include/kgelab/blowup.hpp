#ifndef KGELAB_BLOWUP_HPP
#define KGELAB_BLOWUP_HPP

#include <optional>
#include <string>

#include "json.hpp"
#include "kgelab/auxiliary.hpp"
#include "kgelab/evolve.hpp"

namespace kgelab {

// ---------------------------------------------------------------------------
// Initial data

/// (gamma Phi, 0, gamma Psi, 0) at t = 0; gamma must exceed 1.
StateVector gamma_perturbed_data(const ScalarField& Phi, const ScalarField& Psi, double gamma);

/// Centred Gaussian bumps A exp(-|x|^2 / w^2) with velocities c * bump.
StateVector gaussian_bumps(const Grid& grid, double amp_u, double amp_v, double width,
                           double vel_u = 0.0, double vel_v = 0.0);

/// Bump data scaled upward (factor 1.25 per try) until E(0) < 0.
StateVector negative_energy_construct(const Grid& grid, const ModelParams& params,
                                      const PotentialPair& pot, double width);

/// Bump data at zero velocity with |E(0)| < 1e-12 times the energy scale,
/// found by bisecting the amplitude below the first negative-energy scale.
StateVector zero_energy_construct(const Grid& grid, const ModelParams& params,
                                  const PotentialPair& pot, double width);

/// Zero-velocity bump data with E(0) > 0, I(0) < 0 and the weighted L2 norm
/// above the positive-energy threshold. Widens the bump (x1.5, up to 8
/// times) if the amplitude window turns out empty.
StateVector thm61_construct(const Grid& grid, const ModelParams& params,
                            const PotentialPair& pot, double width);

// ---------------------------------------------------------------------------
// Auxiliary parameters and the concavity bound

enum class AuxRegime {
  potential_well,   // G'(0) > 0 and (p+q) mu G(0) - 2(p+q+2) E(0) > (p+q+2) b
  negative_energy,  // E(0) < 0, 0 < b <= -2 E(0)
};

/// Picks (b, T1) for the regime or returns nothing when the regime's
/// inequalities cannot be met. mu = min(m1^2, m2^2) throughout.
std::optional<AuxiliaryParams> choose_aux_params(const StateVector& state0, double E0,
                                                 const ModelParams& params,
                                                 const PotentialPair& pot, AuxRegime regime);

/// 4 G(0) / ((p+q) G'(0)); nothing unless G(0) > 0 and G'(0) > 0.
std::optional<double> tmax_bound(double G0, double Gprime0, const ModelParams& params);

// ---------------------------------------------------------------------------
// Classification of initial data

enum class Verdict { holds, fails, unknown };
std::string to_string(Verdict v);

struct ClassificationReport {
  double E0 = 0.0;
  double I0 = 0.0;
  double J0 = 0.0;
  double cross0 = 0.0;  // int alpha u0 u1 + v0 v1
  double l2w0 = 0.0;    // alpha ||u0||^2 + ||v0||^2
  double threshold6 = 0.0;
  double energy_scale = 0.0;
  Verdict thm41 = Verdict::unknown;   // E0 < d, I0 < 0
  Verdict thm51 = Verdict::fails;     // E0 < 0, or E0 = 0 with cross0 >= 0
  Verdict thm61 = Verdict::fails;     // E0 > 0, I0 < 0, cross0 >= 0, l2w0 > threshold6
  Verdict gamma1 = Verdict::unknown;  // J0 < d, I0 < 0
  Verdict gamma2 = Verdict::unknown;  // E0 < d, I0 > 0
  /// Margins of the four positive-energy conditions (positive = satisfied).
  double thm61_margins[4] = {0.0, 0.0, 0.0, 0.0};
  /// Applicability of the potential-well aux regime under mu = min(m^2) and
  /// under mu = min(|m|); they can differ when a mass is not 1.
  bool aux_regime_mass_sq = false;
  bool aux_regime_mass_abs = false;
  std::optional<AuxiliaryParams> aux;
  std::optional<double> tmax_bound;
  std::optional<double> d_used;

  bool any_blowup() const;
};

void to_json(nlohmann::json& j, const ClassificationReport& r);

/// Evaluates every hypothesis list by quadrature. All tests are strict.
ClassificationReport classify_initial_data(const StateVector& state0, const ModelParams& params,
                                           const PotentialPair& pot,
                                           std::optional<double> d = std::nullopt);

// ---------------------------------------------------------------------------
// Blow-up detection

struct DetectionReport {
  bool excluded = false;            // unstable run, not evidence
  bool g_increasing = false;        // G strictly increasing over finite samples
  bool gsecond_positive = false;    // G'' > 0 at every finite sample
  bool h_decreasing = false;        // H = G^{-(p+q)/4} strictly decreasing
  bool h_concave = false;           // scaled second differences <= tol |H|
  double max_h_curvature = 0.0;     // largest scaled second difference / |H|
  double min_concavity_surplus = 0.0;  // min (G''G - (p+q+4)/4 G'^2) / |G''G|
  bool threshold_crossed = false;   // run ended by blowup_detected or overflow
  std::size_t samples_used = 0;     // energy-consistent prefix the checks ran on
  double consistent_until = 0.0;    // time of the last sample in that prefix
  std::optional<double> estimated_time;  // secant root of H
  bool consistent_with_blowup = false;
  std::string summary;
};

void to_json(nlohmann::json& j, const DetectionReport& r);

/// Evidence of finite-time blow-up from a trajectory with >= 10 samples.
///
/// The monotonicity and concavity checks run on the prefix of samples whose
/// relative energy drift stays within consistency_tol; past that point the
/// discrete solution no longer resolves the continuum one. h_tol is the
/// relative tolerance on the second differences of H.
DetectionReport detect_blowup(const Trajectory& traj, const ModelParams& params,
                              double h_tol = 1e-8, double consistency_tol = 1e-4);

}  // namespace kgelab

#endif  // KGELAB_BLOWUP_HPP
