#include "kgelab/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace kgelab {

// ---------------------------------------------------------------------------
// Concavity function

GDiagnostics g_diagnostics(const StateVector& state, const FunctionalReport& report, double t,
                           const std::optional<AuxiliaryParams>& aux, const ModelParams& params) {
  if (report.overflowed) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {inf, inf, inf};
  }
  GDiagnostics g;
  g.G = report.l2_weighted;
  g.Gprime = 2.0 * (params.alpha * integrate_product(state.u, state.ut) +
                    integrate_product(state.v, state.vt));
  g.Gsecond = 2.0 * (report.kinetic - report.I);
  if (aux) {
    const double s = t + aux->T1;
    g.G += aux->b * s * s;
    g.Gprime += 2.0 * aux->b * s;
    g.Gsecond += 2.0 * aux->b;
  }
  return g;
}

GDiagnostics g_diagnostics(const StateVector& state, double t,
                           const std::optional<AuxiliaryParams>& aux, const ModelParams& params,
                           const PotentialPair& pot) {
  return g_diagnostics(state, functional_report(state, params, pot), t, aux, params);
}

// ---------------------------------------------------------------------------
// Initial data

StateVector gamma_perturbed_data(const ScalarField& Phi, const ScalarField& Psi, double gamma) {
  if (!(gamma > 1.0)) throw std::invalid_argument("gamma_perturbed_data: gamma must exceed 1");
  require_same_grid(Phi, Psi);
  StateVector s = StateVector::zero(Phi.grid());
  s.u = gamma * Phi;
  s.v = gamma * Psi;
  return s;
}

StateVector gaussian_bumps(const Grid& grid, double amp_u, double amp_v, double width,
                           double vel_u, double vel_v) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_bumps: width must be positive");
  const double w2 = width * width;
  const ScalarField bump = ScalarField::from_function(grid, [w2](std::span<const double> x) {
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    return std::exp(-r2 / w2);
  });
  return StateVector{amp_u * bump, vel_u * bump, amp_v * bump, vel_v * bump, 0.0};
}

namespace {

double energy_of(double amp, const Grid& grid, const ModelParams& params,
                 const PotentialPair& pot, double width) {
  return energy(gaussian_bumps(grid, amp, amp, width), params, pot);
}

/// Smallest amplitude on the geometric ladder 1e-2 * 1.25^k with E < 0.
double first_negative_amplitude(const Grid& grid, const ModelParams& params,
                                const PotentialPair& pot, double width) {
  double amp = 1e-2;
  for (int k = 0; k < 400; ++k, amp *= 1.25) {
    if (energy_of(amp, grid, params, pot, width) < 0.0) return amp;
  }
  throw std::runtime_error("negative_energy_construct: energy never turned negative");
}

}  // namespace

StateVector negative_energy_construct(const Grid& grid, const ModelParams& params,
                                      const PotentialPair& pot, double width) {
  const double amp = first_negative_amplitude(grid, params, pot, width);
  return gaussian_bumps(grid, amp, amp, width);
}

StateVector zero_energy_construct(const Grid& grid, const ModelParams& params,
                                  const PotentialPair& pot, double width) {
  double hi = first_negative_amplitude(grid, params, pot, width);
  double lo = hi / 1.25;
  StateVector best = gaussian_bumps(grid, hi, hi, width);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    best = gaussian_bumps(grid, mid, mid, width);
    const auto r = functional_report(best, params, pot);
    if (std::abs(r.E) < 1e-12 * energy_scale(r, params)) return best;
    (r.E > 0.0 ? lo : hi) = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  throw std::runtime_error("zero_energy_construct: bisection did not reach |E| < 1e-12 scale");
}

StateVector thm61_construct(const Grid& grid, const ModelParams& params,
                            const PotentialPair& pot, double width) {
  const double mu = params.min_mass_sq();
  const double pq = params.p + params.q;
  for (int attempt = 0; attempt < 8; ++attempt, width *= 1.5) {
    auto report_at = [&](double amp) {
      return functional_report(gaussian_bumps(grid, amp, amp, width), params, pot);
    };
    auto threshold_gap = [&](const FunctionalReport& r) {
      return r.l2_weighted - 2.0 * params.degree() * r.E / (mu * pq);
    };

    // Amplitude where I first turns negative, then where E crosses zero.
    double amp = 1e-2;
    int k = 0;
    for (; k < 400 && report_at(amp).I >= 0.0; ++k) amp *= 1.05;
    if (k == 400) continue;
    double lo = amp;  // I < 0 here
    if (report_at(lo).E <= 0.0) continue;
    double hi = lo;
    while (report_at(hi).E > 0.0) hi *= 1.05;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (report_at(mid).E > 0.0 ? lo : hi) = mid;
    }
    const double amp_E = lo;  // largest amplitude found with E > 0

    // Threshold condition holds near the zero-energy end; find where it starts.
    double t_lo = amp;
    double t_hi = amp_E;
    if (threshold_gap(report_at(t_hi)) <= 0.0) continue;
    if (threshold_gap(report_at(t_lo)) > 0.0) {
      t_hi = t_lo;
    } else {
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (t_lo + t_hi);
        (threshold_gap(report_at(mid)) > 0.0 ? t_hi : t_lo) = mid;
      }
    }
    const double chosen = std::sqrt(t_hi * amp_E);
    const auto r = report_at(chosen);
    if (r.E > 0.0 && r.I < 0.0 && threshold_gap(r) > 0.0)
      return gaussian_bumps(grid, chosen, chosen, width);
  }
  throw std::runtime_error("thm61_construct: no amplitude window found");
}

// ---------------------------------------------------------------------------
// Auxiliary parameters

std::optional<AuxiliaryParams> choose_aux_params(const StateVector& state0, double E0,
                                                 const ModelParams& params,
                                                 const PotentialPair& pot, AuxRegime regime) {
  constexpr double eps = 1e-6;
  const double cross0 = params.alpha * integrate_product(state0.u, state0.ut) +
                        integrate_product(state0.v, state0.vt);
  auto minimal_T1 = [&](double b) { return std::max(1.0, (eps - cross0) / b); };

  if (regime == AuxRegime::negative_energy) {
    if (!(E0 < 0.0)) return std::nullopt;
    const double b = -2.0 * E0;
    return AuxiliaryParams{b, minimal_T1(b)};
  }

  (void)pot;
  const double pq = params.p + params.q;
  const double deg = params.degree();
  const double mu = params.min_mass_sq();
  const double l2w0 = weighted_l2(state0.u, state0.v, params);
  // First pass: b from the L2 part of G(0) alone.
  const double surplus = pq * mu * l2w0 - 2.0 * deg * E0;
  if (!(surplus > 0.0)) return std::nullopt;
  const double b = 0.5 * surplus / deg;
  const double T1 = minimal_T1(b);
  // Second pass: verify both inequalities with G(0) = l2w0 + b T1^2.
  const double G0 = l2w0 + b * T1 * T1;
  const double Gp0 = 2.0 * (cross0 + b * T1);
  const double margin = pq * mu * G0 - 2.0 * deg * E0 - deg * b;
  if (!(Gp0 > 0.0) || !(margin >= 1e-9)) return std::nullopt;
  return AuxiliaryParams{b, T1};
}

std::optional<double> tmax_bound(double G0, double Gprime0, const ModelParams& params) {
  if (!(G0 > 0.0) || !(Gprime0 > 0.0) || !std::isfinite(G0) || !std::isfinite(Gprime0))
    return std::nullopt;
  return 4.0 * G0 / ((params.p + params.q) * Gprime0);
}

// ---------------------------------------------------------------------------
// Classification

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "true";
    case Verdict::fails: return "false";
    case Verdict::unknown: return "unknown";
  }
  return "unknown";
}

namespace {
Verdict verdict_of(bool b) { return b ? Verdict::holds : Verdict::fails; }

nlohmann::json verdict_json(Verdict v) {
  if (v == Verdict::unknown) return "unknown";
  return v == Verdict::holds;
}
}  // namespace

bool ClassificationReport::any_blowup() const {
  return thm41 == Verdict::holds || thm51 == Verdict::holds || thm61 == Verdict::holds;
}

void to_json(nlohmann::json& j, const ClassificationReport& r) {
  j = nlohmann::json{{"E0", r.E0},
                     {"I0", r.I0},
                     {"J0", r.J0},
                     {"cross0", r.cross0},
                     {"l2w0", r.l2w0},
                     {"threshold6", r.threshold6},
                     {"energy_scale", r.energy_scale},
                     {"verdict_thm41", verdict_json(r.thm41)},
                     {"verdict_thm51", verdict_json(r.thm51)},
                     {"verdict_thm61", verdict_json(r.thm61)},
                     {"verdict_gamma1", verdict_json(r.gamma1)},
                     {"verdict_gamma2", verdict_json(r.gamma2)},
                     {"thm61_margins",
                      {r.thm61_margins[0], r.thm61_margins[1], r.thm61_margins[2],
                       r.thm61_margins[3]}},
                     {"aux_regime_min_mass_sq", r.aux_regime_mass_sq},
                     {"aux_regime_min_mass_abs", r.aux_regime_mass_abs}};
  j["tmax_bound"] = r.tmax_bound ? nlohmann::json(*r.tmax_bound) : nlohmann::json(nullptr);
  j["d_used"] = r.d_used ? nlohmann::json(*r.d_used) : nlohmann::json(nullptr);
  if (r.aux)
    j["aux"] = {{"b", r.aux->b}, {"T1", r.aux->T1}};
  else
    j["aux"] = nullptr;
}

ClassificationReport classify_initial_data(const StateVector& state0, const ModelParams& params,
                                           const PotentialPair& pot, std::optional<double> d) {
  ClassificationReport r;
  const FunctionalReport f = functional_report(state0, params, pot);
  const double pq = params.p + params.q;
  const double deg = params.degree();
  const double mu = params.min_mass_sq();

  r.E0 = f.E;
  r.I0 = f.I;
  r.J0 = f.J;
  r.l2w0 = f.l2_weighted;
  r.cross0 = params.alpha * integrate_product(state0.u, state0.ut) +
             integrate_product(state0.v, state0.vt);
  r.threshold6 = 2.0 * deg * r.E0 / (mu * pq);
  r.energy_scale = energy_scale(f, params);
  r.d_used = d;

  const bool nonzero = r.l2w0 > 0.0 || f.kinetic > 0.0;
  const bool zero_energy = std::abs(r.E0) <= 1e-12 * r.energy_scale;
  r.thm51 = verdict_of(nonzero && (r.E0 < 0.0 || (zero_energy && r.cross0 >= 0.0)));

  r.thm61_margins[0] = r.E0;
  r.thm61_margins[1] = -r.I0;
  r.thm61_margins[2] = r.cross0;
  r.thm61_margins[3] = r.l2w0 - r.threshold6;
  r.thm61 = verdict_of(r.E0 > 0.0 && r.I0 < 0.0 && r.cross0 >= 0.0 && r.l2w0 > r.threshold6);

  if (d) {
    r.thm41 = verdict_of(r.E0 < *d && r.I0 < 0.0);
    r.gamma1 = verdict_of(r.J0 < *d && r.I0 < 0.0);
    r.gamma2 = verdict_of(r.E0 < *d && r.I0 > 0.0);
  }

  const double mu_abs = std::min(std::abs(params.m1), std::abs(params.m2));
  r.aux_regime_mass_sq = pq * mu * r.l2w0 - 2.0 * deg * r.E0 > 0.0;
  r.aux_regime_mass_abs = pq * mu_abs * r.l2w0 - 2.0 * deg * r.E0 > 0.0;

  if (r.any_blowup()) {
    if (r.E0 < 0.0)
      r.aux = choose_aux_params(state0, r.E0, params, pot, AuxRegime::negative_energy);
    else
      r.aux = choose_aux_params(state0, r.E0, params, pot, AuxRegime::potential_well);
    if (r.aux) {
      const auto g = g_diagnostics(state0, f, 0.0, r.aux, params);
      r.tmax_bound = tmax_bound(g.G, g.Gprime, params);
    } else if (r.cross0 > 0.0) {
      r.tmax_bound = tmax_bound(r.l2w0, 2.0 * r.cross0, params);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Detection

void to_json(nlohmann::json& j, const DetectionReport& r) {
  j = nlohmann::json{{"excluded", r.excluded},
                     {"g_increasing", r.g_increasing},
                     {"gsecond_positive", r.gsecond_positive},
                     {"h_decreasing", r.h_decreasing},
                     {"h_concave", r.h_concave},
                     {"max_h_curvature", r.max_h_curvature},
                     {"min_concavity_surplus", r.min_concavity_surplus},
                     {"threshold_crossed", r.threshold_crossed},
                     {"samples_used", r.samples_used},
                     {"consistent_until", r.consistent_until},
                     {"consistent_with_blowup", r.consistent_with_blowup},
                     {"summary", r.summary}};
  j["estimated_time"] =
      r.estimated_time ? nlohmann::json(*r.estimated_time) : nlohmann::json(nullptr);
}

DetectionReport detect_blowup(const Trajectory& traj, const ModelParams& params, double h_tol,
                              double consistency_tol) {
  if (traj.samples.size() < 10)
    throw std::invalid_argument("detect_blowup: trajectory needs at least 10 samples");
  DetectionReport out;
  if (traj.terminal == Terminal::unstable) {
    out.excluded = true;
    out.summary = "run ended unstable; not evidence of blow-up";
    return out;
  }

  const auto& first = traj.samples.front().report;
  const double E0 = first.E;
  const double scale0 = energy_scale(first, params);
  std::vector<const TrajectorySample*> finite;
  for (const auto& s : traj.samples) {
    if (s.report.overflowed || !std::isfinite(s.g.G) || !(s.g.G > 0.0)) break;
    if (energy_drift(s.report.E, E0, scale0) > consistency_tol) break;
    finite.push_back(&s);
  }
  out.samples_used = finite.size();
  if (!finite.empty()) out.consistent_until = finite.back()->t;
  out.threshold_crossed =
      traj.terminal == Terminal::blowup_detected || traj.terminal == Terminal::overflow;
  if (finite.size() < 3) {
    out.summary = "too few finite samples";
    return out;
  }

  const double k = (params.p + params.q) / 4.0;
  const double kc = (params.p + params.q + 4.0) / 4.0;
  out.g_increasing = true;
  out.gsecond_positive = true;
  out.h_decreasing = true;
  out.min_concavity_surplus = std::numeric_limits<double>::infinity();
  std::vector<double> t, H;
  for (std::size_t i = 0; i < finite.size(); ++i) {
    const auto& s = *finite[i];
    t.push_back(s.t);
    H.push_back(std::pow(s.g.G, -k));
    if (!(s.g.Gsecond > 0.0)) out.gsecond_positive = false;
    const double gg = s.g.Gsecond * s.g.G;
    const double surplus = (gg - kc * s.g.Gprime * s.g.Gprime) / std::abs(gg);
    out.min_concavity_surplus = std::min(out.min_concavity_surplus, surplus);
    if (i > 0) {
      if (!(s.g.G > finite[i - 1]->g.G)) out.g_increasing = false;
      if (!(H[i] < H[i - 1])) out.h_decreasing = false;
    }
  }

  // Second differences scaled to the uniform-step form H[i-1] - 2H[i] + H[i+1].
  out.max_h_curvature = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < H.size(); ++i) {
    const double h1 = t[i] - t[i - 1];
    const double h2 = t[i + 1] - t[i];
    const double second = 2.0 * ((H[i + 1] - H[i]) / h2 - (H[i] - H[i - 1]) / h1) / (h1 + h2);
    const double half = 0.5 * (h1 + h2);
    out.max_h_curvature = std::max(out.max_h_curvature, second * half * half / std::abs(H[i]));
  }
  out.h_concave = out.max_h_curvature <= h_tol;

  // Secant through the ends of the last max(5, 10%) samples.
  const std::size_t window = std::max<std::size_t>(5, H.size() / 10);
  if (H.size() >= 2) {
    const std::size_t b = H.size() - 1;
    const std::size_t a = b >= window - 1 ? b - (window - 1) : 0;
    const double slope = (H[b] - H[a]) / (t[b] - t[a]);
    if (slope < 0.0) out.estimated_time = t[b] - H[b] / slope;
  }

  out.consistent_with_blowup = out.threshold_crossed && out.g_increasing &&
                               out.gsecond_positive && out.h_decreasing && out.h_concave;
  std::ostringstream os;
  if (out.consistent_with_blowup) {
    os << "consistent with finite-time blow-up";
    if (out.estimated_time) os << " near t=" << *out.estimated_time;
  } else if (!out.threshold_crossed) {
    os << "no blow-up signature: run ended " << to_string(traj.terminal);
  } else {
    os << "threshold crossed but concavity evidence incomplete";
  }
  out.summary = os.str();
  return out;
}

}  // namespace kgelab
