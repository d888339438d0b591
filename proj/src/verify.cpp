// Desk-scale invariant suite behind `kgelab verify`.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>

#include "kgelab/scenario.hpp"

namespace kgelab {

namespace {

double rel(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

double sup_diff(const ScalarField& a, const ScalarField& b) { return (a - b).sup_norm(); }

std::string tol_text(const char* op, double tol) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s %.0e", op, tol);
  return buf;
}

class Table {
public:
  void below(const std::string& name, double observed, double tol) {
    rows.push_back({name, tol_text("<", tol), observed, observed < tol});
  }
  void at_most(const std::string& name, double observed, double tol) {
    rows.push_back({name, tol_text("<=", tol), observed, observed <= tol});
  }
  void flag(const std::string& name, bool ok, double observed, const std::string& tol) {
    rows.push_back({name, tol, observed, ok});
  }
  std::vector<VerifyRow> rows;
};

// --- grid_fields ------------------------------------------------------------

void grid_checks(Table& t) {
  const Grid g = Grid::cube(2, 32, 10.0);
  const ScalarField f = random_band_limited(g, 11);
  const ScalarField h = random_band_limited(g, 12);
  const double a = 1.7, b = -0.3;

  const ScalarField lhs = laplacian(a * f + b * h);
  const ScalarField rhs = a * laplacian(f) + b * laplacian(h);
  t.below("laplacian linearity (sup rel)", sup_diff(lhs, rhs) / rhs.sup_norm(), 1e-12);

  const ScalarField lf = laplacian(f);
  double abs_int = 0.0;
  for (double x : lf.values()) abs_int += std::abs(x);
  abs_int *= g.cell_volume();
  t.below("integral of laplacian vanishes (rel)", std::abs(integrate(lf)) / abs_int, 1e-10);

  t.below("integration by parts (rel)", rel(gradient_norm_sq(f), -integrate_product(f, lf)),
          1e-10);
}

// --- model ------------------------------------------------------------------

void model_checks(Table& t) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mass(0.3, 2.0), coupling(0.2, 3.0), expo(1.05, 4.0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto m = ModelParams::make(mass(rng), mass(rng), coupling(rng), coupling(rng), expo(rng),
                                     expo(rng), 2);
    worst = std::max(worst, rel(m.a2prime * (m.p + 1.0), m.alpha * m.a1));
    worst = std::max(worst, rel(m.a2prime * (m.q + 1.0), m.a2));
  }
  t.below("coefficient identities (50 draws)", worst, 1e-14);

  const Grid g = Grid::cube(2, 32, 10.0);
  const auto params = ModelParams::make(1.0, 1.3, 1.0, 0.7, 2.0, 3.0, 2);
  const auto pot = PotentialPair::harmonic(g, 0.01, 0.02);
  StateVector s{random_band_limited(g, 21), random_band_limited(g, 22),
                random_band_limited(g, 23), random_band_limited(g, 24), 0.0};
  StateVector neg{-1.0 * s.u, -1.0 * s.ut, -1.0 * s.v, -1.0 * s.vt, 0.0};
  const auto [au, av] = acceleration(s, params, pot);
  const auto [nu, nv] = acceleration(neg, params, pot);
  t.at_most("acceleration oddness (sup)", std::max(sup_diff(au, -1.0 * nu), sup_diff(av, -1.0 * nv)),
            0.0);

  ModelOptions lin;
  lin.linear_test_mode = true;
  const auto lparams = ModelParams::make(1.0, 1.3, 1.0, 0.7, 2.0, 3.0, 2, lin);
  StateVector s2{random_band_limited(g, 31), random_band_limited(g, 32),
                 random_band_limited(g, 33), random_band_limited(g, 34), 0.0};
  StateVector mix{axpy(s.u, 2.5, s2.u), axpy(s.ut, 2.5, s2.ut), axpy(s.v, 2.5, s2.v),
                  axpy(s.vt, 2.5, s2.vt), 0.0};
  const auto [a1u, a1v] = acceleration(s, lparams, pot);
  const auto [a2u, a2v] = acceleration(s2, lparams, pot);
  const auto [amu, amv] = acceleration(mix, lparams, pot);
  const double lin_err = std::max(sup_diff(amu, axpy(a1u, 2.5, a2u)) / amu.sup_norm(),
                                  sup_diff(amv, axpy(a1v, 2.5, a2v)) / amv.sup_norm());
  t.below("linear test mode is linear (sup rel)", lin_err, 1e-12);
}

// --- functionals ------------------------------------------------------------

void functional_checks(Table& t) {
  const Grid g = Grid::cube(2, 32, 10.0);
  const auto params = ModelParams::make(1.0, 1.2, 1.0, 1.5, 2.0, 2.5, 2);
  const auto pot = PotentialPair::gaussian_well(g, 0.5, 0.3, 2.0);

  double scaling = 0.0, deriv = 0.0, proj = 0.0, jq = 0.0, idem = 0.0;
  for (int k = 0; k < 10; ++k) {
    const ScalarField phi = random_band_limited(g, 100 + 2 * k);
    const ScalarField psi = random_band_limited(g, 101 + 2 * k);
    const double Q = quadratic_form(phi, psi, params, pot);
    const double N = coupling_integral(phi, psi, params);
    for (double lam : {0.5, 1.0, 2.0}) {
      const double predicted =
          lam * lam * Q - params.degree() * params.a2prime * std::pow(lam, params.degree()) * N;
      const double observed = nehari_I(lam * phi, lam * psi, params, pot);
      scaling = std::max(scaling, std::abs(observed - predicted) /
                                      (lam * lam * Q + params.degree() * params.a2prime *
                                                           std::pow(lam, params.degree()) * N));
    }

    const double lam0 = 0.8, step = 1e-4;
    const double fd = (action_J((lam0 + step) * phi, (lam0 + step) * psi, params, pot) -
                       action_J((lam0 - step) * phi, (lam0 - step) * psi, params, pot)) /
                      (2.0 * step);
    deriv = std::max(deriv, rel(lam0 * fd, nehari_I(lam0 * phi, lam0 * psi, params, pot)));

    const auto [pp, ps] = nehari_project(phi, psi, params, pot);
    const double Qp = quadratic_form(pp, ps, params, pot);
    proj = std::max(proj, std::abs(nehari_I(pp, ps, params, pot)) / Qp);
    jq = std::max(jq, rel(action_J(pp, ps, params, pot),
                          (params.p + params.q) / (2.0 * params.degree()) * Qp));
    idem = std::max(idem, std::abs(nehari_scale(pp, ps, params, pot) - 1.0));
  }
  t.below("scaling law of I (rel)", scaling, 1e-12);
  t.below("lambda dJ/dlambda = I (rel)", deriv, 1e-6);
  t.below("|I| / Q after projection", proj, 1e-10);
  t.below("J = (p+q)/(2(p+q+2)) Q on the manifold (rel)", jq, 1e-10);
  t.below("projection idempotent |lambda - 1|", idem, 1e-10);
}

// --- groundstate --------------------------------------------------------------

void groundstate_checks(Table& t, std::ostream& log) {
  const Grid g = Grid::cube(1, 512, 40.0);
  ModelOptions opts;
  opts.outside_theorem_range = true;
  const auto params = ModelParams::make(1.0, 1.0, 2.0, 2.0, 1.0, 1.0, 1, opts);
  const auto pot = PotentialPair::zero(g);
  const auto res = minimize_ground_state(default_initial_guess(g), params, pot);
  log << "  sech reduction: " << res.iterations << " iterations, d = " << res.d << '\n';

  const ScalarField sech =
      ScalarField::from_function(g, [](std::span<const double> x) { return 1.0 / std::cosh(x[0]); });
  t.flag("sech reduction converged", res.converged, res.residual, "residual < 1e-06");
  t.below("sech oracle sup error", std::max(sup_diff(res.Phi, sech), sup_diff(res.Psi, sech)),
          1e-3);

  bool monotone = true;
  for (std::size_t k = 1; k < res.objective_history.size(); ++k)
    monotone = monotone && res.objective_history[k] <= res.objective_history[k - 1];
  t.flag("minimizer objective non-increasing", monotone,
         static_cast<double>(res.objective_history.size()), "all accepted steps");

  const double J0 = action_J(res.Phi, res.Psi, params, pot);
  double worst = -INFINITY;
  for (double lam : {0.25, 0.5, 2.0, 4.0})
    worst = std::max(worst, action_J(lam * res.Phi, lam * res.Psi, params, pot) - J0);
  t.at_most("ray maximality max J(lambda) - J(1)", worst, 0.0);

  const double lam1 = nehari_scale(res.Phi, res.Psi, params, pot);
  const double Iin = nehari_I(0.5 * lam1 * res.Phi, 0.5 * lam1 * res.Psi, params, pot);
  const double Iout = nehari_I(2.0 * lam1 * res.Phi, 2.0 * lam1 * res.Psi, params, pot);
  t.flag("sign pattern I(0.5) > 0 > I(2)", Iin > 0.0 && Iout < 0.0, Iin, "strict signs");
}

// --- evolve and blowup --------------------------------------------------------

void evolve_checks(Table& t) {
  const Grid g = Grid::cube(1, 128, 20.0);
  const auto params = ModelParams::make(1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 1);
  const auto pot = PotentialPair::zero(g);
  const StateVector s0 = gaussian_bumps(g, 0.3, 0.25, 2.0, 0.1, -0.05);

  StateVector s = s0;
  const double dt = 1e-2;
  for (int k = 0; k < 100; ++k) s = step_leapfrog(s, dt, params, pot);
  for (int k = 0; k < 100; ++k) s = step_leapfrog(s, -dt, params, pot);
  const double rev = std::max({sup_diff(s.u, s0.u), sup_diff(s.v, s0.v), sup_diff(s.ut, s0.ut),
                               sup_diff(s.vt, s0.vt)}) /
                     std::max(s0.u.sup_norm(), s0.v.sup_norm());
  t.below("leapfrog time reversibility (sup rel)", rev, 1e-12);

  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 2.0;
  cfg.sample_every = 10;
  const auto traj = simulate(s0, cfg, params, pot);
  t.flag("small-data run completed", traj.terminal == Terminal::completed, traj.t_final,
         "terminal completed");
  t.below("small-data energy drift", traj.max_drift, 1e-6);

  const StateVector neg{-1.0 * s0.u, -1.0 * s0.ut, -1.0 * s0.v, -1.0 * s0.vt, 0.0};
  StateVector a = s0, b = neg;
  for (int k = 0; k < 200; ++k) {
    a = step_leapfrog(a, 1e-3, params, pot);
    b = step_leapfrog(b, 1e-3, params, pot);
  }
  t.at_most("trajectory oddness (sup)",
            std::max(sup_diff(a.u, -1.0 * b.u), sup_diff(a.v, -1.0 * b.v)), 0.0);

  // G'' from the state against the centred second difference of sampled G.
  const double h = cfg.dt.value() * cfg.sample_every;
  double worst = 0.0, scale = 0.0;
  for (std::size_t k = 1; k + 1 < traj.samples.size(); ++k) {
    const double fd =
        (traj.samples[k + 1].g.G - 2.0 * traj.samples[k].g.G + traj.samples[k - 1].g.G) / (h * h);
    worst = std::max(worst, std::abs(fd - traj.samples[k].g.Gsecond));
    scale = std::max(scale, std::abs(traj.samples[k].g.Gsecond));
  }
  t.below("G'' vs second difference of G (rel to max)", worst / scale, 1e-3);
}

void blowup_checks(Table& t) {
  const Grid g = Grid::cube(2, 32, 20.0);
  const auto params = ModelParams::make(1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2);
  const auto pot = PotentialPair::zero(g);
  const StateVector s0 = negative_energy_construct(g, params, pot, 2.0);
  const double E0 = energy(s0, params, pot);
  const auto aux = choose_aux_params(s0, E0, params, pot, AuxRegime::negative_energy);
  t.flag("negative-energy aux exists", aux.has_value(), E0, "E(0) < 0 and b > 0");
  if (aux) {
    const double lhs = -2.0 * params.degree() * E0 + 2.0 * aux->b;
    const double rhs = (params.p + params.q + 4.0) * aux->b;
    t.at_most("aux chain (p+q+4)b - (-2(p+q+2)E + 2b), rel", (rhs - lhs) / rhs, 1e-12);
    const auto gd = g_diagnostics(s0, 0.0, aux, params, pot);
    const auto tb = tmax_bound(gd.G, gd.Gprime, params);
    t.flag("concavity bound finite", tb.has_value(), tb.value_or(INFINITY), "G(0), G'(0) > 0");
  }

  // Hand value: G = 4, G' = 4 and p+q = 3 give 16/12.
  const auto hand = ModelParams::make(1.0, 1.0, 1.0, 1.0, 1.5, 1.5, 2);
  const auto tb = tmax_bound(4.0, 4.0, hand);
  t.below("tmax bound hand value (abs err)", std::abs(tb.value_or(INFINITY) - 4.0 / 3.0),
          1e-15);
}

void config_checks(Table& t) {
  const std::string text =
      "[model]\nm1 = 1\nm2 = 1.5\na1 = 1\na2 = 2\np = 2\nq = 3\n"
      "[grid]\ndim = 2\npoints = 32\nlengths = 20, 10\n"
      "[integrator]\ndt = 0.001\nt_end = 1\n";
  const auto a = ScenarioConfig::from_config(Config::parse_string(text));
  const std::string once = a.to_config().to_string();
  const std::string twice = ScenarioConfig::from_config(Config::parse_string(once)).to_config().to_string();
  t.flag("config round trip", once == twice, 0.0, "identical text");
}

}  // namespace

std::vector<VerifyRow> run_verify(std::ostream& log) {
  Table t;
  log << "grid operators\n";
  grid_checks(t);
  log << "model\n";
  model_checks(t);
  log << "functionals\n";
  functional_checks(t);
  log << "ground state\n";
  groundstate_checks(t, log);
  log << "evolution\n";
  evolve_checks(t);
  log << "blow-up\n";
  blowup_checks(t);
  log << "config\n";
  config_checks(t);

  std::size_t width = 0;
  for (const auto& r : t.rows) width = std::max(width, r.name.size());
  log << '\n';
  for (const auto& r : t.rows) {
    char obs[32];
    std::snprintf(obs, sizeof obs, "%.3e", r.observed);
    log << (r.pass ? "PASS  " : "FAIL  ") << r.name << std::string(width + 2 - r.name.size(), ' ')
        << std::string(20 - std::min<std::size_t>(20, r.tolerance.size()), ' ') << r.tolerance
        << "  observed " << obs << '\n';
  }
  return t.rows;
}

}  // namespace kgelab
