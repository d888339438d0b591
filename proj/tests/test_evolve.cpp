#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "kgelab/blowup.hpp"

using namespace kgelab;

namespace {

ModelParams quad2(int n) { return ModelParams::make(1.0, 1.0, 1.0, 1.0, 2.0, 2.0, n); }

double sup_diff(const ScalarField& a, const ScalarField& b) { return (a - b).sup_norm(); }

}  // namespace

TEST_CASE("integrator config validation") {
  IntegratorConfig c;
  CHECK_NOTHROW(c.validate());
  c.dt = -1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.dt.reset();
  c.sample_every = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.sample_every = 1;
  c.cfl_safety = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("stable time step") {
  const Grid g = Grid::cube(1, 64, 2.0 * std::numbers::pi);
  const auto m = quad2(1);
  const double omega = std::sqrt(32.0 * 32.0 + 1.0);
  CHECK(max_linear_frequency(g, m, PotentialPair::zero(g)) == doctest::Approx(omega));
  CHECK(stable_time_step(g, m, PotentialPair::zero(g), 0.5) == doctest::Approx(1.0 / omega));
  IntegratorConfig c;
  c.dt = 0.1;
  CHECK_THROWS_AS(simulate(gaussian_bumps(g, 0.1, 0.1, 1.0), c, m, PotentialPair::zero(g)),
                  std::invalid_argument);
}

TEST_CASE("zero state is a fixed point") {
  const Grid g = Grid::cube(2, 16, 4.0);
  const auto s = step_leapfrog(StateVector::zero(g), 0.01, quad2(2), PotentialPair::zero(g));
  CHECK(s.u.sup_norm() == 0.0);
  CHECK(s.ut.sup_norm() == 0.0);
  CHECK(s.v.sup_norm() == 0.0);
  CHECK(s.vt.sup_norm() == 0.0);
}

TEST_CASE("leapfrog is reversible") {
  const Grid g = Grid::cube(2, 32, 10.0);
  const auto m = quad2(2);
  const auto pot = PotentialPair::harmonic(g, 0.02, 0.01);
  const StateVector s0 = gaussian_bumps(g, 0.4, 0.3, 1.5, 0.2, -0.1);
  const auto fwd = step_leapfrog(s0, 0.01, m, pot);
  const auto back = step_leapfrog(fwd, -0.01, m, pot);
  CHECK(sup_diff(back.u, s0.u) < 1e-12);
  CHECK(sup_diff(back.ut, s0.ut) < 1e-12);
  CHECK(sup_diff(back.v, s0.v) < 1e-12);
  CHECK(sup_diff(back.vt, s0.vt) < 1e-12);
}

TEST_CASE("plane wave converges at second order") {
  // u = cos(w t) sin(k x), w^2 = k^2 + m^2, linear test mode.
  const Grid g = Grid::cube(1, 32, 2.0 * std::numbers::pi);
  ModelOptions lin;
  lin.linear_test_mode = true;
  const auto m = ModelParams::make(1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 1, lin);
  const auto pot = PotentialPair::zero(g);
  const double k = 2.0, w = std::sqrt(k * k + 1.0);
  const auto mode = ScalarField::from_function(g, [k](std::span<const double> x) { return std::sin(k * x[0]); });
  double err[3];
  int i = 0;
  for (double dt : {0.02, 0.01, 0.005}) {
    StateVector s{mode, ScalarField(g), mode, ScalarField(g), 0.0};
    const int n = static_cast<int>(std::lround(1.0 / dt));
    for (int j = 0; j < n; ++j) s = step_leapfrog(s, dt, m, pot);
    err[i++] = sup_diff(s.u, std::cos(w) * mode);
  }
  CHECK(std::log2(err[0] / err[1]) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::log2(err[1] / err[2]) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("small data conserve energy and sample on schedule") {
  const Grid g = Grid::cube(1, 128, 20.0);
  const auto m = quad2(1);
  IntegratorConfig c;
  c.dt = 1e-3;
  c.t_end = 1.0;
  c.sample_every = 100;
  int seen = 0;
  SimulationHooks hooks;
  hooks.on_sample = [&seen](const TrajectorySample&) { ++seen; };
  const auto tr = simulate(gaussian_bumps(g, 0.2, 0.2, 2.0, 0.1, 0.0), c, m, PotentialPair::zero(g),
                           std::nullopt, hooks);
  CHECK(tr.terminal == Terminal::completed);
  CHECK(tr.samples.size() == 11);
  CHECK(seen == 11);
  CHECK(tr.steps == 1000);
  CHECK(tr.samples.back().t == doctest::Approx(1.0));
  CHECK(tr.max_drift < 1e-6);
}

TEST_CASE("dt is adjusted to land on t_end") {
  const Grid g = Grid::cube(1, 64, 20.0);
  IntegratorConfig c;
  c.dt = 0.03;
  c.t_end = 1.0;
  c.drift_tol = 1.0;
  const auto tr = simulate(gaussian_bumps(g, 0.1, 0.1, 2.0), c, quad2(1), PotentialPair::zero(g));
  CHECK(tr.steps == 34);
  CHECK(tr.dt == doctest::Approx(1.0 / 34));
  CHECK(tr.t_final == doctest::Approx(1.0));
}

TEST_CASE("energy drift reference") {
  CHECK(energy_drift(1.1, 1.0, 5.0) == doctest::Approx(0.1));
  // E0 tiny against the scale: drift is measured against the scale.
  CHECK(energy_drift(1e-3, 0.0, 10.0) == doctest::Approx(1e-4));
  CHECK(energy_drift(0.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("too large a step is reported unstable") {
  const Grid g = Grid::cube(1, 64, 20.0);
  const auto m = quad2(1);
  IntegratorConfig c;
  c.t_end = 2.0;
  c.cfl_safety = 0.99;
  c.drift_tol = 1e-9;
  const auto tr = simulate(gaussian_bumps(g, 0.3, 0.3, 1.0), c, m, PotentialPair::zero(g));
  CHECK(tr.terminal == Terminal::unstable);
  CHECK(tr.max_drift > 1e-9);
}

TEST_CASE("negated data give negated trajectories") {
  const Grid g = Grid::cube(2, 32, 10.0);
  const auto m = ModelParams::make(1.0, 1.2, 1.0, 0.8, 2.5, 1.5, 2);
  const auto pot = PotentialPair::gaussian_well(g, 0.5, 0.5, 2.0);
  StateVector a = gaussian_bumps(g, 0.4, 0.3, 1.5, 0.2, -0.1);
  StateVector b{-1.0 * a.u, -1.0 * a.ut, -1.0 * a.v, -1.0 * a.vt, 0.0};
  for (int k = 0; k < 50; ++k) {
    a = step_leapfrog(a, 5e-3, m, pot);
    b = step_leapfrog(b, 5e-3, m, pot);
  }
  CHECK((a.u + b.u).sup_norm() == 0.0);
  CHECK((a.vt + b.vt).sup_norm() == 0.0);
}

TEST_CASE("overflow ends the run with a sentinel sample") {
  const Grid g = Grid::cube(1, 64, 20.0);
  const auto m = quad2(1);
  IntegratorConfig c;
  c.dt = 1e-3;
  c.t_end = 5.0;
  c.blowup_threshold = 1e300;
  const auto tr = simulate(gaussian_bumps(g, 3.0, 3.0, 2.0), c, m, PotentialPair::zero(g));
  CHECK(tr.terminal == Terminal::overflow);
  CHECK(std::isinf(tr.samples.back().report.E));
}

TEST_CASE("threshold crossing stops as blow-up") {
  const Grid g = Grid::cube(1, 64, 20.0);
  const auto m = quad2(1);
  IntegratorConfig c;
  c.dt = 1e-3;
  c.t_end = 5.0;
  c.sample_every = 10;
  const auto tr = simulate(gaussian_bumps(g, 3.0, 3.0, 2.0), c, m, PotentialPair::zero(g));
  CHECK(tr.terminal == Terminal::blowup_detected);
  REQUIRE(tr.crossing_time.has_value());
  CHECK(*tr.crossing_time == tr.t_final);
  CHECK(std::max(tr.samples.back().sup_u, tr.samples.back().sup_v) > c.blowup_threshold);
}

TEST_CASE("G second derivative matches differences of sampled G") {
  const Grid g = Grid::cube(1, 128, 20.0);
  const auto m = quad2(1);
  IntegratorConfig c;
  c.dt = 1e-3;
  c.t_end = 1.0;
  c.sample_every = 10;
  const AuxiliaryParams aux{0.3, 1.0};
  const auto tr = simulate(gaussian_bumps(g, 0.5, 0.4, 2.0, 0.1, 0.2), c, m, PotentialPair::zero(g), aux);
  const double h = 0.01;
  double e1 = 0.0, e2 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t k = 1; k + 1 < tr.samples.size(); ++k) {
    const auto& s = tr.samples[k];
    const double fd2 = (tr.samples[k + 1].g.G - 2 * s.g.G + tr.samples[k - 1].g.G) / (h * h);
    const double fd1 = (tr.samples[k + 1].g.G - tr.samples[k - 1].g.G) / (2 * h);
    e1 = std::max(e1, std::abs(fd1 - s.g.Gprime));
    e2 = std::max(e2, std::abs(fd2 - s.g.Gsecond));
    s1 = std::max(s1, std::abs(s.g.Gprime));
    s2 = std::max(s2, std::abs(s.g.Gsecond));
  }
  // Truncation error of the differences is O(h^2) = 1e-4.
  CHECK(e1 < 1e-3 * s1);
  CHECK(e2 < 1e-3 * s2);
}

TEST_CASE("csv rows") {
  CHECK(diagnostics_csv_header() == "t,E,J,I,Q,N,kinetic,G,Gprime,Gsecond,l2w,sup_u,sup_v");
  TrajectorySample s;
  s.t = 0.1;
  s.report.E = -2.5;
  const std::string row = diagnostics_csv_row(s);
  CHECK(row.rfind("0.10000000000000001,-2.5,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 12);
}
