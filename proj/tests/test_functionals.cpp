#include <cmath>

#include "doctest.h"
#include "kgelab/functionals.hpp"
#include "kgelab/groundstate.hpp"

using namespace kgelab;

TEST_CASE("zero state gives an all-zero report") {
  const Grid g = Grid::cube(2, 16, 4.0);
  const auto m = ModelParams::make(1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2);
  const auto pot = PotentialPair::harmonic(g, 1.0, 1.0);
  const auto r = functional_report(StateVector::zero(g), m, pot);
  CHECK(r.E == 0.0);
  CHECK(r.J == 0.0);
  CHECK(r.I == 0.0);
  CHECK(r.Q == 0.0);
  CHECK(r.N == 0.0);
  CHECK(r.kinetic == 0.0);
  const ScalarField z(g);
  CHECK(action_J(z, z, m, pot) == 0.0);
  CHECK(nehari_I(z, z, m, pot) == 0.0);
}

TEST_CASE("energy of a unit constant on the unit box") {
  const Grid g = Grid::cube(1, 16, 1.0);
  const auto m = ModelParams::make(1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 1);  // alpha = 1
  StateVector s = StateVector::zero(g);
  s.u = ScalarField::constant(g, 1.0);
  CHECK(energy(s, m, PotentialPair::zero(g)) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("J vanishes for Q = 2, N = 1, a2' = 1") {
  // a1 = a2 = 3, p = q = 2 gives alpha = 1 and a2' = 1. Unit constants on the
  // unit box have Q = 1 + 1 and N = 1.
  const Grid g = Grid::cube(1, 16, 1.0);
  const auto m = ModelParams::make(1.0, 1.0, 3.0, 3.0, 2.0, 2.0, 1);
  REQUIRE(m.alpha == doctest::Approx(1.0));
  REQUIRE(m.a2prime == doctest::Approx(1.0));
  const auto pot = PotentialPair::zero(g);
  const auto one = ScalarField::constant(g, 1.0);
  CHECK(quadratic_form(one, one, m, pot) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(coupling_integral(one, one, m) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(action_J(one, one, m, pot)) < 1e-15);
}

TEST_CASE("report identities on a random smooth state") {
  const Grid g = Grid::cube(2, 32, 8.0);
  const auto m = ModelParams::make(1.1, 0.9, 1.3, 0.8, 2.0, 2.5, 2);
  const auto pot = PotentialPair::gaussian_well(g, 0.7, 0.4, 1.5);
  const StateVector s{random_band_limited(g, 1), random_band_limited(g, 2),
                      random_band_limited(g, 3), random_band_limited(g, 4), 0.0};
  const auto r = functional_report(s, m, pot);

  // Independent quadrature of Q and N.
  double Q = 0.0, N = 0.0;
  const ScalarField ux = partial_derivative(s.u, 0), uy = partial_derivative(s.u, 1);
  const ScalarField vx = partial_derivative(s.v, 0), vy = partial_derivative(s.v, 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Q += m.alpha * (ux[i] * ux[i] + uy[i] * uy[i] + (m.m1 * m.m1 + pot.K1()[i]) * s.u[i] * s.u[i]) +
         vx[i] * vx[i] + vy[i] * vy[i] + (m.m2 * m.m2 + pot.K2()[i]) * s.v[i] * s.v[i];
    N += std::pow(std::abs(s.u[i]), m.p + 1) * std::pow(std::abs(s.v[i]), m.q + 1);
  }
  Q *= g.cell_volume();
  N *= g.cell_volume();
  // Spectral derivatives drop the Nyquist mode, which band-limited fields do not carry.
  CHECK(r.Q == doctest::Approx(Q).epsilon(1e-10));
  CHECK(r.N == doctest::Approx(N).epsilon(1e-10));
  CHECK(r.J == doctest::Approx(r.Q / 2 - m.a2prime * r.N).epsilon(1e-10));
  CHECK(r.I == doctest::Approx(r.Q - m.degree() * m.a2prime * r.N).epsilon(1e-10));
  CHECK(r.E == doctest::Approx(r.kinetic / 2 + r.J).epsilon(1e-10));
  CHECK(energy(s, m, pot) == r.E);
  CHECK(r.l2_weighted == doctest::Approx(weighted_l2(s.u, s.v, m)));
  CHECK(r.Q == doctest::Approx(m.alpha * r.h1k_u + r.h1k_v).epsilon(1e-12));
}

TEST_CASE("scaling law and derivative identity") {
  const Grid g = Grid::cube(2, 32, 8.0);
  const auto m = ModelParams::make(1.0, 1.0, 1.0, 2.0, 1.5, 2.5, 2);
  const auto pot = PotentialPair::zero(g);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto phi = random_band_limited(g, 2 * seed);
    const auto psi = random_band_limited(g, 2 * seed + 1);
    const double Q = quadratic_form(phi, psi, m, pot);
    const double N = coupling_integral(phi, psi, m);
    for (double lam : {0.5, 1.0, 2.0}) {
      CHECK(quadratic_form(lam * phi, lam * psi, m, pot) == doctest::Approx(lam * lam * Q).epsilon(1e-13));
      CHECK(coupling_integral(lam * phi, lam * psi, m) ==
            doctest::Approx(std::pow(lam, m.degree()) * N).epsilon(1e-13));
    }
    const double l0 = 1.3, h = 1e-4;
    const double fd =
        (action_J((l0 + h) * phi, (l0 + h) * psi, m, pot) - action_J((l0 - h) * phi, (l0 - h) * psi, m, pot)) /
        (2 * h);
    const double I = nehari_I(l0 * phi, l0 * psi, m, pot);
    CHECK(std::abs(l0 * fd - I) <= 1e-6 * std::abs(I));
  }
}

TEST_CASE("non-finite state reports infinite sentinels") {
  const Grid g = Grid::cube(1, 16, 2.0);
  const auto m = ModelParams::make(1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 1);
  StateVector s = StateVector::zero(g);
  s.u[2] = INFINITY;
  const auto r = functional_report(s, m, PotentialPair::zero(g));
  CHECK(r.overflowed);
  CHECK(std::isinf(r.E));
}

TEST_CASE("I on the ground state and beyond it") {
  const Grid g = Grid::cube(2, 64, 20.0);
  const auto m = ModelParams::make(1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2);
  const auto pot = PotentialPair::zero(g);
  const auto gs = minimize_ground_state(default_initial_guess(g), m, pot);
  REQUIRE(gs.converged);
  CHECK(std::abs(nehari_I(gs.Phi, gs.Psi, m, pot)) < 1e-9 * quadratic_form(gs.Phi, gs.Psi, m, pot));
  CHECK(nehari_I(2.0 * gs.Phi, 2.0 * gs.Psi, m, pot) < 0.0);
  CHECK(nehari_I(0.5 * gs.Phi, 0.5 * gs.Psi, m, pot) > 0.0);
}
