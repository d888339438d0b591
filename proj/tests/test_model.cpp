#include <cmath>
#include <random>

#include "doctest.h"
#include "kgelab/blowup.hpp"
#include "kgelab/groundstate.hpp"

using namespace kgelab;

TEST_CASE("exponent validation") {
  auto v = validate_exponents(2.0, 3.0, 2);
  CHECK(v.valid);
  CHECK(v.ground_state_ok);

  v = validate_exponents(1.5, 1.5, 3);
  CHECK(v.valid);
  CHECK(v.ground_state_ok);

  v = validate_exponents(1.0, 2.0, 2);
  CHECK_FALSE(v.valid);
  CHECK_FALSE(v.reason.empty());

  v = validate_exponents(3.0, 3.0, 3);
  CHECK_FALSE(v.ground_state_ok);

  // Both exponents at or beyond the critical value in 3-D.
  CHECK_FALSE(validate_exponents(5.0, 5.0, 3).valid);
  CHECK(validate_exponents(2.0, 2.0, 1).valid);
  CHECK_FALSE(validate_exponents(2.0, 2.0, 1).ground_state_ok);
}

TEST_CASE("model construction") {
  CHECK_THROWS_AS(ModelParams::make(0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams::make(1.0, 1.0, -1.0, 1.0, 2.0, 2.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(ModelParams::make(1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2), std::invalid_argument);
  ModelOptions loose;
  loose.outside_theorem_range = true;
  CHECK_NOTHROW(ModelParams::make(1.0, 1.0, 2.0, 2.0, 1.0, 1.0, 1, loose));

  const auto m = ModelParams::make(1.0, 2.0, 3.0, 5.0, 2.0, 4.0, 2);
  CHECK(m.alpha == doctest::Approx(5.0 * 3.0 / (3.0 * 5.0)));
  CHECK(m.a2prime == doctest::Approx(1.0));
  CHECK(m.min_mass_sq() == 1.0);
  CHECK(m.degree() == 8.0);
}

TEST_CASE("coefficient identities for random admissible parameters") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> mass(0.2, 3.0), a(0.1, 4.0), e(1.01, 5.0);
  for (int k = 0; k < 200; ++k) {
    const auto m = ModelParams::make(mass(rng), mass(rng), a(rng), a(rng), e(rng), e(rng), 2);
    CHECK(m.u_coupling() == doctest::Approx(m.a1).epsilon(1e-14));
    CHECK(m.v_coupling() == doctest::Approx(m.a2).epsilon(1e-14));
  }
}

TEST_CASE("potentials") {
  const Grid g = Grid::cube(2, 16, 4.0);
  const auto h = PotentialPair::harmonic(g, 2.0, 0.5);
  CHECK(h.K1()[0] == doctest::Approx(2.0 * 8.0));  // corner (-2, -2)
  CHECK(h.sup() == doctest::Approx(16.0));
  const auto w = PotentialPair::gaussian_well(g, 1.0, 2.0, 1.0);
  CHECK(w.K1()[8 * 16 + 8] == 0.0);  // centre of the well
  CHECK(w.K2()[0] == doctest::Approx(2.0 * (1.0 - std::exp(-8.0))));
  CHECK_THROWS_AS(PotentialPair::harmonic(g, -1.0, 0.0), std::invalid_argument);
  auto neg = ScalarField::constant(g, 1.0);
  neg[5] = -1e-3;
  CHECK_THROWS_AS(PotentialPair(neg, neg, PotentialKind::file), std::invalid_argument);
  CHECK(potential_kind_from_string(to_string(PotentialKind::gaussian_well)) ==
        PotentialKind::gaussian_well);
  CHECK_THROWS_AS(potential_kind_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("signed power and nonlinearities") {
  CHECK(signed_power(0.0, 0.5) == 0.0);
  CHECK(signed_power(-8.0, 1.0 / 3.0) == doctest::Approx(-2.0));
  CHECK(signed_power(4.0, 1.5) == doctest::Approx(8.0));

  const Grid g = Grid::cube(1, 8, 1.0);
  const auto m = ModelParams::make(1.0, 1.0, 1.0, 1.0, 2.5, 1.5, 1);
  const auto u = ScalarField::constant(g, -2.0);
  const auto v = ScalarField::constant(g, 3.0);
  // |v|^{q+1} |u|^{p-1} u and |u|^{p+1} |v|^{q-1} v
  CHECK(u_nonlinearity(u, v, m)[0] == doctest::Approx(std::pow(3.0, 2.5) * std::pow(2.0, 1.5) * -2.0));
  CHECK(v_nonlinearity(u, v, m)[0] == doctest::Approx(std::pow(2.0, 3.5) * std::pow(3.0, 0.5) * 3.0));
}

TEST_CASE("acceleration of the zero state vanishes") {
  const Grid g = Grid::cube(2, 16, 5.0);
  const auto m = ModelParams::make(1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2);
  const auto [au, av] = acceleration(StateVector::zero(g), m, PotentialPair::harmonic(g, 1.0, 1.0));
  CHECK(au.sup_norm() == 0.0);
  CHECK(av.sup_norm() == 0.0);
}

TEST_CASE("acceleration reproduces the original system coefficients") {
  const Grid g = Grid::cube(1, 32, 6.0);
  const auto m = ModelParams::make(1.2, 0.7, 1.5, 2.5, 2.0, 3.0, 1);
  const auto pot = PotentialPair::harmonic(g, 0.3, 0.1);
  const StateVector s{random_band_limited(g, 1), ScalarField(g), random_band_limited(g, 2),
                      ScalarField(g), 0.0};
  const auto [au, av] = acceleration(s, m, pot);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double u = s.u[i], v = s.v[i];
    const double eu = -m.m1 * m.m1 * u - pot.K1()[i] * u +
                      m.a1 * std::pow(std::abs(v), m.q + 1) * std::pow(std::abs(u), m.p - 1) * u;
    const double ev = -m.m2 * m.m2 * v - pot.K2()[i] * v +
                      m.a2 * std::pow(std::abs(u), m.p + 1) * std::pow(std::abs(v), m.q - 1) * v;
    const double lu = laplacian(s.u)[i], lv = laplacian(s.v)[i];
    CHECK(au[i] - lu == doctest::Approx(eu).epsilon(1e-12).scale(1.0));
    CHECK(av[i] - lv == doctest::Approx(ev).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("acceleration is odd and linear in test mode") {
  const Grid g = Grid::cube(2, 16, 5.0);
  const auto m = ModelParams::make(1.0, 1.0, 1.0, 1.0, 2.3, 1.7, 2);
  const auto pot = PotentialPair::zero(g);
  const StateVector s{random_band_limited(g, 5), ScalarField(g), random_band_limited(g, 6),
                      ScalarField(g), 0.0};
  const StateVector n{-1.0 * s.u, ScalarField(g), -1.0 * s.v, ScalarField(g), 0.0};
  const auto [a, b] = acceleration(s, m, pot);
  const auto [c, d] = acceleration(n, m, pot);
  CHECK((a + c).sup_norm() == 0.0);
  CHECK((b + d).sup_norm() == 0.0);

  ModelOptions lin;
  lin.linear_test_mode = true;
  const auto ml = ModelParams::make(1.0, 1.0, 1.0, 1.0, 2.3, 1.7, 2, lin);
  const StateVector s3{3.0 * s.u, ScalarField(g), 3.0 * s.v, ScalarField(g), 0.0};
  const auto [a1, b1] = acceleration(s, ml, pot);
  const auto [a3, b3] = acceleration(s3, ml, pot);
  CHECK((a3 - 3.0 * a1).sup_norm() < 1e-12 * a3.sup_norm());
  CHECK((b3 - 3.0 * b1).sup_norm() < 1e-12 * b3.sup_norm());
}

TEST_CASE("acceleration flags overflow") {
  const Grid g = Grid::cube(1, 16, 1.0);
  const auto m = ModelParams::make(1.0, 1.0, 1.0, 1.0, 3.0, 3.0, 1);
  const StateVector s{ScalarField::constant(g, 1e80), ScalarField(g), ScalarField::constant(g, 1e80),
                      ScalarField(g), 0.0};
  const auto [au, av] = acceleration(s, m, PotentialPair::zero(g));
  CHECK(au.overflowed());
  CHECK(av.overflowed());
}

TEST_CASE("ground state is stationary") {
  const Grid g = Grid::cube(2, 64, 20.0);
  const auto m = ModelParams::make(1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2);
  const auto pot = PotentialPair::zero(g);
  const auto gs = minimize_ground_state(default_initial_guess(g), m, pot);
  REQUIRE(gs.converged);
  const StateVector s{gs.Phi, ScalarField(g), gs.Psi, ScalarField(g), 0.0};
  const auto [au, av] = acceleration(s, m, pot);
  const double scale = gs.Phi.sup_norm() + gs.Psi.sup_norm() + 1.0;
  CHECK(au.sup_norm() / scale < 1e-5);
  CHECK(av.sup_norm() / scale < 1e-5);
}
