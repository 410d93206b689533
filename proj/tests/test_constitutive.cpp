#include "retflow/constitutive.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"

using namespace retflow;

namespace {
// k = 10 exp(-2m) convention used by the bundled relaxation scenarios
double kconv(double m) { return 10.0 * std::exp(-2.0 * m); }
}  // namespace

TEST_CASE("a_coeff values and domain") {
  CHECK(a_coeff(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  // high-precision evaluations of 2^(1/m-1) k^(-1/m)
  CHECK(a_coeff(0.7, kconv(0.7)) ==
        doctest::Approx(0.37070666172513556).epsilon(1e-14));
  CHECK(a_coeff(2.0, kconv(2.0)) ==
        doctest::Approx(1.6522431726768345).epsilon(1e-14));
  CHECK_THROWS_AS(a_coeff(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(a_coeff(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(a_coeff(1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS((PowerLawFluid{-1.0, 1.0}), std::domain_error);
}

TEST_CASE("rate_from_stress") {
  PowerLawFluid newtonian(2.0, 1.0);
  CHECK(rate_from_stress(0.0, newtonian) == 0.0);
  CHECK(rate_from_stress(4.0, newtonian) == doctest::Approx(2.0));

  PowerLawFluid thinning(1.0, 0.5);
  CHECK(rate_from_stress(2.0, thinning) == doctest::Approx(8.0));
  // forward power law sigma = k (2|D|)^(m-1) D at that rate recovers the
  // stress we started from
  double rate = 8.0;
  CHECK(thinning.k * std::pow(2.0 * std::abs(rate), thinning.m - 1.0) * rate ==
        doctest::Approx(2.0));

  // continuity at sigma = 0 for m > 1 (the regrouped form has no 0 * inf)
  PowerLawFluid thickening(1.0, 2.0);
  CHECK(rate_from_stress(0.0, thickening) == 0.0);
  CHECK(std::isfinite(rate_from_stress(1e-300, thickening)));
}

TEST_CASE("stress_from_rate and round trip") {
  PowerLawFluid newtonian(2.0, 1.0);
  CHECK(stress_from_rate(0.0, newtonian) == 0.0);
  CHECK(stress_from_rate(2.0, newtonian) == doctest::Approx(4.0));
  CHECK(stress_from_rate(8.0, PowerLawFluid(1.0, 0.5)) == doctest::Approx(2.0));

  const std::vector<double> sigmas{-1e3, -10.0, -1.0, -1e-3, 0.0,
                                   1e-3, 1.0,  10.0, 1e3};
  for (double m : {0.3, 0.7, 1.0, 1.5, 2.0, 4.0}) {
    for (double k : {1e-2, 1.0, 1e2}) {
      PowerLawFluid fluid(k, m);
      for (double s : sigmas) {
        double back = stress_from_rate(rate_from_stress(s, fluid), fluid);
        CHECK(std::abs(back - s) <= 1e-12 * std::max(1.0, std::abs(s)));
      }
    }
  }
}

TEST_CASE("odd symmetry of rate and production") {
  for (double m : {0.5, 1.0, 3.0}) {
    PowerLawFluid fluid(2.0, m);
    for (double s : {0.25, 1.0, 7.5}) {
      CHECK(rate_from_stress(-s, fluid) == -rate_from_stress(s, fluid));
      CHECK(production(1.3, -s, fluid) == -production(1.3, s, fluid));
    }
  }
}

TEST_CASE("production term") {
  PowerLawFluid maxwell(1.0, 1.0);
  CHECK(production(1.0, 0.0, maxwell) == 0.0);
  CHECK(production(1.0, 1.0, maxwell) == doctest::Approx(-1.0));
  PowerLawFluid fluid(kconv(0.7), 0.7);
  CHECK(production(2.0, -1.0, fluid) ==
        doctest::Approx(2.0 * 0.37070666172513556).epsilon(1e-13));
  CHECK_THROWS_AS(production(0.0, 1.0, maxwell), std::domain_error);
  CHECK_THROWS_AS(production(-1.0, 1.0, maxwell), std::domain_error);
}

TEST_CASE("dissipation rate is nonpositive") {
  PowerLawFluid maxwell(1.0, 1.0);
  CHECK(dissipation_rate(1.0, 0.0, maxwell) == 0.0);
  CHECK(dissipation_rate(1.0, 1.0, maxwell) == doctest::Approx(-1.0));
  CHECK(dissipation_rate(1.0, 2.0, PowerLawFluid(1.0, 0.5)) ==
        doctest::Approx(-16.0));
  for (double m : {0.4, 1.0, 2.5}) {
    PowerLawFluid fluid(0.7, m);
    for (double F : {0.3, 1.0, 4.0}) {
      for (double s : {-5.0, -0.1, 0.1, 5.0}) {
        double e = dissipation_rate(F, s, fluid);
        CHECK(e < 0.0);
        CHECK(e == doctest::Approx(s * production(F, s, fluid)));
      }
      CHECK(dissipation_rate(F, 0.0, fluid) == 0.0);
    }
  }
}

TEST_CASE("relaxation function tau") {
  ViscousEnergy quad = QuadraticViscous{0.1};
  CHECK(tau(5.0, quad, 1.0) == 0.1);
  CHECK(tau(0.0, quad, 1.0) == 0.1);
  CHECK(tau(0.0, quad, 7.3) == 0.1);

  // custom energy reproducing the quadratic one, rho* = 2
  double rho = 2.0, tau0 = 0.1;
  ViscousEnergy custom = CustomViscous{
      [=](double s) { return tau0 * s * s / (2.0 * rho); },
      [=](double s) { return tau0 * s / rho; }, tau0 / rho};
  for (double s : {-4.0, -1.0, 0.0, 0.5, 9.0})
    CHECK(tau(s, custom, rho) == doctest::Approx(0.1).epsilon(1e-15));

  ViscousEnergy bad = CustomViscous{[](double s) { return -s * s; },
                                    [](double s) { return -2.0 * s; }, -2.0};
  CHECK_THROWS_AS(tau(1.0, bad, 1.0), std::domain_error);
}

TEST_CASE("Z and its inverse") {
  ViscousEnergy quad = QuadraticViscous{0.1};
  CHECK(z_from_stress(3.0, quad, 1.0) == doctest::Approx(0.3));
  CHECK(stress_from_z(0.3, quad, 1.0) == doctest::Approx(3.0));
  CHECK(stress_from_z(0.0, quad, 1.0) == 0.0);

  double rho = 1.0, tau0 = 0.1;
  ViscousEnergy custom = CustomViscous{
      [=](double s) { return tau0 * s * s / (2.0 * rho); },
      [=](double s) { return tau0 * s / rho; }, tau0 / rho};
  for (int i = -10; i <= 10; ++i) {
    double s = static_cast<double>(i);
    CHECK(std::abs(z_from_stress(s, custom, rho) - z_from_stress(s, quad, rho)) <=
          1e-12 * std::max(1.0, std::abs(s)));
  }

  // nonconstant tau(sigma) = tau0 (1 + sigma^2): Z = tau0 (sigma + sigma^3/3)
  ViscousEnergy cubic = CustomViscous{
      [=](double s) { return tau0 * (s * s / 2.0 + s * s * s * s / 4.0) / rho; },
      [=](double s) { return tau0 * (s + s * s * s) / rho; }, tau0 / rho};
  for (double s : {-3.0, -0.7, 0.0, 0.2, 1.0, 2.5}) {
    double z = z_from_stress(s, cubic, rho);
    CHECK(z == doctest::Approx(tau0 * (s + s * s * s / 3.0)).epsilon(1e-12));
    double back = stress_from_z(z, cubic, rho);
    CHECK(std::abs(back - s) <= 1e-12 * std::max(1.0, std::abs(s)));
    CHECK(std::abs(z_from_stress(back, cubic, rho) - z) <=
          1e-12 * std::max(1.0, std::abs(z)));
  }
}

TEST_CASE("pressure laws") {
  ElasticLaw gas = PowerGas{1.0, 1.0};
  CHECK(pressure(1.0, gas) == doctest::Approx(1.0));
  CHECK(elastic_energy(1.0, gas, 1.0) == doctest::Approx(0.0));

  ElasticLaw lin = LinearElastic{1.0};
  CHECK(pressure(1.0, lin) == doctest::Approx(0.0));
  CHECK(elastic_energy(1.0, lin, 1.0) == doctest::Approx(0.0));

  // centered finite differences as the derivative oracle
  for (const ElasticLaw& law : {gas, ElasticLaw{PowerGas{2.0, 1.4}}, lin}) {
    for (double F : {0.5, 1.0, 2.0}) {
      double h = 1e-6 * F;
      double fd = (pressure(F + h, law) - pressure(F - h, law)) / (2.0 * h);
      CHECK(dpressure_dF(F, law) == doctest::Approx(fd).epsilon(1e-6));
      CHECK(-dpressure_dF(F, law) > 0.0);  // hyperbolicity precondition
      // p = -rho* de^E/dF
      double rho = 1.7;
      double efd = (elastic_energy(F + h, law, rho) -
                    elastic_energy(F - h, law, rho)) /
                   (2.0 * h);
      CHECK(-rho * efd == doctest::Approx(pressure(F, law)).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(pressure(0.0, gas), std::domain_error);
  CHECK_THROWS_AS(dpressure_dF(-1.0, gas), std::domain_error);
  CHECK_THROWS_AS(elastic_energy(0.0, lin, 1.0), std::domain_error);
}

TEST_CASE("relative elastic energy is nonnegative with minimum at F = 1") {
  for (const ElasticLaw& law :
       {ElasticLaw{PowerGas{1.0, 1.0}}, ElasticLaw{PowerGas{2.0, 1.4}},
        ElasticLaw{LinearElastic{3.0}}}) {
    CHECK(elastic_energy_rel(1.0, law, 1.0) == doctest::Approx(0.0));
    for (double F : {0.3, 0.8, 1.2, 3.0})
      CHECK(elastic_energy_rel(F, law, 1.0) > 0.0);
  }
}

TEST_CASE("viscous energy") {
  ViscousEnergy quad = QuadraticViscous{0.4};
  CHECK(viscous_energy(3.0, quad, 2.0) == doctest::Approx(0.4 * 9.0 / 4.0));
  CHECK(viscous_energy(0.0, quad, 2.0) == 0.0);
}

TEST_CASE("material validation") {
  Material mat;
  mat.fluid = PowerLawFluid(1.0, 0.7);
  CHECK_NOTHROW(mat.validate());
  mat.rho_star = -1.0;
  CHECK_THROWS_AS(mat.validate(), std::domain_error);
  mat.rho_star = 1.0;
  mat.viscous = QuadraticViscous{0.0};
  CHECK_THROWS_AS(mat.validate(), std::domain_error);
  mat.viscous = QuadraticViscous{0.1};
  mat.elastic = PowerGas{1.0, 0.5};
  CHECK_THROWS_AS(mat.validate(), std::domain_error);
}

TEST_CASE("implicit sigma solve") {
  Material mat;
  mat.viscous = QuadraticViscous{0.1};
  for (double m : {0.5, 1.0, 2.0}) {
    mat.fluid = PowerLawFluid(0.8, m);
    for (double target : {-0.4, -0.01, 0.0, 0.02, 0.7}) {
      for (double c : {0.0, 1e-3, 0.3, 50.0}) {
        double s = detail::solve_sigma_implicit(target, c, mat);
        double lhs = z_from_stress(s, mat.viscous, mat.rho_star) +
                     c * a_coeff(mat.fluid) *
                         detail::spow(s, 1.0 / mat.fluid.m);
        CHECK(std::abs(lhs - target) <= 1e-12 * std::max(1.0, std::abs(target)));
      }
    }
  }
}
