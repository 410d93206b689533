#include "retflow/analytic.hpp"

#include <cmath>
#include <stdexcept>

namespace retflow {

namespace {
// The m != 1 closed forms are ill-conditioned as m -> 1 (both exponents
// blow up); inside this band the exponential branch is used instead.
constexpr double kMaxwellBand = 1e-6;
}  // namespace

double case1_solution(const Case1Params& p, double tbar) {
  if (!(tbar >= 0.0))
    throw std::domain_error("case1_solution: tbar must be >= 0");
  const double m = p.fluid.m;
  const double a = a_coeff(p.fluid);
  const double s0 = std::abs(p.sigma0);
  const double sgn = p.sigma0 < 0.0 ? -1.0 : 1.0;
  if (s0 == 0.0) return 0.0;

  if (std::abs(m - 1.0) < kMaxwellBand) return sgn * s0 * std::exp(-a * tbar);

  if (m < 1.0) {
    double base = std::pow(s0, (m - 1.0) / m) + a * (1.0 - m) / m * tbar;
    return sgn * std::pow(base, -m / (1.0 - m));
  }

  // m > 1: the bracket is floored at zero before exponentiation, so the
  // solution is exactly 0 at and after the extinction time. The floor
  // absorbs the few ulps of cancellation noise at tbar = tbar_c.
  double s0pow = std::pow(s0, (m - 1.0) / m);
  double base = s0pow - a * (m - 1.0) / m * tbar;
  if (base <= 1e-12 * s0pow) return 0.0;
  return sgn * std::pow(base, m / (m - 1.0));
}

double extinction_time(const Case1Params& p) {
  const double m = p.fluid.m;
  if (!(m > 1.0))
    throw std::domain_error("extinction_time: defined only for m > 1");
  const double s0 = std::abs(p.sigma0);
  if (s0 == 0.0) return 0.0;
  return m / (m - 1.0) * std::pow(s0, (m - 1.0) / m) / a_coeff(p.fluid);
}

double steady_sigma(const SteadyShearParams& p) {
  return stress_from_rate(p.vx0, p.fluid);
}

double maxwell_comparator(double t, double sigma_inf, double tau1) {
  if (!(tau1 > 0.0))
    throw std::domain_error("maxwell_comparator: tau1 must be positive");
  if (!(t >= 0.0))
    throw std::domain_error("maxwell_comparator: t must be >= 0");
  return sigma_inf * (1.0 - std::exp(-t / tau1));
}

}  // namespace retflow
