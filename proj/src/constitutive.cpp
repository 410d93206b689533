#include "retflow/constitutive.hpp"

#include <cmath>
#include <stdexcept>

#include "retflow/rootfind.hpp"

namespace retflow {

namespace detail {

double spow(double x, double p) {
  if (x == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(x), p), x);
}

}  // namespace detail

PowerLawFluid::PowerLawFluid(double consistency, double flow_index)
    : k(consistency), m(flow_index) {
  if (!(k > 0.0) || !(m > 0.0))
    throw std::domain_error("PowerLawFluid: k and m must be positive");
}

double a_coeff(double m, double k) {
  if (!(m > 0.0) || !(k > 0.0))
    throw std::domain_error("a_coeff: m and k must be positive");
  return std::pow(2.0, 1.0 / m - 1.0) * std::pow(k, -1.0 / m);
}

double a_coeff(const PowerLawFluid& fluid) { return a_coeff(fluid.m, fluid.k); }

double rate_from_stress(double sigma, const PowerLawFluid& fluid) {
  return a_coeff(fluid) * detail::spow(sigma, 1.0 / fluid.m);
}

double stress_from_rate(double vx, const PowerLawFluid& fluid) {
  if (vx == 0.0) return 0.0;
  return detail::spow(vx / a_coeff(fluid), fluid.m);
}

double production(double F, double sigma, const PowerLawFluid& fluid) {
  if (!(F > 0.0)) throw std::domain_error("production: F must be positive");
  return -F * rate_from_stress(sigma, fluid);
}

double dissipation_rate(double F, double sigma, const PowerLawFluid& fluid) {
  if (!(F > 0.0))
    throw std::domain_error("dissipation_rate: F must be positive");
  return -F * a_coeff(fluid) * std::pow(std::abs(sigma), 1.0 / fluid.m + 1.0);
}

double tau(double sigma, const ViscousEnergy& viscous, double rho_star) {
  double t = std::visit(
      [&](const auto& v) -> double {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, QuadraticViscous>) {
          return v.tau0;
        } else {
          if (sigma == 0.0) return rho_star * v.ddenergy_at_zero;
          return rho_star * v.denergy(sigma) / sigma;
        }
      },
      viscous);
  if (!(t > 0.0))
    throw std::domain_error("tau: relaxation function must be positive");
  return t;
}

namespace {

// Adaptive Simpson quadrature of tau over [0, sigma] for custom energies.
double simpson(const ViscousEnergy& v, double rho, double a, double fa,
               double b, double fb, double fm, double whole, double tol,
               int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = tau(lm, v, rho), frm = tau(rm, v, rho);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(v, rho, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         simpson(v, rho, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

double integrate_tau(const ViscousEnergy& v, double rho, double sigma) {
  if (sigma == 0.0) return 0.0;
  double fa = tau(0.0, v, rho);
  double fb = tau(sigma, v, rho);
  double fm = tau(0.5 * sigma, v, rho);
  double whole = sigma / 6.0 * (fa + 4.0 * fm + fb);
  double tol = 1e-14 * std::max(1.0, std::abs(whole));
  return simpson(v, rho, 0.0, fa, sigma, fb, fm, whole, tol, 48);
}

}  // namespace

double z_from_stress(double sigma, const ViscousEnergy& viscous,
                     double rho_star) {
  if (const auto* q = std::get_if<QuadraticViscous>(&viscous))
    return q->tau0 * sigma;
  return integrate_tau(viscous, rho_star, sigma);
}

double stress_from_z(double z, const ViscousEnergy& viscous, double rho_star) {
  if (const auto* q = std::get_if<QuadraticViscous>(&viscous))
    return z / q->tau0;
  if (z == 0.0) return 0.0;

  // bracket: Z is increasing with Z(0) = 0, so the root shares the sign of z
  auto g = [&](double s) { return z_from_stress(s, viscous, rho_star) - z; };
  auto dg = [&](double s) { return tau(s, viscous, rho_star); };
  double hi = std::copysign(std::max(1.0, std::abs(z) / dg(0.0)), z);
  int grow = 0;
  while (std::signbit(g(hi)) == std::signbit(-z)) {
    hi *= 2.0;
    if (++grow > 200)
      throw std::runtime_error("stress_from_z: failed to bracket inverse");
  }
  double lo = std::min(0.0, hi), up = std::max(0.0, hi);
  auto r = newton_bisect(g, dg, lo, up, 1e-13 * std::max(1.0, std::abs(z)),
                         1e-15);
  if (!r.converged)
    throw std::runtime_error("stress_from_z: inversion did not converge");
  return r.x;
}

double pressure(double F, const ElasticLaw& elastic) {
  if (!(F > 0.0)) throw std::domain_error("pressure: F must be positive");
  return std::visit(
      [&](const auto& e) -> double {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, LinearElastic>)
          return -e.modulus * (F - 1.0);
        else
          return e.p0 * std::pow(F, -e.gamma);
      },
      elastic);
}

double dpressure_dF(double F, const ElasticLaw& elastic) {
  if (!(F > 0.0)) throw std::domain_error("dpressure_dF: F must be positive");
  return std::visit(
      [&](const auto& e) -> double {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, LinearElastic>)
          return -e.modulus;
        else
          return -e.gamma * e.p0 * std::pow(F, -e.gamma - 1.0);
      },
      elastic);
}

double elastic_energy(double F, const ElasticLaw& elastic, double rho_star) {
  if (!(F > 0.0))
    throw std::domain_error("elastic_energy: F must be positive");
  return std::visit(
      [&](const auto& e) -> double {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, LinearElastic>) {
          return e.modulus * (F - 1.0) * (F - 1.0) / (2.0 * rho_star);
        } else {
          if (e.gamma == 1.0) return -(e.p0 / rho_star) * std::log(F);
          return e.p0 * std::pow(F, 1.0 - e.gamma) /
                 (rho_star * (e.gamma - 1.0));
        }
      },
      elastic);
}

double elastic_energy_rel(double F, const ElasticLaw& elastic,
                          double rho_star) {
  if (std::holds_alternative<LinearElastic>(elastic))
    return elastic_energy(F, elastic, rho_star);  // tangent at F=1 is flat
  return elastic_energy(F, elastic, rho_star) -
         elastic_energy(1.0, elastic, rho_star) +
         pressure(1.0, elastic) * (F - 1.0) / rho_star;
}

double viscous_energy(double sigma, const ViscousEnergy& viscous,
                      double rho_star) {
  return std::visit(
      [&](const auto& v) -> double {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, QuadraticViscous>)
          return v.tau0 * sigma * sigma / (2.0 * rho_star);
        else
          return v.energy(sigma);
      },
      viscous);
}

void Material::validate() const {
  if (!(rho_star > 0.0))
    throw std::domain_error("Material: rho_star must be positive");
  if (const auto* q = std::get_if<QuadraticViscous>(&viscous)) {
    if (!(q->tau0 > 0.0))
      throw std::domain_error("Material: tau0 must be positive");
  } else {
    const auto& c = std::get<CustomViscous>(viscous);
    if (!c.energy || !c.denergy)
      throw std::domain_error("Material: custom viscous energy incomplete");
    if (!(c.ddenergy_at_zero > 0.0))
      throw std::domain_error("Material: custom viscous limit must be > 0");
  }
  std::visit(
      [](const auto& e) {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, LinearElastic>) {
          if (!(e.modulus > 0.0))
            throw std::domain_error("Material: modulus must be positive");
        } else {
          if (!(e.p0 > 0.0) || !(e.gamma >= 1.0))
            throw std::domain_error("Material: need p0 > 0 and gamma >= 1");
        }
      },
      elastic);
  (void)a_coeff(fluid);  // throws on invalid k, m
}

namespace detail {

double solve_sigma_implicit(double target, double c, const Material& mat) {
  if (target == 0.0) return 0.0;
  const double a = a_coeff(mat.fluid);
  const double inv_m = 1.0 / mat.fluid.m;
  auto g = [&](double s) {
    return z_from_stress(s, mat.viscous, mat.rho_star) + c * a * spow(s, inv_m) -
           target;
  };
  auto dg = [&](double s) {
    return tau(s, mat.viscous, mat.rho_star) +
           c * a * inv_m * std::pow(std::abs(s), inv_m - 1.0);
  };
  // g is odd-signed and increasing: the root lies between 0 and the
  // production-free solution Z^{-1}(target). Rounding can leave g at that
  // endpoint on the wrong side by an ulp when c is tiny, so expand until
  // the root is enclosed (g(lo) <= 0 <= g(hi)).
  double edge = stress_from_z(target, mat.viscous, mat.rho_star);
  double lo = std::min(0.0, edge), hi = std::max(0.0, edge);
  double pad = 1e-15 * std::max(std::abs(edge), 1.0);
  int grow = 0;
  while (g(hi) < 0.0 && ++grow < 200) {
    hi += pad;
    pad *= 2.0;
  }
  while (g(lo) > 0.0 && ++grow < 200) {
    lo -= pad;
    pad *= 2.0;
  }
  if (grow >= 200)
    throw std::runtime_error("solve_sigma_implicit: failed to bracket");
  double tol = 1e-14 * std::max(1.0, std::abs(target));
  auto r = newton_bisect(g, dg, lo, hi, tol, 1e-15);
  if (!r.converged)
    throw std::runtime_error("solve_sigma_implicit: no convergence");
  return r.x;
}

}  // namespace detail

}  // namespace retflow
