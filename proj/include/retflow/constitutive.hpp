#ifndef RETFLOW_CONSTITUTIVE_HPP
#define RETFLOW_CONSTITUTIVE_HPP

#include <functional>
#include <variant>

namespace retflow {

/// Power-law rheology sigma = k |2 D|^(m-1) (2 D) written in terms of the
/// one-dimensional velocity gradient. m < 1 is shear-thinning, m = 1
/// Newtonian (k is then the viscosity), m > 1 shear-thickening.
struct PowerLawFluid {
  double k;  // consistency coefficient [Pa s^m]
  double m;  // flow index [-]

  PowerLawFluid(double consistency, double flow_index);
};

/// Coefficient a(m, k) = 2^(1/m - 1) k^(-1/m) of the inverted power law.
double a_coeff(double m, double k);
double a_coeff(const PowerLawFluid& fluid);

/// Velocity gradient produced by a given stress:
///   v_x = a(m,k) sign(sigma) |sigma|^(1/m).
/// Evaluated in exactly this regrouped form; the textbook grouping
/// |sigma|^((1-m)/m) * sigma is an indeterminate 0 * inf at sigma = 0
/// once m > 1.
double rate_from_stress(double sigma, const PowerLawFluid& fluid);

/// Exact functional inverse of rate_from_stress:
///   sigma = sign(v_x) (|v_x| / a(m,k))^m.
double stress_from_rate(double vx, const PowerLawFluid& fluid);

/// Stress production term P(F, sigma) = -F a(m,k) sign(sigma) |sigma|^(1/m).
/// P(F, 0) = 0 and sigma * P <= 0 for every F > 0.
double production(double F, double sigma, const PowerLawFluid& fluid);

/// Dissipated power density sigma * P(F, sigma) <= 0.
double dissipation_rate(double F, double sigma, const PowerLawFluid& fluid);

/// Quadratic viscous energy e_v = tau0 sigma^2 / (2 rho*), giving a constant
/// relaxation function tau(sigma) = tau0 (units 1/Pa: time per viscosity).
struct QuadraticViscous {
  double tau0;
};

/// User-supplied convex viscous energy with e_v(0) = 0. The relaxation
/// function rho* e_v'(sigma)/sigma is indeterminate at sigma = 0, so the
/// limit e_v''(0) must be supplied explicitly; no symbolic limits are taken.
struct CustomViscous {
  std::function<double(double)> energy;        // e_v(sigma)  [J/kg]
  std::function<double(double)> denergy;       // e_v'(sigma)
  double ddenergy_at_zero;                     // lim e_v'(s)/s as s -> 0
};

using ViscousEnergy = std::variant<QuadraticViscous, CustomViscous>;

/// Relaxation function tau(sigma) = rho* e_v'(sigma)/sigma > 0.
double tau(double sigma, const ViscousEnergy& viscous, double rho_star);

/// Conserved stress variable Z(sigma) = integral of tau from 0 to sigma,
/// normalized by Z(0) = 0. Strictly increasing wherever tau > 0.
double z_from_stress(double sigma, const ViscousEnergy& viscous,
                     double rho_star);

/// Functional inverse of z_from_stress. Closed form z / tau0 for the
/// quadratic energy; bracketed safeguarded Newton otherwise.
double stress_from_z(double z, const ViscousEnergy& viscous, double rho_star);

/// Linear elastic response T(F) = E (F - 1) about the reference F = 1.
struct LinearElastic {
  double modulus;  // E [Pa]
};

/// Polytropic gas pressure p(F) = p0 F^(-gamma), with T = -p and
/// F = rho*/rho.
struct PowerGas {
  double p0;     // [Pa]
  double gamma;  // >= 1
};

using ElasticLaw = std::variant<LinearElastic, PowerGas>;

/// Pressure entering the momentum flux p(F) - sigma. For the linear law
/// this is -T(F) = -E (F - 1); for the gas it is p0 F^(-gamma).
double pressure(double F, const ElasticLaw& elastic);

/// dp/dF; always negative (-p' = T' > 0 is the hyperbolicity condition).
double dpressure_dF(double F, const ElasticLaw& elastic);

/// Elastic energy per unit mass e^E(F), with p = -rho* e^E_F.
double elastic_energy(double F, const ElasticLaw& elastic, double rho_star);

/// Elastic energy measured from its tangent at the reference state F = 1:
///   e^E(F) - e^E(1) - e^E_F(1) (F - 1).
/// Convexity makes this nonnegative with a zero minimum at F = 1, so
/// reference states report zero energy; the correction is linear in F and
/// drops out of every periodic energy budget. Identical to elastic_energy
/// for the linear law.
double elastic_energy_rel(double F, const ElasticLaw& elastic,
                          double rho_star);

/// Viscous energy per unit mass e^V(sigma); tau0 sigma^2 / (2 rho*) for the
/// quadratic variant.
double viscous_energy(double sigma, const ViscousEnergy& viscous,
                      double rho_star);

/// Bundle of all material response functions. Immutable after construction
/// and safe to share across threads.
struct Material {
  double rho_star = 1.0;  // reference density [kg/m^3]
  ElasticLaw elastic = PowerGas{1.0, 1.0};
  ViscousEnergy viscous = QuadraticViscous{0.1};
  PowerLawFluid fluid{1.0, 1.0};
  double body_force = 0.0;  // [m/s^2]

  void validate() const;
};

namespace detail {

/// sign(x) |x|^p with spow(0, p) = 0 for p > 0.
double spow(double x, double p);

/// Solves  Z(sigma) + c * a(m,k) * sign(sigma)|sigma|^(1/m) = target
/// for sigma, with c >= 0. The left side is strictly increasing, so the
/// root is unique and bracketed by [0, stress_from_z(target)] (or its
/// mirror image); used by every implicit stage of the ODE and PDE solvers.
double solve_sigma_implicit(double target, double c, const Material& mat);

}  // namespace detail

}  // namespace retflow

#endif
