#ifndef RETFLOW_ANALYTIC_HPP
#define RETFLOW_ANALYTIC_HPP

#include "retflow/constitutive.hpp"

namespace retflow {

/// Stress relaxation at rest (v_X = 0, F = 1) in nondimensional time
/// tbar = t / tau0. The decay regime is set by the flow index:
/// algebraic for m < 1, exponential for m = 1, extinction in finite time
/// for m > 1. sigma0 < 0 is handled by odd symmetry of the dynamics.
struct Case1Params {
  PowerLawFluid fluid;
  double sigma0 = 1.0;
};

double case1_solution(const Case1Params& p, double tbar);

/// Time at which the m > 1 solution reaches exactly zero:
///   tbar_c = (m/(m-1)) |sigma0|^((m-1)/m) / a(m,k).
/// Domain error for m <= 1 (no finite extinction).
double extinction_time(const Case1Params& p);

/// Startup of shear at constant velocity gradient vx0, from F(0) = F0.
struct SteadyShearParams {
  double vx0 = 0.1;
  double F0 = 1.0;
  double tau0 = 0.1;
  PowerLawFluid fluid{1.0, 1.0};
};

/// Stationary stress sigma_inf = sign(vx0) (|vx0| / a(m,k))^m, i.e. the
/// algebraic power-law stress for the applied rate.
double steady_sigma(const SteadyShearParams& p);

/// Linear relaxation comparator sigma(t) = sigma_inf (1 - exp(-t/tau1)).
double maxwell_comparator(double t, double sigma_inf, double tau1);

}  // namespace retflow

#endif
