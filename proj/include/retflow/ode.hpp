#ifndef RETFLOW_ODE_HPP
#define RETFLOW_ODE_HPP

#include <functional>
#include <vector>

#include "retflow/analytic.hpp"
#include "retflow/constitutive.hpp"

namespace retflow {

/// Prescribed spatial velocity gradient v_x(t) driving a homogeneous
/// deformation, F_t = v_x F.
class ShearProtocol {
 public:
  static ShearProtocol zero_rate();
  static ShearProtocol constant_rate(double vx0);
  /// rate(t) = rates[i] on [breakpoints[i], breakpoints[i+1]); the last
  /// rate extends to infinity, the first also covers t < breakpoints[0].
  static ShearProtocol piecewise_constant(std::vector<double> breakpoints,
                                          std::vector<double> rates);
  static ShearProtocol custom(std::function<double(double)> rate);

  double rate(double t) const;
  /// True when F(t) = F0 exp(vx0 t) is available in closed form.
  bool exponential_deformation() const { return kind_ != Kind::kCustom && kind_ != Kind::kPiecewise; }
  double constant_value() const { return vx0_; }
  const std::vector<double>& breakpoints() const { return breakpoints_; }

 private:
  enum class Kind { kZero, kConstant, kPiecewise, kCustom };
  Kind kind_ = Kind::kZero;
  double vx0_ = 0.0;
  std::vector<double> breakpoints_, rates_;
  std::function<double(double)> custom_;
};

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  long max_steps = 2'000'000;
  double initial_step = 0.0;  // 0: automatic
  double t_end = 1.0;
  /// Explicit steps below this fraction of the time span hand the rest of
  /// the integration to a backward-Euler phase (safeguarded Newton on
  /// sigma through Z). 0 disables the switch.
  double implicit_switch = 1e-5;
};

enum class OdeStatus { kOk, kStepUnderflow, kMaxStepsExceeded };

struct SolverStats {
  long steps = 0;
  long rejected = 0;
  long rhs_evals = 0;
  long implicit_steps = 0;
};

/// Time series of one homogeneous integration. Nodes are the accepted
/// steps; sample() evaluates the cubic Hermite interpolant between them.
struct Trajectory {
  std::vector<double> times, sigma, F, sigma_dot, F_dot;
  SolverStats stats;
  OdeStatus status = OdeStatus::kOk;
  double rtol = 0.0, atol = 0.0;

  double sample_sigma(double t) const;
  double sample_F(double t) const;
};

/// Right side of the startup-of-shear stress equation with exponential
/// deformation F = F0 exp(vx0 t):
///   dsigma/dt = (F0 exp(vx0 t)/tau0) (vx0 - a(m,k) sign(sigma)|sigma|^(1/m)).
double rhs_case2(double t, double sigma, const SteadyShearParams& p);

/// Integrates the smooth stress balance tau(sigma) sigma_t - v_X = P under
/// the given protocol, carrying Z(sigma) (and F, unless the protocol has a
/// closed-form deformation) as the state. Adaptive Dormand-Prince 5(4)
/// with an optional implicit terminal phase for stiff late times.
Trajectory simulate_homogeneous(const Material& material,
                                const ShearProtocol& protocol, double sigma0,
                                double F0, const OdeOptions& opts);

/// Integrates the linear comparator tau1 sigma_t = sigma_inf - sigma with
/// the same stepper (closed form: maxwell_comparator).
Trajectory simulate_linear_relaxation(double sigma_inf, double tau1,
                                      double sigma0, const OdeOptions& opts);

/// Fixed-interval decay ratios r_i = (sigma_inf - sigma(t_i + dt)) /
/// (sigma_inf - sigma(t_i)) on a uniform n-point grid over the trajectory.
/// An exponential approach gives constant ratios; strictly decreasing
/// ratios are the signature of superexponential convergence. The sequence
/// is truncated once residuals fall below 100 * atol.
std::vector<double> superexp_ratios(const Trajectory& traj, double sigma_inf,
                                    int n_samples = 32);

}  // namespace retflow

#endif
