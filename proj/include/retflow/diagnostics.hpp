#ifndef RETFLOW_DIAGNOSTICS_HPP
#define RETFLOW_DIAGNOSTICS_HPP

#include <iosfwd>
#include <span>
#include <vector>

#include "retflow/ode.hpp"
#include "retflow/pde.hpp"

namespace retflow {

struct EnergyReport {
  double time = 0.0;
  double kinetic = 0.0;
  double elastic = 0.0;
  double viscous = 0.0;
  double total = 0.0;
  double diss_integral = 0.0;  // cumulative integral of the sampled power
  double residual = 0.0;       // total(t) - total(t0) - diss_integral
};

/// Cell sum of rho* (v^2/2 + e^E + e^V) dX, components reported separately.
/// The elastic component is measured from its tangent at F = 1 (see
/// elastic_energy_rel), so rest states report zero.
EnergyReport total_energy(const Field1D& field);

/// Cell sum of the production power sigma * P(F, sigma) * dX; always <= 0.
double total_dissipation(const Field1D& field);

/// Trapezoidal budget residuals: residual_n = E_n - E_0 - int_0^n power dt.
/// For smooth homogeneous runs the residual vanishes to integration
/// tolerance; finite-volume runs must come out <= 0 (the scheme only adds
/// dissipation).
std::vector<double> energy_budget(std::span<const double> times,
                                  std::span<const double> totals,
                                  std::span<const double> powers);

/// Stored internal energy rho*(e^E_rel + e^V) and the exact power
/// (sigma - p(F) + p(1)) v_X + sigma P feeding it (the p(1) term matches
/// the tangent correction in e^E_rel), sampled at the trajectory nodes
/// (n_samples = 0) or on a uniform grid through the dense output. Feeding
/// these to energy_budget closes the budget for smooth solutions.
struct HomogeneousEnergySeries {
  std::vector<double> times, energy, power;
};
HomogeneousEnergySeries homogeneous_energy_series(const Trajectory& traj,
                                                  const Material& material,
                                                  const ShearProtocol& protocol,
                                                  int n_samples = 0);

struct OrderEstimate {
  double coarse = 0.0;  // log2(e0/e1)
  double fine = 0.0;    // log2(e1/e2)
  bool saturated = false;
};

/// Observed convergence order from errors at dX, dX/2, dX/4. Errors below
/// 1e-13 flag saturation instead of dividing noise.
OrderEstimate observed_order(double e_coarse, double e_mid, double e_fine);

/// Columns: time, kinetic, elastic, viscous, total, diss_integral, residual.
void write_energy_csv(std::ostream& os,
                      std::span<const EnergyReport> reports);

/// Samples the energy report at fixed intervals (interval 0: every step)
/// and accumulates the dissipation integral and budget residual.
class EnergyObserver : public Observer {
 public:
  explicit EnergyObserver(double interval = 0.0) : interval_(interval) {}
  void on_start(const Field1D& f) override;
  void on_step(const Field1D& f, const StepInfo& info) override;

  const std::vector<EnergyReport>& reports() const { return reports_; }
  /// Largest step-to-step increase of the total (0 when monotone).
  double max_energy_increase() const { return max_increase_; }

 private:
  void record(const Field1D& f);
  double interval_;
  double next_sample_ = 0.0;
  double prev_total_ = 0.0;
  double prev_power_ = 0.0;
  double prev_time_ = 0.0;
  double first_total_ = 0.0;
  double integral_ = 0.0;
  double max_increase_ = 0.0;
  bool started_ = false;
  std::vector<EnergyReport> reports_;
};

/// Verifies finite signal speed: cells whose state moved from the initial
/// data by more than `threshold` (absolute, summed over the conserved
/// triple) must stay inside the cone spreading from the initial jump
/// positions at the largest characteristic speed seen so far, with a
/// one-cell margin. A first-order scheme smears fronts over several cells,
/// so a meaningful front detector uses a threshold at a fixed fraction of
/// the jump amplitude (half-amplitude marks the front position); tiny
/// thresholds only trace the parabolic tail of the numerical viscosity.
class WavefrontObserver : public Observer {
 public:
  struct Sample {
    double time;
    double cone_radius;
    double max_excess;  // > 0 means a change was detected outside the cone
  };

  WavefrontObserver(std::vector<double> jump_positions,
                    double threshold = 1e-6)
      : jumps_(std::move(jump_positions)), threshold_(threshold) {}
  void on_start(const Field1D& f) override;
  void on_step(const Field1D& f, const StepInfo& info) override;

  const std::vector<Sample>& samples() const { return samples_; }

 private:
  std::vector<double> jumps_;
  double threshold_;
  double t0_ = 0.0;
  double max_speed_ = 0.0;
  std::vector<Conserved> initial_;
  std::vector<Sample> samples_;
};

}  // namespace retflow

#endif
