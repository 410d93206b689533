#include "retflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace retflow {

EnergyReport total_energy(const Field1D& field) {
  const Material& mat = field.material;
  const double dx = field.grid.dx();
  EnergyReport r;
  r.time = field.time;
  for (const auto& cell : field.cells) {
    State1D s = primitives(cell, mat);
    r.kinetic += mat.rho_star * 0.5 * s.v * s.v * dx;
    r.elastic +=
        mat.rho_star * elastic_energy_rel(s.F, mat.elastic, mat.rho_star) * dx;
    r.viscous +=
        mat.rho_star * viscous_energy(s.sigma, mat.viscous, mat.rho_star) * dx;
  }
  r.total = r.kinetic + r.elastic + r.viscous;
  return r;
}

double total_dissipation(const Field1D& field) {
  const Material& mat = field.material;
  const double dx = field.grid.dx();
  double e = 0.0;
  for (const auto& cell : field.cells) {
    State1D s = primitives(cell, mat);
    e += dissipation_rate(s.F, s.sigma, mat.fluid) * dx;
  }
  return e;
}

std::vector<double> energy_budget(std::span<const double> times,
                                  std::span<const double> totals,
                                  std::span<const double> powers) {
  if (times.size() != totals.size() || times.size() != powers.size())
    throw std::invalid_argument("energy_budget: size mismatch");
  std::vector<double> residuals(times.size(), 0.0);
  double integral = 0.0;
  for (size_t i = 1; i < times.size(); ++i) {
    integral +=
        0.5 * (powers[i] + powers[i - 1]) * (times[i] - times[i - 1]);
    residuals[i] = totals[i] - totals[0] - integral;
  }
  return residuals;
}

namespace {

HomogeneousEnergySeries homogeneous_energy_impl(
    const std::vector<double>& times, const std::vector<double>& sigmas,
    const std::vector<double>& Fs, const Material& material,
    const ShearProtocol& protocol) {
  HomogeneousEnergySeries out;
  out.times = times;
  out.energy.resize(times.size());
  out.power.resize(times.size());
  for (size_t i = 0; i < times.size(); ++i) {
    double F = Fs[i], sg = sigmas[i], t = times[i];
    out.energy[i] =
        material.rho_star *
        (elastic_energy_rel(F, material.elastic, material.rho_star) +
         viscous_energy(sg, material.viscous, material.rho_star));
    double vX = protocol.rate(t) * F;  // v_X = v_x F
    // the p(1) term is the time derivative of the tangent correction
    // inside elastic_energy_rel
    out.power[i] = (sg - pressure(F, material.elastic) +
                    pressure(1.0, material.elastic)) *
                       vX +
                   dissipation_rate(F, sg, material.fluid);
  }
  return out;
}

}  // namespace

HomogeneousEnergySeries homogeneous_energy_series(
    const Trajectory& traj, const Material& material,
    const ShearProtocol& protocol, int n_samples) {
  std::vector<double> times, sigmas, Fs;
  if (n_samples > 1) {
    double t0 = traj.times.front(), t1 = traj.times.back();
    for (int i = 0; i < n_samples; ++i) {
      double t = t0 + (t1 - t0) * i / (n_samples - 1);
      times.push_back(t);
      sigmas.push_back(traj.sample_sigma(t));
      Fs.push_back(traj.sample_F(t));
    }
  } else {
    times = traj.times;
    sigmas = traj.sigma;
    Fs = traj.F;
  }
  return homogeneous_energy_impl(times, sigmas, Fs, material, protocol);
}

OrderEstimate observed_order(double e_coarse, double e_mid, double e_fine) {
  if (!(e_coarse > 0.0) || !(e_mid > 0.0) || !(e_fine > 0.0))
    throw std::domain_error("observed_order: errors must be positive");
  OrderEstimate est;
  if (e_coarse < 1e-13 || e_mid < 1e-13 || e_fine < 1e-13) {
    est.saturated = true;
    return est;
  }
  est.coarse = std::log2(e_coarse / e_mid);
  est.fine = std::log2(e_mid / e_fine);
  return est;
}

void write_energy_csv(std::ostream& os,
                      std::span<const EnergyReport> reports) {
  os << "time,kinetic,elastic,viscous,total,diss_integral,residual\n";
  char buf[512];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.time,
                  r.kinetic, r.elastic, r.viscous, r.total, r.diss_integral,
                  r.residual);
    os << buf;
  }
}

void EnergyObserver::record(const Field1D& f) {
  EnergyReport r = total_energy(f);
  double power = total_dissipation(f);
  if (started_)
    integral_ += 0.5 * (power + prev_power_) * (r.time - prev_time_);
  else
    first_total_ = r.total;
  r.diss_integral = integral_;
  r.residual = r.total - first_total_ - integral_;
  prev_power_ = power;
  prev_time_ = r.time;
  reports_.push_back(r);
}

void EnergyObserver::on_start(const Field1D& f) {
  started_ = false;
  record(f);
  started_ = true;
  prev_total_ = reports_.back().total;
  next_sample_ = f.time + interval_;
}

void EnergyObserver::on_step(const Field1D& f, const StepInfo&) {
  // the monotonicity watch runs every step regardless of sampling
  double tot = total_energy(f).total;
  max_increase_ = std::max(max_increase_, tot - prev_total_);
  prev_total_ = tot;
  if (interval_ > 0.0 && f.time < next_sample_ - 1e-12 * interval_) return;
  record(f);
  next_sample_ += interval_;
}

void WavefrontObserver::on_start(const Field1D& f) {
  t0_ = f.time;
  max_speed_ = 0.0;
  initial_ = f.cells;
  samples_.clear();
}

void WavefrontObserver::on_step(const Field1D& f, const StepInfo& info) {
  max_speed_ = std::max(max_speed_, info.max_speed);
  const double radius = max_speed_ * (f.time - t0_) + f.grid.dx();
  double max_excess = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < f.cells.size(); ++i) {
    double dm = std::abs(f.cells[i].mom - initial_[i].mom);
    double dF = std::abs(f.cells[i].F - initial_[i].F);
    double dz = std::abs(f.cells[i].z - initial_[i].z);
    if (dm + dF + dz <= threshold_) continue;
    double x = f.grid.center(static_cast<int>(i));
    double dist = std::numeric_limits<double>::infinity();
    for (double j : jumps_) dist = std::min(dist, std::abs(x - j));
    max_excess = std::max(max_excess, dist - radius);
  }
  samples_.push_back({f.time, radius, max_excess});
}

}  // namespace retflow
