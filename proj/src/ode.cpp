#include "retflow/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace retflow {

ShearProtocol ShearProtocol::zero_rate() { return ShearProtocol{}; }

ShearProtocol ShearProtocol::constant_rate(double vx0) {
  ShearProtocol p;
  p.kind_ = Kind::kConstant;
  p.vx0_ = vx0;
  return p;
}

ShearProtocol ShearProtocol::piecewise_constant(std::vector<double> breakpoints,
                                                std::vector<double> rates) {
  if (breakpoints.size() != rates.size() || breakpoints.empty())
    throw std::invalid_argument("piecewise_constant: need equal, nonempty sizes");
  for (size_t i = 1; i < breakpoints.size(); ++i)
    if (!(breakpoints[i] > breakpoints[i - 1]))
      throw std::invalid_argument(
          "piecewise_constant: breakpoints must be strictly increasing");
  ShearProtocol p;
  p.kind_ = Kind::kPiecewise;
  p.breakpoints_ = std::move(breakpoints);
  p.rates_ = std::move(rates);
  return p;
}

ShearProtocol ShearProtocol::custom(std::function<double(double)> rate) {
  if (!rate) throw std::invalid_argument("custom protocol: empty callable");
  ShearProtocol p;
  p.kind_ = Kind::kCustom;
  p.custom_ = std::move(rate);
  return p;
}

double ShearProtocol::rate(double t) const {
  switch (kind_) {
    case Kind::kZero:
      return 0.0;
    case Kind::kConstant:
      return vx0_;
    case Kind::kPiecewise: {
      auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
      size_t i = it == breakpoints_.begin()
                     ? 0
                     : static_cast<size_t>(it - breakpoints_.begin()) - 1;
      return rates_[i];
    }
    case Kind::kCustom:
      return custom_(t);
  }
  return 0.0;
}

double rhs_case2(double t, double sigma, const SteadyShearParams& p) {
  if (!(p.tau0 > 0.0)) throw std::domain_error("rhs_case2: tau0 must be > 0");
  return p.F0 * std::exp(p.vx0 * t) / p.tau0 *
         (p.vx0 - a_coeff(p.fluid) * detail::spow(sigma, 1.0 / p.fluid.m));
}

namespace {

constexpr int kMaxDim = 2;
using Y = std::array<double, kMaxDim>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// error weights b - bhat
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepperProblem {
  int dim;
  // rhs(t, y, dydt); returns false when the state is inadmissible
  std::function<bool(double, const Y&, Y&)> rhs;
};

struct Recorder {
  std::function<void(double, const Y&, const Y&)> push;
};

// Integrates problem from (t0, y) to t1 recording every accepted node.
// Returns the status; y and t0 are left at the last accepted state.
OdeStatus dopri5_segment(const StepperProblem& pr, double& t, double t1, Y& y,
                         Y& f, const OdeOptions& opts, double span,
                         SolverStats& stats, const Recorder& rec, double& h,
                         bool& want_implicit) {
  const int d = pr.dim;
  const double hmin_floor = 16.0 * std::numeric_limits<double>::epsilon();

  auto scaled_err = [&](const Y& yn, const Y& ynew, const Y& err) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      double sc =
          opts.atol + opts.rtol * std::max(std::abs(yn[i]), std::abs(ynew[i]));
      double q = err[i] / sc;
      s += q * q;
    }
    return std::sqrt(s / d);
  };

  if (h <= 0.0) {
    // modest starting guess from the first derivative scale
    double dy = 0.0, df = 0.0;
    for (int i = 0; i < d; ++i) {
      double sc = opts.atol + opts.rtol * std::abs(y[i]);
      dy += (y[i] / sc) * (y[i] / sc);
      df += (f[i] / sc) * (f[i] / sc);
    }
    dy = std::sqrt(dy / d);
    df = std::sqrt(df / d);
    h = (df > 1e-8 && dy > 1e-8) ? 0.01 * dy / df : 1e-6 * span;
    h = std::min(h, 0.1 * span);
  }

  Y k2, k3, k4, k5, k6, k7, yt, ynew, err;
  bool prev_rejected = false;
  // accepted steps can land a few ulps short of t1; do not mistake the
  // residual sliver for a step-size collapse
  const double t_done =
      t1 - 64.0 * std::numeric_limits<double>::epsilon() *
               std::max(std::abs(t1), span);
  while (t < t_done) {
    if (stats.steps + stats.rejected >= opts.max_steps)
      return OdeStatus::kMaxStepsExceeded;
    h = std::min(h, t1 - t);
    if (h < hmin_floor * std::max(1.0, std::abs(t)))
      return OdeStatus::kStepUnderflow;

    bool ok = true;
    auto stage = [&](double tc, const Y& yc, Y& kc) {
      ++stats.rhs_evals;
      return pr.rhs(tc, yc, kc);
    };
    for (int i = 0; i < d; ++i) yt[i] = y[i] + h * a21 * f[i];
    ok = ok && stage(t + c2 * h, yt, k2);
    for (int i = 0; i < d; ++i) yt[i] = y[i] + h * (a31 * f[i] + a32 * k2[i]);
    ok = ok && stage(t + c3 * h, yt, k3);
    for (int i = 0; i < d; ++i)
      yt[i] = y[i] + h * (a41 * f[i] + a42 * k2[i] + a43 * k3[i]);
    ok = ok && stage(t + c4 * h, yt, k4);
    for (int i = 0; i < d; ++i)
      yt[i] = y[i] + h * (a51 * f[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    ok = ok && stage(t + c5 * h, yt, k5);
    for (int i = 0; i < d; ++i)
      yt[i] = y[i] + h * (a61 * f[i] + a62 * k2[i] + a63 * k3[i] +
                          a64 * k4[i] + a65 * k5[i]);
    ok = ok && stage(t + h, yt, k6);
    for (int i = 0; i < d; ++i)
      ynew[i] = y[i] + h * (b1 * f[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                            b6 * k6[i]);
    ok = ok && stage(t + h, ynew, k7);  // FSAL

    double en;
    if (ok) {
      for (int i = 0; i < d; ++i)
        err[i] = h * (e1 * f[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                      e6 * k6[i] + e7 * k7[i]);
      en = scaled_err(y, ynew, err);
    } else {
      en = 1e10;  // inadmissible stage state: force a retry with smaller h
    }

    if (en <= 1.0) {
      t += h;
      y = ynew;
      f = k7;
      ++stats.steps;
      rec.push(t, y, f);
      double fac = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
      fac = std::clamp(fac, 0.2, prev_rejected ? 1.0 : 5.0);
      prev_rejected = false;
      h *= fac;
      // the startup guess can be far below the stiffness-limited step, so
      // give the controller a few steps to grow before diagnosing
      if (opts.implicit_switch > 0.0 && t < t1 && stats.steps >= 10 &&
          h < opts.implicit_switch * span) {
        want_implicit = true;
        return OdeStatus::kOk;
      }
    } else {
      ++stats.rejected;
      prev_rejected = true;
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.5);
    }
  }
  return OdeStatus::kOk;
}

}  // namespace

double Trajectory::sample_sigma(double t) const {
  if (times.empty()) throw std::runtime_error("empty trajectory");
  if (t <= times.front()) return sigma.front();
  if (t >= times.back()) return sigma.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  size_t i = static_cast<size_t>(it - times.begin()) - 1;
  double h = times[i + 1] - times[i];
  double th = (t - times[i]) / h;
  double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
  double h10 = th * (1 - th) * (1 - th);
  double h01 = th * th * (3 - 2 * th);
  double h11 = th * th * (th - 1);
  return h00 * sigma[i] + h10 * h * sigma_dot[i] + h01 * sigma[i + 1] +
         h11 * h * sigma_dot[i + 1];
}

double Trajectory::sample_F(double t) const {
  if (times.empty()) throw std::runtime_error("empty trajectory");
  if (t <= times.front()) return F.front();
  if (t >= times.back()) return F.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  size_t i = static_cast<size_t>(it - times.begin()) - 1;
  double h = times[i + 1] - times[i];
  double th = (t - times[i]) / h;
  double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
  double h10 = th * (1 - th) * (1 - th);
  double h01 = th * th * (3 - 2 * th);
  double h11 = th * th * (th - 1);
  return h00 * F[i] + h10 * h * F_dot[i] + h01 * F[i + 1] +
         h11 * h * F_dot[i + 1];
}

Trajectory simulate_homogeneous(const Material& material,
                                const ShearProtocol& protocol, double sigma0,
                                double F0, const OdeOptions& opts) {
  material.validate();
  if (!(F0 > 0.0))
    throw std::domain_error("simulate_homogeneous: F0 must be positive");
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0))
    throw std::domain_error("simulate_homogeneous: tolerances must be > 0");
  if (!(opts.t_end >= 0.0))
    throw std::domain_error("simulate_homogeneous: t_end must be >= 0");

  const bool exp_F = protocol.exponential_deformation();
  const double vx0 = protocol.constant_value();
  const double a = a_coeff(material.fluid);
  const double inv_m = 1.0 / material.fluid.m;

  auto deformation = [&](double t) {
    return exp_F ? F0 * std::exp(vx0 * t) : 0.0;
  };

  Trajectory traj;
  traj.rtol = opts.rtol;
  traj.atol = opts.atol;

  // Stage times can land exactly on a segment's right endpoint, where a
  // piecewise protocol already reports the next rate; clamping keeps every
  // evaluation inside the current segment.
  double rate_cap = opts.t_end;
  auto rate_at = [&](double t) { return protocol.rate(std::min(t, rate_cap)); };

  StepperProblem pr;
  pr.dim = exp_F ? 1 : 2;
  pr.rhs = [&](double t, const Y& y, Y& dydt) -> bool {
    double Fv = exp_F ? deformation(t) : y[1];
    if (!(Fv > 0.0)) return false;
    double s = stress_from_z(y[0], material.viscous, material.rho_star);
    double r = rate_at(t);
    dydt[0] = Fv * (r - a * detail::spow(s, inv_m));
    if (!exp_F) dydt[1] = r * Fv;
    return true;
  };

  auto record = [&](double t, const Y& y, const Y& f) {
    double s = stress_from_z(y[0], material.viscous, material.rho_star);
    double Fv = exp_F ? deformation(t) : y[1];
    traj.times.push_back(t);
    traj.sigma.push_back(s);
    traj.F.push_back(Fv);
    // sigma_t = Z_t / tau(sigma)
    traj.sigma_dot.push_back(f[0] / tau(s, material.viscous, material.rho_star));
    traj.F_dot.push_back(exp_F ? vx0 * Fv : f[1]);
  };

  Y y{z_from_stress(sigma0, material.viscous, material.rho_star),
      exp_F ? 0.0 : F0};
  Y f{};
  pr.rhs(0.0, y, f);
  ++traj.stats.rhs_evals;
  record(0.0, y, f);
  if (opts.t_end == 0.0) return traj;

  // segment boundaries at protocol breakpoints keep the stepper smooth
  std::vector<double> cuts{0.0};
  for (double b : protocol.breakpoints())
    if (b > 0.0 && b < opts.t_end) cuts.push_back(b);
  cuts.push_back(opts.t_end);

  double t = 0.0;
  double h = opts.initial_step;
  bool want_implicit = false;
  Recorder rec{record};
  for (size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    double t1 = cuts[seg + 1];
    rate_cap = std::nextafter(t1, cuts[seg]);
    if (!want_implicit) {
      pr.rhs(t, y, f);  // refresh derivative at segment start
      ++traj.stats.rhs_evals;
      auto st = dopri5_segment(pr, t, t1, y, f, opts, opts.t_end,
                               traj.stats, rec, h, want_implicit);
      if (st != OdeStatus::kOk) {
        traj.status = st;
        return traj;
      }
    }
    if (want_implicit) {
      // backward-Euler terminal phase, step-doubling error control
      auto be_step = [&](double tn, const Y& yo, double hs, Y& yn) -> bool {
        double r = rate_at(tn);
        double Fn;
        if (exp_F) {
          Fn = deformation(tn);
        } else {
          double den = 1.0 - hs * r;
          if (!(den > 0.0)) return false;
          Fn = yo[1] / den;
        }
        if (!(Fn > 0.0)) return false;
        double target = yo[0] + hs * Fn * r;
        double s = detail::solve_sigma_implicit(target, hs * Fn, material);
        yn[0] = z_from_stress(s, material.viscous, material.rho_star);
        if (!exp_F) yn[1] = Fn;
        return true;
      };
      double hb = std::max(h, 1e-12 * opts.t_end);
      const double t_done =
          t1 - 64.0 * std::numeric_limits<double>::epsilon() *
                   std::max(std::abs(t1), opts.t_end);
      while (t < t_done) {
        if (traj.stats.steps + traj.stats.rejected >= opts.max_steps) {
          traj.status = OdeStatus::kMaxStepsExceeded;
          return traj;
        }
        hb = std::min(hb, t1 - t);
        if (hb < 16.0 * std::numeric_limits<double>::epsilon() *
                     std::max(1.0, std::abs(t))) {
          traj.status = OdeStatus::kStepUnderflow;
          return traj;
        }
        Y y1{}, ya{}, y2{};
        bool ok = be_step(t + hb, y, hb, y1) &&
                  be_step(t + 0.5 * hb, y, 0.5 * hb, ya) &&
                  be_step(t + hb, ya, 0.5 * hb, y2);
        double en = 1e10;
        if (ok) {
          en = 0.0;
          for (int i = 0; i < pr.dim; ++i) {
            double sc = opts.atol +
                        opts.rtol * std::max(std::abs(y[i]), std::abs(y2[i]));
            double q = (y1[i] - y2[i]) / sc;
            en += q * q;
          }
          en = std::sqrt(en / pr.dim);
        }
        if (en <= 1.0) {
          t += hb;
          y = y2;
          pr.rhs(t, y, f);
          ++traj.stats.rhs_evals;
          ++traj.stats.steps;
          ++traj.stats.implicit_steps;
          record(t, y, f);
          hb *= std::clamp(en > 0.0 ? 0.9 / std::sqrt(en) : 4.0, 0.2, 4.0);
        } else {
          ++traj.stats.rejected;
          hb *= std::clamp(en < 1e9 ? 0.9 / std::sqrt(en) : 0.25, 0.1, 0.5);
        }
      }
      h = hb;
    }
  }
  return traj;
}

Trajectory simulate_linear_relaxation(double sigma_inf, double tau1,
                                      double sigma0, const OdeOptions& opts) {
  if (!(tau1 > 0.0))
    throw std::domain_error("simulate_linear_relaxation: tau1 must be > 0");
  Trajectory traj;
  traj.rtol = opts.rtol;
  traj.atol = opts.atol;

  StepperProblem pr;
  pr.dim = 1;
  pr.rhs = [&](double, const Y& y, Y& dydt) -> bool {
    dydt[0] = (sigma_inf - y[0]) / tau1;
    return true;
  };
  auto record = [&](double t, const Y& y, const Y& f) {
    traj.times.push_back(t);
    traj.sigma.push_back(y[0]);
    traj.F.push_back(1.0);
    traj.sigma_dot.push_back(f[0]);
    traj.F_dot.push_back(0.0);
  };

  Y y{sigma0, 0.0}, f{};
  pr.rhs(0.0, y, f);
  ++traj.stats.rhs_evals;
  record(0.0, y, f);
  if (opts.t_end == 0.0) return traj;

  double t = 0.0, h = opts.initial_step;
  bool unused = false;
  OdeOptions o = opts;
  o.implicit_switch = 0.0;  // linear problem, no stiff phase needed
  Recorder rec{record};
  traj.status = dopri5_segment(pr, t, opts.t_end, y, f, o, opts.t_end,
                               traj.stats, rec, h, unused);
  return traj;
}

std::vector<double> superexp_ratios(const Trajectory& traj, double sigma_inf,
                                    int n_samples) {
  if (traj.times.size() < 2 || n_samples < 2) return {};
  const double t0 = traj.times.front(), t1 = traj.times.back();
  const double dt = (t1 - t0) / n_samples;
  const double floor = 100.0 * std::max(traj.atol, 1e-300);
  std::vector<double> ratios;
  for (int i = 0; i < n_samples; ++i) {
    double r0 = sigma_inf - traj.sample_sigma(t0 + i * dt);
    double r1 = sigma_inf - traj.sample_sigma(t0 + (i + 1) * dt);
    if (std::abs(r0) < floor || std::abs(r1) < floor) break;
    ratios.push_back(r1 / r0);
  }
  return ratios;
}

}  // namespace retflow
