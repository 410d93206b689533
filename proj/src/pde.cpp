#include "retflow/pde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace retflow {

Grid1D::Grid1D(double xmin, double xmax, int n)
    : x_min(xmin), x_max(xmax), n_cells(n) {
  if (!(x_max > x_min) || n_cells < 2)
    throw std::invalid_argument("Grid1D: need x_max > x_min and n_cells >= 2");
}

State1D primitives(const Conserved& c, const Material& mat) {
  return {c.mom / mat.rho_star, c.F,
          stress_from_z(c.z, mat.viscous, mat.rho_star)};
}

Conserved conserved(const State1D& s, const Material& mat) {
  return {mat.rho_star * s.v, s.F,
          z_from_stress(s.sigma, mat.viscous, mat.rho_star)};
}

std::array<double, 3> physical_flux(const State1D& s, const Material& mat) {
  return {pressure(s.F, mat.elastic) - s.sigma, -s.v, -s.v};
}

double char_speed(const State1D& s, const Material& mat) {
  double radicand = (-dpressure_dF(s.F, mat.elastic) +
                     1.0 / tau(s.sigma, mat.viscous, mat.rho_star)) /
                    mat.rho_star;
  if (!(radicand > 0.0))
    throw std::domain_error("char_speed: nonpositive radicand");
  return std::sqrt(radicand);
}

std::array<double, 3> char_speeds(const State1D& s, const Material& mat) {
  double c = char_speed(s, mat);
  return {-c, 0.0, c};
}

std::array<double, 3> rusanov_flux(const State1D& left, const State1D& right,
                                   const Material& mat) {
  auto fl = physical_flux(left, mat);
  auto fr = physical_flux(right, mat);
  auto wl = conserved(left, mat);
  auto wr = conserved(right, mat);
  double s = std::max(char_speed(left, mat), char_speed(right, mat));
  return {0.5 * (fl[0] + fr[0]) - 0.5 * s * (wr.mom - wl.mom),
          0.5 * (fl[1] + fr[1]) - 0.5 * s * (wr.F - wl.F),
          0.5 * (fl[2] + fr[2]) - 0.5 * s * (wr.z - wl.z)};
}

namespace {

std::vector<State1D> all_primitives(const Field1D& f) {
  std::vector<State1D> p(f.cells.size());
  for (size_t i = 0; i < f.cells.size(); ++i)
    p[i] = primitives(f.cells[i], f.material);
  return p;
}

State1D ghost_left(const std::vector<State1D>& p, const BoundaryCondition& bc,
                   double t) {
  if (std::holds_alternative<Periodic>(bc)) return p.back();
  if (std::holds_alternative<Transmissive>(bc)) return p.front();
  const auto& piston = std::get<PistonBC>(bc);
  double vw = piston.v_left ? piston.v_left(t) : 0.0;
  return {2.0 * vw - p.front().v, p.front().F, p.front().sigma};
}

State1D ghost_right(const std::vector<State1D>& p, const BoundaryCondition& bc,
                    double t) {
  if (std::holds_alternative<Periodic>(bc)) return p.front();
  if (std::holds_alternative<Transmissive>(bc)) return p.back();
  const auto& piston = std::get<PistonBC>(bc);
  double vw = piston.v_right ? piston.v_right(t) : 0.0;
  return {2.0 * vw - p.back().v, p.back().F, p.back().sigma};
}

// -(f_{i+1/2} - f_{i-1/2}) / dx for every cell, plus the body force.
std::vector<std::array<double, 3>> explicit_rhs(
    const std::vector<State1D>& prims, const Field1D& f, double t) {
  const size_t n = prims.size();
  const double dx = f.grid.dx();
  const Material& mat = f.material;
  std::vector<std::array<double, 3>> fluxes(n + 1);
  State1D gl = ghost_left(prims, f.bc, t);
  State1D gr = ghost_right(prims, f.bc, t);
  fluxes[0] = rusanov_flux(gl, prims[0], mat);
  for (size_t i = 1; i < n; ++i)
    fluxes[i] = rusanov_flux(prims[i - 1], prims[i], mat);
  fluxes[n] = rusanov_flux(prims[n - 1], gr, mat);

  std::vector<std::array<double, 3>> rhs(n);
  const double bf = mat.rho_star * mat.body_force;
  for (size_t i = 0; i < n; ++i) {
    rhs[i] = {-(fluxes[i + 1][0] - fluxes[i][0]) / dx + bf,
              -(fluxes[i + 1][1] - fluxes[i][1]) / dx,
              -(fluxes[i + 1][2] - fluxes[i][2]) / dx};
  }
  return rhs;
}

double max_char_speed(const std::vector<State1D>& prims, const Material& mat) {
  double s = 0.0;
  for (const auto& p : prims) s = std::max(s, char_speed(p, mat));
  return s;
}

// Solves Z(sigma) = z_pre + dt_gamma * P(F, sigma) per cell; reports the
// offending cell on failure.
double implicit_sigma(double z_pre, double dt_gamma, double F, size_t cell,
                      const Material& mat) {
  try {
    return detail::solve_sigma_implicit(z_pre, dt_gamma * F, mat);
  } catch (const std::exception& e) {
    throw std::runtime_error("IMEX production solve failed at cell " +
                             std::to_string(cell) + ": " + e.what());
  }
}

}  // namespace

Field1D step(const Field1D& field, double cfl, StepMode mode, double dt_cap,
             StepInfo* info) {
  if (!(cfl > 0.0) || cfl > 1.0)
    throw std::invalid_argument("step: cfl must lie in (0, 1]");
  const size_t n = field.cells.size();
  if (n < 2) throw std::invalid_argument("step: field has no cells");
  const Material& mat = field.material;
  const double dx = field.grid.dx();

  auto prims = all_primitives(field);
  const double smax = max_char_speed(prims, mat);
  double dt = cfl * dx / smax;
  if (dt_cap > 0.0) dt = std::min(dt, dt_cap);
  if (info) *info = {dt, smax, info->index};

  Field1D out = field;
  const double t = field.time;

  if (mode == StepMode::kExplicit) {
    auto add_production = [&](std::vector<std::array<double, 3>>& rhs,
                              const std::vector<State1D>& p) {
      for (size_t i = 0; i < n; ++i)
        rhs[i][2] += production(p[i].F, p[i].sigma, mat.fluid);
    };
    auto rhs1 = explicit_rhs(prims, field, t);
    add_production(rhs1, prims);
    Field1D mid = field;
    for (size_t i = 0; i < n; ++i) {
      mid.cells[i].mom += dt * rhs1[i][0];
      mid.cells[i].F += dt * rhs1[i][1];
      mid.cells[i].z += dt * rhs1[i][2];
    }
    mid.time = t + dt;
    auto prims_mid = all_primitives(mid);
    auto rhs2 = explicit_rhs(prims_mid, mid, t + dt);
    add_production(rhs2, prims_mid);
    for (size_t i = 0; i < n; ++i) {
      out.cells[i].mom =
          0.5 * (field.cells[i].mom + mid.cells[i].mom + dt * rhs2[i][0]);
      out.cells[i].F =
          0.5 * (field.cells[i].F + mid.cells[i].F + dt * rhs2[i][1]);
      out.cells[i].z =
          0.5 * (field.cells[i].z + mid.cells[i].z + dt * rhs2[i][2]);
    }
  } else {
    // IMEX SSP2(2,2,2), gamma = 1 - 1/sqrt(2): explicit SSP-RK2 on the
    // flux, L-stable DIRK on the production term.
    const double gamma = 1.0 - 1.0 / std::sqrt(2.0);

    // stage 1: w1 = w^n + dt*gamma*S(w1); only Z is touched
    std::vector<double> s1(n);
    Field1D u1 = field;
    for (size_t i = 0; i < n; ++i) {
      double sg =
          implicit_sigma(field.cells[i].z, dt * gamma, field.cells[i].F, i, mat);
      u1.cells[i].z = z_from_stress(sg, mat.viscous, mat.rho_star);
      s1[i] = production(field.cells[i].F, sg, mat.fluid);
    }
    auto prims1 = all_primitives(u1);
    auto e1 = explicit_rhs(prims1, u1, t);

    // stage 2: w2 = w^n + dt*E1 + dt*(1-2g)*S1 + dt*g*S(w2)
    std::vector<double> s2(n);
    Field1D u2 = field;
    for (size_t i = 0; i < n; ++i) {
      u2.cells[i].mom = field.cells[i].mom + dt * e1[i][0];
      u2.cells[i].F = field.cells[i].F + dt * e1[i][1];
      double zpre =
          field.cells[i].z + dt * e1[i][2] + dt * (1.0 - 2.0 * gamma) * s1[i];
      double sg = implicit_sigma(zpre, dt * gamma, u2.cells[i].F, i, mat);
      u2.cells[i].z = z_from_stress(sg, mat.viscous, mat.rho_star);
      s2[i] = production(u2.cells[i].F, sg, mat.fluid);
    }
    u2.time = t + dt;
    auto prims2 = all_primitives(u2);
    auto e2 = explicit_rhs(prims2, u2, t + dt);

    for (size_t i = 0; i < n; ++i) {
      out.cells[i].mom =
          field.cells[i].mom + 0.5 * dt * (e1[i][0] + e2[i][0]);
      out.cells[i].F = field.cells[i].F + 0.5 * dt * (e1[i][1] + e2[i][1]);
      out.cells[i].z = field.cells[i].z + 0.5 * dt * (e1[i][2] + e2[i][2]) +
                       0.5 * dt * (s1[i] + s2[i]);
    }
  }
  out.time = t + dt;
  return out;
}

Field1D run(Field1D field, double t_end, double cfl, StepMode mode,
            std::span<Observer* const> observers) {
  if (!(t_end >= field.time))
    throw std::invalid_argument("run: t_end precedes field time");
  for (auto* o : observers) o->on_start(field);
  const double tiny = 1e-12 * std::max(1.0, std::abs(t_end));
  StepInfo info;
  while (field.time < t_end - tiny) {
    info.index += 1;
    field = step(field, cfl, mode, t_end - field.time, &info);
    for (auto* o : observers) o->on_step(field, info);
  }
  return field;
}

void write_field_csv(std::ostream& os, const Field1D& field) {
  const Material& mat = field.material;
  os << "X_center,v,F,sigma,Z,p,energy_density\n";
  char buf[512];
  for (size_t i = 0; i < field.cells.size(); ++i) {
    State1D s = primitives(field.cells[i], mat);
    double energy =
        mat.rho_star * (0.5 * s.v * s.v +
                        elastic_energy_rel(s.F, mat.elastic, mat.rho_star) +
                        viscous_energy(s.sigma, mat.viscous, mat.rho_star));
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  field.grid.center(static_cast<int>(i)), s.v, s.F, s.sigma,
                  field.cells[i].z, pressure(s.F, mat.elastic), energy);
    os << buf;
  }
}

}  // namespace retflow
