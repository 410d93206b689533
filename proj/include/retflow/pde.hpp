#ifndef RETFLOW_PDE_HPP
#define RETFLOW_PDE_HPP

#include <array>
#include <functional>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "retflow/constitutive.hpp"

namespace retflow {

/// Uniform grid in the material (Lagrangian) coordinate X.
struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  int n_cells = 2;

  Grid1D() = default;
  Grid1D(double xmin, double xmax, int n);
  double dx() const { return (x_max - x_min) / n_cells; }
  double center(int i) const { return x_min + (i + 0.5) * dx(); }
};

/// Conserved cell state: momentum density rho* v, deformation gradient F,
/// and the conserved stress variable Z(sigma).
struct Conserved {
  double mom = 0.0;
  double F = 1.0;
  double z = 0.0;
};

/// Primitive point state.
struct State1D {
  double v = 0.0;
  double F = 1.0;
  double sigma = 0.0;
};

struct Periodic {};
struct Transmissive {};
/// Prescribed wall velocities; ghost cells reflect F and sigma and mirror
/// the velocity about the wall value.
struct PistonBC {
  std::function<double(double)> v_left;
  std::function<double(double)> v_right;
};

using BoundaryCondition = std::variant<Periodic, Transmissive, PistonBC>;

struct Field1D {
  Grid1D grid;
  std::vector<Conserved> cells;
  double time = 0.0;
  Material material;
  BoundaryCondition bc = Periodic{};
};

State1D primitives(const Conserved& c, const Material& mat);
Conserved conserved(const State1D& s, const Material& mat);

/// Flux f(w) = (p(F) - sigma, -v, -v), so each balance reads
/// w_t + f(w)_X = s(w).
std::array<double, 3> physical_flux(const State1D& s, const Material& mat);

/// Characteristic speed c = sqrt((-p'(F) + 1/tau(sigma)) / rho*).
double char_speed(const State1D& s, const Material& mat);

/// The full spectrum (-c, 0, +c) of the quasi-linear system.
std::array<double, 3> char_speeds(const State1D& s, const Material& mat);

/// Local Lax-Friedrichs (Rusanov) interface flux.
std::array<double, 3> rusanov_flux(const State1D& left, const State1D& right,
                                   const Material& mat);

enum class StepMode { kExplicit, kImex };

struct StepInfo {
  double dt = 0.0;
  double max_speed = 0.0;
  long index = 0;
};

/// One SSP-RK2 step at the CFL-limited time step (optionally capped).
/// kExplicit treats flux and production explicitly; kImex keeps the SSP-RK2
/// flux treatment but solves the stiff production implicitly per cell
/// (scalar safeguarded Newton on sigma through Z).
Field1D step(const Field1D& field, double cfl, StepMode mode,
             double dt_cap = 0.0, StepInfo* info = nullptr);

/// Observer hooks invoked by run(); on_step fires after every accepted step.
class Observer {
 public:
  virtual ~Observer() = default;
  virtual void on_start(const Field1D&) {}
  virtual void on_step(const Field1D&, const StepInfo&) {}
};

/// Advances the field to t_end, truncating the final step to land exactly.
Field1D run(Field1D field, double t_end, double cfl, StepMode mode,
            std::span<Observer* const> observers = {});

/// Snapshot columns: X_center, v, F, sigma, Z, p, energy_density (17
/// significant digits, header mandatory).
void write_field_csv(std::ostream& os, const Field1D& field);

}  // namespace retflow

#endif
