#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <variant>

#include "retflow/analytic.hpp"
#include "retflow/constitutive.hpp"
#include "retflow/ode.hpp"
#include "retflow/pde.hpp"
#include "retflow/scenario.hpp"

namespace py = pybind11;
using namespace retflow;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

ShearProtocol make_protocol(const py::object& rate) {
  if (rate.is_none()) return ShearProtocol::zero_rate();
  if (py::isinstance<py::float_>(rate) || py::isinstance<py::int_>(rate))
    return ShearProtocol::constant_rate(rate.cast<double>());
  auto fn = rate.cast<std::function<double(double)>>();
  return ShearProtocol::custom(std::move(fn));
}

const char* status_name(OdeStatus s) {
  switch (s) {
    case OdeStatus::kOk: return "ok";
    case OdeStatus::kStepUnderflow: return "step_underflow";
    case OdeStatus::kMaxStepsExceeded: return "max_steps_exceeded";
  }
  return "?";
}

}  // namespace

PYBIND11_MODULE(_retflow, m) {
  m.doc() = "One-dimensional viscoelastic balance-law model with power-law "
            "rheology and finite relaxation time";

  py::class_<PowerLawFluid>(m, "PowerLawFluid")
      .def(py::init<double, double>(), py::arg("k"), py::arg("m"))
      .def_readonly("k", &PowerLawFluid::k)
      .def_readonly("m", &PowerLawFluid::m)
      .def("__repr__", [](const PowerLawFluid& f) {
        return "PowerLawFluid(k=" + std::to_string(f.k) +
               ", m=" + std::to_string(f.m) + ")";
      });

  py::class_<LinearElastic>(m, "LinearElastic")
      .def(py::init<double>(), py::arg("modulus"))
      .def_readonly("modulus", &LinearElastic::modulus);

  py::class_<PowerGas>(m, "PowerGas")
      .def(py::init<double, double>(), py::arg("p0") = 1.0,
           py::arg("gamma") = 1.0)
      .def_readonly("p0", &PowerGas::p0)
      .def_readonly("gamma", &PowerGas::gamma);

  py::class_<Material>(m, "Material")
      .def(py::init([](double rho_star, const py::object& elastic, double tau0,
                       const PowerLawFluid& fluid, double body_force) {
             Material mat;
             mat.rho_star = rho_star;
             if (py::isinstance<LinearElastic>(elastic))
               mat.elastic = elastic.cast<LinearElastic>();
             else
               mat.elastic = elastic.cast<PowerGas>();
             mat.viscous = QuadraticViscous{tau0};
             mat.fluid = fluid;
             mat.body_force = body_force;
             mat.validate();
             return mat;
           }),
           py::arg("rho_star") = 1.0,
           py::arg("elastic") = py::cast(PowerGas{1.0, 1.0}),
           py::arg("tau0") = 0.1,
           py::arg("fluid") = PowerLawFluid(1.0, 1.0),
           py::arg("body_force") = 0.0)
      .def_readonly("rho_star", &Material::rho_star)
      .def_readonly("fluid", &Material::fluid)
      .def_property_readonly("tau0", [](const Material& mat) {
        return std::get<QuadraticViscous>(mat.viscous).tau0;
      });

  // pointwise constitutive functions
  m.def("a_coeff", py::overload_cast<double, double>(&a_coeff), py::arg("m"),
        py::arg("k"), "2^(1/m - 1) k^(-1/m)");
  m.def("rate_from_stress", &rate_from_stress, py::arg("sigma"),
        py::arg("fluid"));
  m.def("stress_from_rate", &stress_from_rate, py::arg("vx"),
        py::arg("fluid"));
  m.def("production", &production, py::arg("F"), py::arg("sigma"),
        py::arg("fluid"));
  m.def("dissipation_rate", &dissipation_rate, py::arg("F"), py::arg("sigma"),
        py::arg("fluid"));
  m.def(
      "tau",
      [](double sigma, const Material& mat) {
        return tau(sigma, mat.viscous, mat.rho_star);
      },
      py::arg("sigma"), py::arg("material"));
  m.def(
      "z_from_stress",
      [](double sigma, const Material& mat) {
        return z_from_stress(sigma, mat.viscous, mat.rho_star);
      },
      py::arg("sigma"), py::arg("material"));
  m.def(
      "stress_from_z",
      [](double z, const Material& mat) {
        return stress_from_z(z, mat.viscous, mat.rho_star);
      },
      py::arg("z"), py::arg("material"));
  m.def(
      "pressure",
      [](double F, const Material& mat) { return pressure(F, mat.elastic); },
      py::arg("F"), py::arg("material"));
  m.def(
      "dpressure_dF",
      [](double F, const Material& mat) {
        return dpressure_dF(F, mat.elastic);
      },
      py::arg("F"), py::arg("material"));
  m.def(
      "elastic_energy",
      [](double F, const Material& mat) {
        return elastic_energy(F, mat.elastic, mat.rho_star);
      },
      py::arg("F"), py::arg("material"));
  m.def(
      "viscous_energy",
      [](double sigma, const Material& mat) {
        return viscous_energy(sigma, mat.viscous, mat.rho_star);
      },
      py::arg("sigma"), py::arg("material"));

  // closed-form relaxation solutions
  m.def(
      "case1_solution",
      [](double m_, double k, double sigma0, double tbar) {
        return case1_solution({PowerLawFluid(k, m_), sigma0}, tbar);
      },
      py::arg("m"), py::arg("k"), py::arg("sigma0"), py::arg("tbar"));
  m.def(
      "extinction_time",
      [](double m_, double k, double sigma0) {
        return extinction_time({PowerLawFluid(k, m_), sigma0});
      },
      py::arg("m"), py::arg("k"), py::arg("sigma0"));
  m.def(
      "steady_sigma",
      [](double vx0, const PowerLawFluid& fluid) {
        return steady_sigma({vx0, 1.0, 0.1, fluid});
      },
      py::arg("vx0"), py::arg("fluid"));
  m.def("maxwell_comparator", &maxwell_comparator, py::arg("t"),
        py::arg("sigma_inf"), py::arg("tau1"));

  // homogeneous integration
  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly(
          "times", [](const Trajectory& t) { return to_array(t.times); })
      .def_property_readonly(
          "sigma", [](const Trajectory& t) { return to_array(t.sigma); })
      .def_property_readonly("F",
                             [](const Trajectory& t) { return to_array(t.F); })
      .def_property_readonly(
          "status", [](const Trajectory& t) { return status_name(t.status); })
      .def_property_readonly("stats",
                             [](const Trajectory& t) {
                               py::dict d;
                               d["steps"] = t.stats.steps;
                               d["rejected"] = t.stats.rejected;
                               d["rhs_evals"] = t.stats.rhs_evals;
                               d["implicit_steps"] = t.stats.implicit_steps;
                               return d;
                             })
      .def("sample_sigma", &Trajectory::sample_sigma, py::arg("t"))
      .def("sample_F", &Trajectory::sample_F, py::arg("t"));

  m.def(
      "simulate_homogeneous",
      [](const Material& mat, const py::object& rate, double sigma0, double F0,
         double t_end, double rtol, double atol, long max_steps) {
        OdeOptions opts;
        opts.rtol = rtol;
        opts.atol = atol;
        opts.max_steps = max_steps;
        opts.t_end = t_end;
        return simulate_homogeneous(mat, make_protocol(rate), sigma0, F0,
                                    opts);
      },
      py::arg("material"), py::arg("rate"), py::arg("sigma0") = 0.0,
      py::arg("F0") = 1.0, py::arg("t_end") = 1.0, py::arg("rtol") = 1e-8,
      py::arg("atol") = 1e-10, py::arg("max_steps") = 2'000'000,
      "Integrates the homogeneous stress balance. `rate` is a constant "
      "spatial velocity gradient, None for rest, or a callable t -> rate.");

  m.def(
      "superexp_ratios",
      [](const Trajectory& traj, double sigma_inf, int n) {
        return to_array(superexp_ratios(traj, sigma_inf, n));
      },
      py::arg("trajectory"), py::arg("sigma_inf"), py::arg("n_samples") = 32);

  m.def(
      "char_speeds",
      [](double v, double F, double sigma, const Material& mat) {
        auto s = char_speeds({v, F, sigma}, mat);
        return py::make_tuple(s[0], s[1], s[2]);
      },
      py::arg("v"), py::arg("F"), py::arg("sigma"), py::arg("material"));

  // scenario front end
  m.def("run_scenario", &run_scenario_file, py::arg("config"),
        py::arg("out_dir") = ".", py::arg("quiet") = true,
        py::arg("sweep_workers") = 0,
        "Runs a scenario config; returns the CLI exit code (0/2/3).");
}
