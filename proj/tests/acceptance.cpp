// Acceptance suite: one self-contained check per criterion, one PASS/FAIL
// line each, nonzero exit when anything fails.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "retflow/analytic.hpp"
#include "retflow/diagnostics.hpp"
#include "retflow/ode.hpp"
#include "retflow/pde.hpp"
#include "retflow/scenario.hpp"

#ifdef RETFLOW_HAVE_EIGEN
#include <Eigen/Eigenvalues>
#endif

namespace fs = std::filesystem;
using namespace retflow;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok,
            const std::string& detail) {
  std::printf("[%s] %2d %s — %s\n", ok ? "PASS" : "FAIL", id, name.c_str(),
              detail.c_str());
  if (!ok) ++failures;
}

double kconv(double m) { return 10.0 * std::exp(-2.0 * m); }

Material material(double tau0, double m) {
  Material mat;
  mat.elastic = PowerGas{1.0, 1.0};
  mat.viscous = QuadraticViscous{tau0};
  mat.fluid = PowerLawFluid(kconv(m), m);
  return mat;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// --- 1: closed-form regime shapes at k = 10 exp(-2m), sigma0 = 1 ----------

void criterion1() {
  bool ok = true;
  std::string detail;

  // m = 0.7: algebraic decay, sigma * tbar^(7/3) -> positive constant
  Case1Params p7{PowerLawFluid(kconv(0.7), 0.7), 1.0};
  double expo = 0.7 / 0.3;
  double limit = std::pow(a_coeff(p7.fluid) * 0.3 / 0.7, -expo);
  double at = case1_solution(p7, 1e3) * std::pow(1e3, expo);
  double rel = std::abs(at - limit) / limit;
  ok &= rel < 0.05 && limit > 0.0;
  detail += fmt("tail dev %.2e (tol 5e-2)", rel);

  // m = 1: exact exponential sigma0 exp(-tbar/k)
  double k1 = kconv(1.0);
  Case1Params p1{PowerLawFluid(k1, 1.0), 1.0};
  double worst = 0.0;
  for (int i = 0; i <= 500; ++i) {
    double tb = 5.0 * i / 500.0;
    double exact = std::exp(-tb / k1);
    worst = std::max(worst,
                     std::abs(case1_solution(p1, tb) - exact) / exact);
  }
  ok &= worst <= 1e-12;
  detail += fmt("; maxwell rel %.2e (tol 1e-12)", worst);

  // m = 2: extinction at tbar_c, exactly zero afterwards
  Case1Params p2{PowerLawFluid(kconv(2.0), 2.0), 1.0};
  double tc = extinction_time(p2);
  bool zero_after = case1_solution(p2, tc) == 0.0 &&
                    case1_solution(p2, tc + 1e-6) == 0.0 &&
                    case1_solution(p2, 5.0) == 0.0 &&
                    case1_solution(p2, 0.999 * tc) > 0.0;
  ok &= zero_after && std::abs(tc - 1.21048) < 1e-5;
  detail += fmt("; tbar_c %.6f (ref 1.21048)", tc);

  report(1, "figure-1 regime shapes", ok, detail);
}

// --- 2: closed form vs adaptive RK oracle ----------------------------------

void criterion2() {
  double worst = 0.0;
  bool ok = true;
  for (double m : {0.3, 0.7, 1.0, 1.5, 2.0}) {
    Case1Params p{PowerLawFluid(kconv(m), m), 1.0};
    double horizon = 5.0;
    if (m > 1.0) horizon = std::min(horizon, 0.95 * extinction_time(p));
    Material mat = material(1.0, m);
    OdeOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-12;
    opts.t_end = horizon;
    Trajectory traj =
        simulate_homogeneous(mat, ShearProtocol::zero_rate(), 1.0, 1.0, opts);
    ok &= traj.status == OdeStatus::kOk;
    for (int i = 0; i <= 100; ++i) {
      double tb = horizon * i / 100.0;
      double exact = case1_solution(p, tb);
      double num = traj.sample_sigma(tb);
      worst = std::max(worst,
                       std::abs(num - exact) / std::max(std::abs(exact), 1e-8));
    }
  }
  ok &= worst <= 1e-6;
  report(2, "closed form vs RK oracle", ok,
         fmt("max rel dev %.2e (tol 1e-6), m in {0.3,0.7,1,1.5,2}", worst));
}

// --- 3: figure-2 steady state and decay-ratio shapes -----------------------

void criterion3() {
  Material mat = material(0.1, 0.7);
  OdeOptions opts;
  opts.rtol = 1e-10;
  opts.atol = 1e-12;
  opts.t_end = 6.0;
  Trajectory traj = simulate_homogeneous(
      mat, ShearProtocol::constant_rate(0.1), 0.0, 1.0, opts);
  double terminal = traj.sigma.back();
  bool ok = traj.status == OdeStatus::kOk;
  ok &= std::abs(terminal - 0.39963) < 1e-4;

  // linear comparator integrated numerically matches its closed form
  OdeOptions tight;
  tight.rtol = 1e-12;
  tight.atol = 1e-14;
  tight.t_end = 1.0;
  double sinf = steady_sigma({0.1, 1.0, 0.1, mat.fluid});
  Trajectory lin = simulate_linear_relaxation(sinf, 0.1, 0.0, tight);
  double lin_dev = 0.0;
  for (size_t i = 0; i < lin.times.size(); ++i)
    lin_dev = std::max(lin_dev,
                       std::abs(lin.sigma[i] -
                                maxwell_comparator(lin.times[i], sinf, 0.1)));
  ok &= lin_dev <= 1e-12;

  // ratio sequences: strictly decreasing vs constant
  OdeOptions ratio_opts = opts;
  ratio_opts.t_end = 1.0;
  Trajectory nl = simulate_homogeneous(
      mat, ShearProtocol::constant_rate(0.1), 0.0, 1.0, ratio_opts);
  auto rn = superexp_ratios(nl, sinf, 10);
  bool decreasing = rn.size() >= 5;
  for (size_t i = 1; i < rn.size(); ++i) decreasing &= rn[i] < rn[i - 1];
  auto rl = superexp_ratios(lin, sinf, 10);
  bool constant = rl.size() >= 5;
  double exact_ratio = std::exp(-0.1 / 0.1);
  for (double r : rl)
    constant &= std::abs(r - exact_ratio) <= 1e-6 * exact_ratio;
  ok &= decreasing && constant;

  report(3, "figure-2 steady state + superexponential ratios", ok,
         fmt("sigma(6) dev %.2e (tol 1e-4); comparator dev %.2e; ",
             std::abs(terminal - 0.39963), lin_dev) +
             (decreasing ? "ratios strictly decreasing" : "RATIOS NOT DECREASING") +
             (constant ? ", comparator constant" : ", COMPARATOR NOT CONSTANT"));
}

// --- 4: constitutive round trip --------------------------------------------

void criterion4() {
  double worst = 0.0;
  const std::vector<double> sigmas{-1e3, -31.62, -1.0, -0.0316, -1e-3, 0.0,
                                   1e-3, 0.0316, 1.0,  31.62,   1e3};
  for (double m : {0.3, 0.7, 1.0, 1.5, 2.0, 4.0})
    for (double k : {1e-2, 1.0, 1e2}) {
      PowerLawFluid fluid(k, m);
      for (double s : sigmas) {
        double back = stress_from_rate(rate_from_stress(s, fluid), fluid);
        worst = std::max(worst,
                         std::abs(back - s) / std::max(1.0, std::abs(s)));
      }
    }
  report(4, "constitutive round trip", worst <= 1e-12,
         fmt("max rel dev %.2e (tol 1e-12)", worst));
}

// --- 5: characteristic speeds vs eigenvalue oracle -------------------------

void criterion5() {
#ifdef RETFLOW_HAVE_EIGEN
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> uF(0.3, 3.0), us(-5.0, 5.0),
      ut(0.01, 1.0), ur(0.5, 2.0), ue(0.5, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    Material mat;
    mat.rho_star = ur(rng);
    if (i % 2)
      mat.elastic = LinearElastic{ue(rng)};
    else
      mat.elastic = PowerGas{ue(rng), 1.0 + (i % 5) * 0.25};
    mat.viscous = QuadraticViscous{ut(rng)};
    mat.fluid = PowerLawFluid(1.0, 1.0);
    State1D s{0.0, uF(rng), us(rng)};

    Eigen::Matrix3d A;
    A << 0.0, -dpressure_dF(s.F, mat.elastic) / mat.rho_star,
        1.0 / mat.rho_star, 1.0, 0.0, 0.0,
        1.0 / tau(s.sigma, mat.viscous, mat.rho_star), 0.0, 0.0;
    Eigen::EigenSolver<Eigen::Matrix3d> es(A);
    std::array<double, 3> lam{es.eigenvalues()(0).real(),
                              es.eigenvalues()(1).real(),
                              es.eigenvalues()(2).real()};
    std::sort(lam.begin(), lam.end());
    auto expect = char_speeds(s, mat);
    for (int j = 0; j < 3; ++j)
      worst = std::max(worst, std::abs(lam[j] - expect[j]) /
                                  std::max(1.0, std::abs(expect[j])));
  }
  report(5, "characteristic speeds vs eigenvalue oracle", worst <= 1e-10,
         fmt("max dev %.2e over 100 random states (tol 1e-10)", worst));
#else
  report(5, "characteristic speeds vs eigenvalue oracle", false,
         "Eigen not available");
#endif
}

// --- 6: method-of-lines equivalence ----------------------------------------

void criterion6() {
  const double g0 = 0.1, t_end = 2.0;
  Field1D f;
  f.grid = Grid1D(0.0, 1.0, 50);
  f.material = material(0.1, 0.7);
  f.bc = PistonBC{[](double) { return 0.0; }, [=](double) { return g0; }};
  f.cells.resize(50);
  for (int i = 0; i < 50; ++i)
    f.cells[i] = conserved({g0 * f.grid.center(i), 1.0, 0.0}, f.material);

  OdeOptions opts;
  opts.rtol = 1e-10;
  opts.atol = 1e-12;
  opts.t_end = t_end;
  Trajectory ode = simulate_homogeneous(
      f.material,
      ShearProtocol::custom([=](double t) { return g0 / (1.0 + g0 * t); }),
      0.0, 1.0, opts);

  double worst = 0.0;
  bool ok = true;
  for (StepMode mode : {StepMode::kExplicit, StepMode::kImex}) {
    Field1D g = run(f, t_end, 0.4, mode);
    for (const auto& c : g.cells) {
      State1D s = primitives(c, f.material);
      worst = std::max(worst, std::abs(s.sigma - ode.sigma.back()));
    }
  }
  ok &= worst <= 1e-3;
  report(6, "method-of-lines equivalence", ok,
         fmt("max |sigma_pde - sigma_ode| %.2e (tol 1e-3), both modes", worst));
}

// --- 7 + 8: energy dissipation and the finite-speed cone -------------------

void criteria78() {
  Material mat = material(0.1, 0.7);
  Field1D f;
  f.grid = Grid1D(0.0, 1.0, 200);
  f.material = mat;
  f.bc = Periodic{};
  f.cells.resize(200);
  for (int i = 0; i < 200; ++i) {
    double x = f.grid.center(i);
    double v = (x >= 0.25 && x < 0.75) ? 0.3 : 0.0;
    f.cells[i] = conserved({v, 1.0, 0.0}, mat);
  }

  // front detector at half the initial jump magnitude
  double jump = 0.0;
  for (int i = 1; i < 200; ++i)
    jump = std::max(jump, std::abs(f.cells[i].mom - f.cells[i - 1].mom) +
                              std::abs(f.cells[i].F - f.cells[i - 1].F) +
                              std::abs(f.cells[i].z - f.cells[i - 1].z));
  EnergyObserver energy(0.0);
  WavefrontObserver front({0.25, 0.75}, 0.5 * jump);
  Observer* obs[] = {&energy, &front};
  run(f, 0.5, 0.4, StepMode::kExplicit, obs);

  const auto& reports = energy.reports();
  bool ok7 = energy.max_energy_increase() <=
             1e-12 * std::abs(reports.front().total);
  double worst_residual = 0.0, worst_diss = 0.0;
  for (const auto& r : reports) {
    worst_residual = std::max(worst_residual, r.residual);
    // diss_integral is cumulative; its increments are the sampled powers
  }
  for (size_t i = 1; i < reports.size(); ++i)
    worst_diss = std::max(worst_diss, reports[i].diss_integral -
                                          reports[i - 1].diss_integral);
  ok7 &= worst_residual <= 1e-12 * std::max(1.0, std::abs(reports[0].total));
  ok7 &= worst_diss <= 0.0;
  report(7, "discrete energy dissipation", ok7,
         fmt("max dE %.2e, max residual %.2e (both <= 0 up to 1e-12 |E|)",
             energy.max_energy_increase(), worst_residual));

  // cone containment while the fronts stay clear of each other and of the
  // periodic wrap: the jumps are 0.5 apart, so radii below 0.24 are clean
  bool ok8 = true;
  double worst_excess = -1e300;
  int checked = 0;
  for (const auto& s : front.samples()) {
    if (s.cone_radius > 0.24) break;
    ok8 &= s.max_excess <= 0.0;
    worst_excess = std::max(worst_excess, s.max_excess);
    ++checked;
  }
  ok8 &= checked > 20;
  report(8, "finite-speed cone", ok8,
         fmt("max excess %.2e over %.0f steps (tol 0)",
             worst_excess, static_cast<double>(checked)));
}

// --- 9: relaxation limit ----------------------------------------------------

void criterion9() {
  const double g0 = 0.1, t_end = 2.0;
  std::vector<double> errors;
  for (double tau0 : {1e-1, 1e-2, 1e-3}) {
    Field1D f;
    f.grid = Grid1D(0.0, 1.0, 50);
    f.material = material(tau0, 0.7);
    f.bc = PistonBC{[](double) { return 0.0; }, [=](double) { return g0; }};
    f.cells.resize(50);
    for (int i = 0; i < 50; ++i)
      f.cells[i] = conserved({g0 * f.grid.center(i), 1.0, 0.0}, f.material);
    Field1D g = run(f, t_end, 0.4, StepMode::kImex);

    // applied spatial rate at measurement time under the exact uniform flow
    double vx_end = g0 / (1.0 + g0 * t_end);
    double target = stress_from_rate(vx_end, f.material.fluid);
    double err = 0.0;
    for (const auto& c : g.cells)
      err = std::max(err,
                     std::abs(primitives(c, f.material).sigma - target));
    errors.push_back(err);
  }
  bool ok = errors[0] > errors[1] && errors[1] > errors[2];
  report(9, "relaxation limit (IMEX)", ok,
         fmt("late-time errors %.3e > %.3e > %.3e for tau0 = 1e-1, 1e-2, 1e-3",
             errors[0], errors[1], errors[2]));
}

// --- 10: determinism of every bundled scenario ------------------------------

void criterion10() {
  fs::path dir = fs::temp_directory_path() / "retflow_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);

  auto slurp = [](const fs::path& p) {
    std::ifstream is(p);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
  };

  bool ok = true;
  std::string detail;
  int compared = 0;
  for (const char* name :
       {"fig1.cfg", "fig2.cfg", "riemann.cfg", "shear.cfg", "sweep_m.cfg"}) {
    fs::path cfg = fs::path(RETFLOW_SCENARIO_DIR) / name;
    fs::path a = dir / (std::string(name) + ".a");
    fs::path b = dir / (std::string(name) + ".b");
    int rc_a = run_scenario_file(cfg.string(), a.string(), true);
    int rc_b = run_scenario_file(cfg.string(), b.string(), true);
    if (rc_a != 0 || rc_b != 0) {
      ok = false;
      detail += std::string(name) + " exited nonzero; ";
      continue;
    }
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      fs::path twin = b / entry.path().filename();
      if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) {
        ok = false;
        detail += entry.path().filename().string() + " differs; ";
      }
      ++compared;
    }
  }

  // sweep concurrency must not affect the bytes either
  ScenarioConfig sw =
      load_scenario((fs::path(RETFLOW_SCENARIO_DIR) / "sweep_m.cfg").string());
  run_sweep(sw, (dir / "w1").string(), true, 1);
  run_sweep(sw, (dir / "w4").string(), true, 4);
  if (slurp(dir / "w1" / "sweep_m.csv") != slurp(dir / "w4" / "sweep_m.csv")) {
    ok = false;
    detail += "sweep differs across worker counts; ";
  }
  ++compared;

  if (detail.empty())
    detail = fmt("%.0f CSV files byte-identical across reruns and worker counts",
                 static_cast<double>(compared));
  report(10, "byte-identical scenario outputs", ok, detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criteria78();
  criterion9();
  criterion10();
  if (failures == 0)
    std::printf("acceptance: all criteria passed\n");
  else
    std::printf("acceptance: %d criteria FAILED\n", failures);
  return failures == 0 ? 0 : 1;
}
