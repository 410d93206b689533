#ifndef RETFLOW_SCENARIO_HPP
#define RETFLOW_SCENARIO_HPP

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "retflow/constitutive.hpp"

namespace retflow {

enum class ScenarioKind { kCase1, kCase2, kPde, kSweep };
enum class BcKind { kPeriodic, kTransmissive, kPiston };
enum class IcKind { kUniform, kRiemann, kSquareWave, kPulse, kShear };
enum class SweepAxis { kM, kK, kTau0, kVx0 };

/// Fully resolved scenario description: every field below is written to the
/// metadata sidecar, so no default is ever applied silently.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::kCase1;
  double t_end = 5.0;
  int samples = 501;
  std::string out_prefix;

  // material
  double rho_star = 1.0;
  bool linear_elastic = false;
  double p0 = 1.0, gamma = 1.0, modulus = 1.0;
  double tau0 = 0.1;
  double m = 1.0, k = 1.0;
  bool k_convention = false;  // k = 10 exp(-2 m)
  double body_force = 0.0;

  // case1
  double c1_sigma0 = 1.0;
  std::vector<double> m_values;

  // case2
  double c2_sigma0 = 0.0, c2_F0 = 1.0, vx0 = 0.1;
  bool comparator = false;
  double tau1 = 0.1;

  // ode solver
  double rtol = 1e-8, atol = 1e-10;
  long max_steps = 2'000'000;

  // pde: grid and boundary
  double x_min = 0.0, x_max = 1.0;
  int n_cells = 100;
  BcKind bc = BcKind::kPeriodic;
  double piston_v_left = 0.0, piston_v_right = 0.0;

  // pde: initial data
  IcKind ic = IcKind::kUniform;
  double u_v0 = 0.0, u_F0 = 1.0, u_sigma0 = 0.0;                   // uniform
  double x_jump = 0.5;                                             // riemann
  double v_left = 0.0, v_right = 0.0, F_left = 1.0, F_right = 1.0;
  double sigma_left = 0.0, sigma_right = 0.0;
  double x_lo = 0.25, x_hi = 0.75;                                 // square
  double v_inner = 0.0, v_outer = 0.0, F_inner = 1.0, F_outer = 1.0;
  double sigma_inner = 0.0, sigma_outer = 0.0;
  double v_amp = 0.1, x_center = 0.5, width = 0.1;                 // pulse
  double g0 = 0.1, sh_F0 = 1.0, sh_sigma0 = 0.0;                   // shear

  // pde: solver
  double cfl = 0.4;
  bool imex = false;
  int snapshots = 0;

  // sweep
  SweepAxis axis = SweepAxis::kM;
  std::vector<double> sweep_values;
  double sw_vx0 = 0.1, sw_sigma0 = 0.0, sw_F0 = 1.0;

  // output
  bool write_csv = true;
  bool write_svg = false;

  /// k for a given flow index under the resolved convention.
  double resolved_k(double flow_index) const;
  Material material_for(double flow_index) const;
};

/// Config-file problems, one "path:line: message" entry per finding.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> messages);
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::vector<std::string> messages_;
};

ScenarioConfig load_scenario(const std::string& path);

/// Emits the fully resolved configuration in the same key = value grammar;
/// feeding it back reproduces the run byte for byte.
void write_resolved_config(std::ostream& os, const ScenarioConfig& cfg);

struct ScenarioResult {
  int exit_code = 0;  // 0 ok, 3 solver failure (partial outputs on disk)
  std::vector<std::string> outputs;
  std::string message;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            const std::string& out_dir, bool quiet);
/// Sweep rows run concurrently (workers = 0: hardware concurrency); the
/// output row order always matches the config order.
ScenarioResult run_sweep(const ScenarioConfig& cfg, const std::string& out_dir,
                         bool quiet, int workers = 0);

/// Parse + dispatch; exit code 0, 2 (config error, diagnostics on stderr)
/// or 3 (solver failure, partial outputs preserved).
int run_scenario_file(const std::string& path, const std::string& out_dir,
                      bool quiet, int sweep_workers = 0);

}  // namespace retflow

#endif
