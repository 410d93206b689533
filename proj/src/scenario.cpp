#include "retflow/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "retflow/analytic.hpp"
#include "retflow/diagnostics.hpp"
#include "retflow/numfmt.hpp"
#include "retflow/ode.hpp"
#include "retflow/pde.hpp"
#include "retflow/svg.hpp"

namespace fs = std::filesystem;

namespace retflow {

ConfigError::ConfigError(std::vector<std::string> messages)
    : std::runtime_error(messages.empty() ? "config error" : messages.front()),
      messages_(std::move(messages)) {}

double ScenarioConfig::resolved_k(double flow_index) const {
  return k_convention ? 10.0 * std::exp(-2.0 * flow_index) : k;
}

Material ScenarioConfig::material_for(double flow_index) const {
  Material mat;
  mat.rho_star = rho_star;
  if (linear_elastic)
    mat.elastic = LinearElastic{modulus};
  else
    mat.elastic = PowerGas{p0, gamma};
  mat.viscous = QuadraticViscous{tau0};
  mat.fluid = PowerLawFluid(resolved_k(flow_index), flow_index);
  mat.body_force = body_force;
  mat.validate();
  return mat;
}

// ---------------------------------------------------------------------------
// config parsing

namespace {

struct RawEntry {
  std::string key, value;
  int line = 0;
  bool used = false;
};

struct RawSection {
  std::vector<RawEntry> entries;
  int line = 0;
  bool known = false;
};

struct Raw {
  std::string path;
  std::map<std::string, RawSection> sections;
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

Raw parse_raw(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::string> errors;
  if (!in) throw ConfigError({path + ": cannot open file"});
  Raw raw;
  raw.path = path;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos)
      line.erase(pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back(path + ":" + std::to_string(lineno) +
                         ": malformed section header");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        errors.push_back(path + ":" + std::to_string(lineno) +
                         ": empty section name");
      auto& sec = raw.sections[section];
      if (sec.line == 0) sec.line = lineno;
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back(path + ":" + std::to_string(lineno) +
                       ": expected 'key = value'");
      continue;
    }
    if (section.empty()) {
      errors.push_back(path + ":" + std::to_string(lineno) +
                       ": key outside any [section]");
      continue;
    }
    RawEntry e;
    e.key = trim(line.substr(0, eq));
    e.value = trim(line.substr(eq + 1));
    e.line = lineno;
    if (e.key.empty() || e.value.empty()) {
      errors.push_back(path + ":" + std::to_string(lineno) +
                       ": empty key or value");
      continue;
    }
    auto& sec = raw.sections[section];
    for (const auto& prev : sec.entries)
      if (prev.key == e.key)
        errors.push_back(path + ":" + std::to_string(lineno) +
                         ": duplicate key '" + e.key + "'");
    sec.entries.push_back(std::move(e));
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return raw;
}

class Reader {
 public:
  explicit Reader(Raw raw) : raw_(std::move(raw)) {}

  void know(const std::string& section) {
    auto it = raw_.sections.find(section);
    if (it != raw_.sections.end()) it->second.known = true;
  }

  bool has(const std::string& section, const std::string& key) {
    return find(section, key) != nullptr;
  }

  std::optional<std::string> take(const std::string& section,
                                  const std::string& key) {
    RawEntry* e = find(section, key);
    if (!e) return std::nullopt;
    e->used = true;
    return e->value;
  }

  double number(const std::string& sec, const std::string& key, double def) {
    auto v = take(sec, key);
    if (!v) return def;
    return parse_number(sec, key, *v).value_or(def);
  }

  double number_req(const std::string& sec, const std::string& key) {
    auto v = take(sec, key);
    if (!v) {
      errors_.push_back(raw_.path + ": missing required key '" + key +
                        "' in [" + sec + "]");
      return 0.0;
    }
    return parse_number(sec, key, *v).value_or(0.0);
  }

  long integer(const std::string& sec, const std::string& key, long def) {
    auto v = take(sec, key);
    if (!v) return def;
    long out{};
    auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || p != v->data() + v->size()) {
      error_at(sec, key, "expected an integer, got '" + *v + "'");
      return def;
    }
    return out;
  }

  bool flag(const std::string& sec, const std::string& key, bool def) {
    auto v = take(sec, key);
    if (!v) return def;
    if (*v == "on" || *v == "true" || *v == "1") return true;
    if (*v == "off" || *v == "false" || *v == "0") return false;
    error_at(sec, key, "expected on/off, got '" + *v + "'");
    return def;
  }

  std::string word(const std::string& sec, const std::string& key,
                   const std::string& def,
                   const std::vector<std::string>& allowed) {
    auto v = take(sec, key);
    std::string out = v.value_or(def);
    if (std::find(allowed.begin(), allowed.end(), out) == allowed.end()) {
      std::string opts;
      for (const auto& a : allowed) opts += (opts.empty() ? "" : "|") + a;
      error_at(sec, key, "expected one of " + opts + ", got '" + out + "'");
      return def;
    }
    return out;
  }

  std::vector<double> list(const std::string& sec, const std::string& key) {
    auto v = take(sec, key);
    std::vector<double> out;
    if (!v) return out;
    std::string s = *v;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
      auto d = parse_number(sec, key, tok);
      if (!d) return {};
      out.push_back(*d);
    }
    return out;
  }

  void error(const std::string& msg) { errors_.push_back(raw_.path + ": " + msg); }

  void finish() {
    for (const auto& [name, sec] : raw_.sections) {
      if (!sec.known) {
        errors_.push_back(raw_.path + ":" + std::to_string(sec.line) +
                          ": unknown section [" + name + "]");
        continue;
      }
      for (const auto& e : sec.entries)
        if (!e.used)
          errors_.push_back(raw_.path + ":" + std::to_string(e.line) +
                            ": unknown key '" + e.key + "' in [" + name + "]");
    }
    if (!errors_.empty()) throw ConfigError(std::move(errors_));
  }

  const std::string& path() const { return raw_.path; }

 private:
  RawEntry* find(const std::string& section, const std::string& key) {
    auto it = raw_.sections.find(section);
    if (it == raw_.sections.end()) return nullptr;
    for (auto& e : it->second.entries)
      if (e.key == key) return &e;
    return nullptr;
  }

  std::optional<double> parse_number(const std::string& sec,
                                     const std::string& key,
                                     const std::string& v) {
    double out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) {
      error_at(sec, key, "expected a number, got '" + v + "'");
      return std::nullopt;
    }
    return out;
  }

  void error_at(const std::string& sec, const std::string& key,
                const std::string& msg) {
    int line = 0;
    if (RawEntry* e = find(sec, key)) line = e->line;
    errors_.push_back(raw_.path + ":" + std::to_string(line) + ": [" + sec +
                      "] " + key + ": " + msg);
  }

  Raw raw_;
  std::vector<std::string> errors_;
};

}  // namespace

ScenarioConfig load_scenario(const std::string& path) {
  Reader r(parse_raw(path));
  ScenarioConfig cfg;
  cfg.out_prefix = fs::path(path).stem().string();

  r.know("scenario");
  std::string kind =
      r.word("scenario", "kind", "", {"case1", "case2", "pde", "sweep"});
  cfg.kind = kind == "case1"   ? ScenarioKind::kCase1
             : kind == "case2" ? ScenarioKind::kCase2
             : kind == "pde"   ? ScenarioKind::kPde
                               : ScenarioKind::kSweep;
  double default_t_end = cfg.kind == ScenarioKind::kCase1   ? 5.0
                         : cfg.kind == ScenarioKind::kCase2 ? 6.0
                         : cfg.kind == ScenarioKind::kPde   ? 0.5
                                                            : 60.0;
  cfg.t_end = r.number("scenario", "t_end", default_t_end);
  cfg.samples = static_cast<int>(r.integer("scenario", "samples", 501));
  if (auto v = r.take("scenario", "out_prefix")) cfg.out_prefix = *v;
  if (cfg.t_end < 0.0) r.error("[scenario] t_end must be >= 0");
  if (cfg.samples < 2) r.error("[scenario] samples must be >= 2");

  r.know("material");
  cfg.rho_star = r.number("material", "rho_star", 1.0);
  std::string elastic = r.word("material", "elastic", "power_gas",
                               {"power_gas", "linear_elastic"});
  cfg.linear_elastic = elastic == "linear_elastic";
  if (cfg.linear_elastic)
    cfg.modulus = r.number("material", "modulus", 1.0);
  else {
    cfg.p0 = r.number("material", "p0", 1.0);
    cfg.gamma = r.number("material", "gamma", 1.0);
  }
  cfg.tau0 = r.number("material", "tau0", 0.1);
  cfg.body_force = r.number("material", "body_force", 0.0);

  bool has_k = r.has("material", "k");
  bool has_conv = r.has("material", "k_convention");
  if (has_k && has_conv)
    r.error("[material] give either k or k_convention, not both");
  cfg.k_convention = r.flag("material", "k_convention", false);
  cfg.k = r.number("material", "k", 1.0);
  if (!has_k && !cfg.k_convention)
    r.error("[material] one of k or k_convention is required");

  r.know("case1");
  if (cfg.kind == ScenarioKind::kCase1) {
    cfg.m_values = r.list("case1", "m_values");
    cfg.c1_sigma0 = r.number("case1", "sigma0", 1.0);
    if (!cfg.m_values.empty())
      cfg.m = r.number("material", "m", cfg.m_values.front());
    else
      cfg.m = r.number_req("material", "m");
  } else {
    cfg.m = r.number_req("material", "m");
  }

  r.know("case2");
  if (cfg.kind == ScenarioKind::kCase2) {
    cfg.c2_sigma0 = r.number("case2", "sigma0", 0.0);
    cfg.c2_F0 = r.number("case2", "F0", 1.0);
    cfg.vx0 = r.number("case2", "vx0", 0.1);
    cfg.comparator = r.flag("case2", "comparator", false);
    cfg.tau1 = r.number("case2", "tau1", cfg.tau0);
  }

  r.know("ode");
  if (cfg.kind == ScenarioKind::kCase2 || cfg.kind == ScenarioKind::kSweep) {
    cfg.rtol = r.number("ode", "rtol", 1e-8);
    cfg.atol = r.number("ode", "atol", 1e-10);
    cfg.max_steps = r.integer("ode", "max_steps", 2'000'000);
    if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0))
      r.error("[ode] tolerances must be positive");
  }

  r.know("grid");
  r.know("initial");
  r.know("pde");
  if (cfg.kind == ScenarioKind::kPde) {
    cfg.x_min = r.number("grid", "x_min", 0.0);
    cfg.x_max = r.number("grid", "x_max", 1.0);
    cfg.n_cells = static_cast<int>(r.integer("grid", "n_cells", 100));
    if (!(cfg.x_max > cfg.x_min)) r.error("[grid] x_max must exceed x_min");
    if (cfg.n_cells < 2) r.error("[grid] n_cells must be >= 2");
    std::string bc = r.word("grid", "bc", "periodic",
                            {"periodic", "transmissive", "piston"});
    cfg.bc = bc == "periodic"       ? BcKind::kPeriodic
             : bc == "transmissive" ? BcKind::kTransmissive
                                    : BcKind::kPiston;
    if (cfg.bc == BcKind::kPiston) {
      cfg.piston_v_left = r.number("grid", "piston_v_left", 0.0);
      cfg.piston_v_right = r.number("grid", "piston_v_right", 0.0);
    }

    std::string ic =
        r.word("initial", "kind", "uniform",
               {"uniform", "riemann", "square_wave", "pulse", "shear"});
    if (ic == "uniform") {
      cfg.ic = IcKind::kUniform;
      cfg.u_v0 = r.number("initial", "v0", 0.0);
      cfg.u_F0 = r.number("initial", "F0", 1.0);
      cfg.u_sigma0 = r.number("initial", "sigma0", 0.0);
    } else if (ic == "riemann") {
      cfg.ic = IcKind::kRiemann;
      cfg.x_jump = r.number("initial", "x_jump", 0.5 * (cfg.x_min + cfg.x_max));
      cfg.v_left = r.number("initial", "v_left", 0.0);
      cfg.v_right = r.number("initial", "v_right", 0.0);
      cfg.F_left = r.number("initial", "F_left", 1.0);
      cfg.F_right = r.number("initial", "F_right", 1.0);
      cfg.sigma_left = r.number("initial", "sigma_left", 0.0);
      cfg.sigma_right = r.number("initial", "sigma_right", 0.0);
    } else if (ic == "square_wave") {
      cfg.ic = IcKind::kSquareWave;
      cfg.x_lo = r.number("initial", "x_lo", cfg.x_min + 0.25 * (cfg.x_max - cfg.x_min));
      cfg.x_hi = r.number("initial", "x_hi", cfg.x_min + 0.75 * (cfg.x_max - cfg.x_min));
      cfg.v_inner = r.number("initial", "v_inner", 0.0);
      cfg.v_outer = r.number("initial", "v_outer", 0.0);
      cfg.F_inner = r.number("initial", "F_inner", 1.0);
      cfg.F_outer = r.number("initial", "F_outer", 1.0);
      cfg.sigma_inner = r.number("initial", "sigma_inner", 0.0);
      cfg.sigma_outer = r.number("initial", "sigma_outer", 0.0);
      if (!(cfg.x_lo < cfg.x_hi)) r.error("[initial] need x_lo < x_hi");
    } else if (ic == "pulse") {
      cfg.ic = IcKind::kPulse;
      cfg.v_amp = r.number("initial", "v_amp", 0.1);
      cfg.x_center =
          r.number("initial", "x_center", 0.5 * (cfg.x_min + cfg.x_max));
      cfg.width = r.number("initial", "width", 0.1 * (cfg.x_max - cfg.x_min));
      if (!(cfg.width > 0.0)) r.error("[initial] width must be positive");
    } else {
      cfg.ic = IcKind::kShear;
      cfg.g0 = r.number("initial", "g0", 0.1);
      cfg.sh_F0 = r.number("initial", "F0", 1.0);
      cfg.sh_sigma0 = r.number("initial", "sigma0", 0.0);
    }

    cfg.cfl = r.number("pde", "cfl", 0.4);
    std::string mode = r.word("pde", "mode", "explicit", {"explicit", "imex"});
    cfg.imex = mode == "imex";
    cfg.snapshots = static_cast<int>(r.integer("pde", "snapshots", 0));
    if (!(cfg.cfl > 0.0 && cfg.cfl <= 1.0))
      r.error("[pde] cfl must lie in (0, 1]");
    if (cfg.snapshots < 0) r.error("[pde] snapshots must be >= 0");
  }

  r.know("sweep");
  if (cfg.kind == ScenarioKind::kSweep) {
    std::string axis =
        r.word("sweep", "axis", "", {"m", "k", "tau0", "vx0"});
    cfg.axis = axis == "m"      ? SweepAxis::kM
               : axis == "k"    ? SweepAxis::kK
               : axis == "tau0" ? SweepAxis::kTau0
                                : SweepAxis::kVx0;
    cfg.sweep_values = r.list("sweep", "values");
    if (cfg.sweep_values.empty())
      r.error("[sweep] values must list at least one number");
    if (cfg.axis == SweepAxis::kK && cfg.k_convention)
      r.error("[sweep] axis = k conflicts with k_convention");
    cfg.sw_vx0 = r.number("sweep", "vx0", 0.1);
    cfg.sw_sigma0 = r.number("sweep", "sigma0", 0.0);
    cfg.sw_F0 = r.number("sweep", "F0", 1.0);
  }

  r.know("output");
  cfg.write_csv = r.flag("output", "csv", true);
  cfg.write_svg = r.flag("output", "svg", false);

  r.finish();

  // material-level sanity on the resolved values
  std::vector<std::string> late;
  try {
    cfg.material_for(cfg.m);
  } catch (const std::exception& e) {
    late.push_back(r.path() + ": " + e.what());
  }
  if (!late.empty()) throw ConfigError(std::move(late));
  return cfg;
}

// ---------------------------------------------------------------------------
// resolved-config sidecar

namespace {

const char* kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::kCase1: return "case1";
    case ScenarioKind::kCase2: return "case2";
    case ScenarioKind::kPde: return "pde";
    case ScenarioKind::kSweep: return "sweep";
  }
  return "?";
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

}  // namespace

void write_resolved_config(std::ostream& os, const ScenarioConfig& cfg) {
  auto kv = [&](const char* key, const std::string& val) {
    os << key << " = " << val << "\n";
  };
  auto kvd = [&](const char* key, double v) { kv(key, format_double(v)); };
  auto kvb = [&](const char* key, bool v) { kv(key, v ? "on" : "off"); };

  os << "# resolved configuration; rerunning this file reproduces the run\n";
  os << "[scenario]\n";
  kv("kind", kind_name(cfg.kind));
  kvd("t_end", cfg.t_end);
  kv("samples", std::to_string(cfg.samples));
  kv("out_prefix", cfg.out_prefix);

  os << "\n[material]\n";
  kvd("rho_star", cfg.rho_star);
  kv("elastic", cfg.linear_elastic ? "linear_elastic" : "power_gas");
  if (cfg.linear_elastic) {
    kvd("modulus", cfg.modulus);
  } else {
    kvd("p0", cfg.p0);
    kvd("gamma", cfg.gamma);
  }
  kvd("tau0", cfg.tau0);
  kvd("m", cfg.m);
  if (cfg.k_convention) {
    os << "# assumption: consistency coefficient from k = 10 exp(-2 m)\n";
    kvb("k_convention", true);
    os << "# resolved k for m = " << format_double(cfg.m) << ": "
       << format_double(cfg.resolved_k(cfg.m)) << "\n";
  } else {
    kvd("k", cfg.k);
  }
  kvd("body_force", cfg.body_force);

  switch (cfg.kind) {
    case ScenarioKind::kCase1:
      os << "\n[case1]\n";
      kvd("sigma0", cfg.c1_sigma0);
      if (!cfg.m_values.empty()) kv("m_values", join(cfg.m_values));
      break;
    case ScenarioKind::kCase2:
      os << "\n[case2]\n";
      kvd("sigma0", cfg.c2_sigma0);
      kvd("F0", cfg.c2_F0);
      kvd("vx0", cfg.vx0);
      kvb("comparator", cfg.comparator);
      kvd("tau1", cfg.tau1);
      os << "\n[ode]\n";
      kvd("rtol", cfg.rtol);
      kvd("atol", cfg.atol);
      kv("max_steps", std::to_string(cfg.max_steps));
      break;
    case ScenarioKind::kPde:
      os << "\n[grid]\n";
      kvd("x_min", cfg.x_min);
      kvd("x_max", cfg.x_max);
      kv("n_cells", std::to_string(cfg.n_cells));
      kv("bc", cfg.bc == BcKind::kPeriodic       ? "periodic"
               : cfg.bc == BcKind::kTransmissive ? "transmissive"
                                                 : "piston");
      if (cfg.bc == BcKind::kPiston) {
        kvd("piston_v_left", cfg.piston_v_left);
        kvd("piston_v_right", cfg.piston_v_right);
      }
      os << "\n[initial]\n";
      switch (cfg.ic) {
        case IcKind::kUniform:
          kv("kind", "uniform");
          kvd("v0", cfg.u_v0);
          kvd("F0", cfg.u_F0);
          kvd("sigma0", cfg.u_sigma0);
          break;
        case IcKind::kRiemann:
          kv("kind", "riemann");
          kvd("x_jump", cfg.x_jump);
          kvd("v_left", cfg.v_left);
          kvd("v_right", cfg.v_right);
          kvd("F_left", cfg.F_left);
          kvd("F_right", cfg.F_right);
          kvd("sigma_left", cfg.sigma_left);
          kvd("sigma_right", cfg.sigma_right);
          break;
        case IcKind::kSquareWave:
          kv("kind", "square_wave");
          kvd("x_lo", cfg.x_lo);
          kvd("x_hi", cfg.x_hi);
          kvd("v_inner", cfg.v_inner);
          kvd("v_outer", cfg.v_outer);
          kvd("F_inner", cfg.F_inner);
          kvd("F_outer", cfg.F_outer);
          kvd("sigma_inner", cfg.sigma_inner);
          kvd("sigma_outer", cfg.sigma_outer);
          break;
        case IcKind::kPulse:
          kv("kind", "pulse");
          kvd("v_amp", cfg.v_amp);
          kvd("x_center", cfg.x_center);
          kvd("width", cfg.width);
          break;
        case IcKind::kShear:
          kv("kind", "shear");
          kvd("g0", cfg.g0);
          kvd("F0", cfg.sh_F0);
          kvd("sigma0", cfg.sh_sigma0);
          break;
      }
      os << "\n[pde]\n";
      kvd("cfl", cfg.cfl);
      kv("mode", cfg.imex ? "imex" : "explicit");
      kv("snapshots", std::to_string(cfg.snapshots));
      break;
    case ScenarioKind::kSweep:
      os << "\n[sweep]\n";
      kv("axis", cfg.axis == SweepAxis::kM      ? "m"
                 : cfg.axis == SweepAxis::kK    ? "k"
                 : cfg.axis == SweepAxis::kTau0 ? "tau0"
                                                : "vx0");
      kv("values", join(cfg.sweep_values));
      kvd("vx0", cfg.sw_vx0);
      kvd("sigma0", cfg.sw_sigma0);
      kvd("F0", cfg.sw_F0);
      os << "\n[ode]\n";
      kvd("rtol", cfg.rtol);
      kvd("atol", cfg.atol);
      kv("max_steps", std::to_string(cfg.max_steps));
      break;
  }

  os << "\n[output]\n";
  kvb("csv", cfg.write_csv);
  kvb("svg", cfg.write_svg);
}

// ---------------------------------------------------------------------------
// scenario execution

namespace {

void info(bool quiet, const std::string& msg) {
  if (!quiet) std::cout << msg << "\n";
}

std::string out_path(const std::string& out_dir, const std::string& name) {
  fs::create_directories(out_dir);
  return (fs::path(out_dir) / name).string();
}

void write_sidecar(const ScenarioConfig& cfg, const std::string& out_dir,
                   ScenarioResult& res, const std::string& extra = {}) {
  std::string p = out_path(out_dir, cfg.out_prefix + "_resolved.cfg");
  std::ofstream os(p);
  write_resolved_config(os, cfg);
  if (!extra.empty()) os << extra;
  res.outputs.push_back(p);
}

ScenarioResult scenario_case1(const ScenarioConfig& cfg,
                              const std::string& out_dir, bool quiet) {
  ScenarioResult res;
  std::vector<double> ms = cfg.m_values.empty()
                               ? std::vector<double>{cfg.m}
                               : cfg.m_values;
  std::vector<PlotSeries> series;
  std::string extra;
  const int rows = cfg.t_end > 0.0 ? cfg.samples : 1;
  for (double mi : ms) {
    PowerLawFluid fluid(cfg.resolved_k(mi), mi);
    Case1Params p{fluid, cfg.c1_sigma0};
    PlotSeries s;
    s.label = "m=" + format_double(mi);
    for (int i = 0; i < rows; ++i) {
      double tb = rows > 1 ? cfg.t_end * i / (rows - 1) : 0.0;
      s.x.push_back(tb);
      s.y.push_back(case1_solution(p, tb));
    }
    if (mi > 1.0)
      extra += "# extinction tbar for m = " + format_double(mi) + ": " +
               format_double(extinction_time(p)) + "\n";
    series.push_back(std::move(s));
  }

  if (cfg.write_csv) {
    std::string p = out_path(out_dir, cfg.out_prefix + ".csv");
    std::ofstream os(p);
    os << "tbar";
    for (const auto& s : series) os << "," << s.label;
    os << "\n";
    for (size_t i = 0; i < series[0].x.size(); ++i) {
      os << format_double(series[0].x[i]);
      for (const auto& s : series) os << "," << format_double(s.y[i]);
      os << "\n";
    }
    res.outputs.push_back(p);
  }
  if (cfg.write_svg) {
    std::string p = out_path(out_dir, cfg.out_prefix + ".svg");
    std::ofstream os(p);
    write_line_plot(os, "Stress relaxation at rest", "t / tau0", "sigma",
                    series);
    res.outputs.push_back(p);
  }
  write_sidecar(cfg, out_dir, res, extra);
  info(quiet, "case1: wrote " + std::to_string(series.size()) + " curves");
  return res;
}

ScenarioResult scenario_case2(const ScenarioConfig& cfg,
                              const std::string& out_dir, bool quiet) {
  ScenarioResult res;
  Material mat = cfg.material_for(cfg.m);
  OdeOptions opts;
  opts.rtol = cfg.rtol;
  opts.atol = cfg.atol;
  opts.max_steps = cfg.max_steps;
  opts.t_end = cfg.t_end;

  Trajectory traj = simulate_homogeneous(
      mat, ShearProtocol::constant_rate(cfg.vx0), cfg.c2_sigma0, cfg.c2_F0,
      opts);
  double horizon = traj.times.back();

  double sigma_inf =
      steady_sigma({cfg.vx0, cfg.c2_F0, cfg.tau0, mat.fluid});

  const int rows = horizon > 0.0 ? cfg.samples : 1;
  std::vector<PlotSeries> series(1);
  series[0].label = "model";
  for (int i = 0; i < rows; ++i) {
    double t = rows > 1 ? horizon * i / (rows - 1) : 0.0;
    series[0].x.push_back(t);
    series[0].y.push_back(traj.sample_sigma(t));
  }
  if (cfg.comparator) {
    PlotSeries lin;
    lin.label = "linear";
    for (int i = 0; i < rows; ++i) {
      double t = series[0].x[i];
      lin.x.push_back(t);
      lin.y.push_back(maxwell_comparator(t, sigma_inf, cfg.tau1));
    }
    series.push_back(std::move(lin));
  }

  if (cfg.write_csv) {
    std::string p = out_path(out_dir, cfg.out_prefix + ".csv");
    std::ofstream os(p);
    os << "t,sigma";
    if (cfg.comparator) os << ",sigma_linear";
    os << "\n";
    for (size_t i = 0; i < series[0].x.size(); ++i) {
      os << format_double(series[0].x[i]) << ","
         << format_double(series[0].y[i]);
      if (cfg.comparator) os << "," << format_double(series[1].y[i]);
      os << "\n";
    }
    res.outputs.push_back(p);
  }
  if (cfg.write_svg) {
    std::string p = out_path(out_dir, cfg.out_prefix + ".svg");
    std::ofstream os(p);
    write_line_plot(os, "Stress startup under constant shear rate", "t",
                    "sigma", series);
    res.outputs.push_back(p);
  }

  std::string extra = "# sigma_inf = " + format_double(sigma_inf) + "\n";
  extra += "# solver: steps = " + std::to_string(traj.stats.steps) +
           ", rejected = " + std::to_string(traj.stats.rejected) +
           ", rhs_evals = " + std::to_string(traj.stats.rhs_evals) +
           ", implicit_steps = " + std::to_string(traj.stats.implicit_steps) +
           "\n";
  if (traj.status != OdeStatus::kOk) {
    extra += "# WARNING: integration stopped early at t = " +
             format_double(horizon) + "\n";
    res.exit_code = 3;
    res.message = traj.status == OdeStatus::kStepUnderflow
                      ? "step size underflow at t = " + format_double(horizon)
                      : "max_steps exceeded at t = " + format_double(horizon);
  }
  write_sidecar(cfg, out_dir, res, extra);
  info(quiet, "case2: sigma(t_end) = " +
                  format_double(series[0].y.back()) +
                  ", sigma_inf = " + format_double(sigma_inf));
  return res;
}

Field1D build_field(const ScenarioConfig& cfg) {
  Material mat = cfg.material_for(cfg.m);
  Field1D f;
  f.grid = Grid1D(cfg.x_min, cfg.x_max, cfg.n_cells);
  f.material = mat;
  switch (cfg.bc) {
    case BcKind::kPeriodic:
      f.bc = Periodic{};
      break;
    case BcKind::kTransmissive:
      f.bc = Transmissive{};
      break;
    case BcKind::kPiston: {
      double vl = cfg.piston_v_left, vr = cfg.piston_v_right;
      f.bc = PistonBC{[vl](double) { return vl; }, [vr](double) { return vr; }};
      break;
    }
  }
  f.cells.resize(cfg.n_cells);
  for (int i = 0; i < cfg.n_cells; ++i) {
    double x = f.grid.center(i);
    State1D s;
    switch (cfg.ic) {
      case IcKind::kUniform:
        s = {cfg.u_v0, cfg.u_F0, cfg.u_sigma0};
        break;
      case IcKind::kRiemann:
        s = x < cfg.x_jump
                ? State1D{cfg.v_left, cfg.F_left, cfg.sigma_left}
                : State1D{cfg.v_right, cfg.F_right, cfg.sigma_right};
        break;
      case IcKind::kSquareWave:
        s = (x >= cfg.x_lo && x < cfg.x_hi)
                ? State1D{cfg.v_inner, cfg.F_inner, cfg.sigma_inner}
                : State1D{cfg.v_outer, cfg.F_outer, cfg.sigma_outer};
        break;
      case IcKind::kPulse: {
        double u = (x - cfg.x_center) / cfg.width;
        s = {cfg.v_amp * std::exp(-u * u), 1.0, 0.0};
        break;
      }
      case IcKind::kShear:
        s = {cfg.g0 * x, cfg.sh_F0, cfg.sh_sigma0};
        break;
    }
    f.cells[i] = conserved(s, mat);
  }
  return f;
}

ScenarioResult scenario_pde(const ScenarioConfig& cfg,
                            const std::string& out_dir, bool quiet) {
  ScenarioResult res;
  Field1D field = build_field(cfg);
  StepMode mode = cfg.imex ? StepMode::kImex : StepMode::kExplicit;
  EnergyObserver energy(cfg.t_end / (cfg.samples - 1));
  energy.on_start(field);

  std::vector<double> snap_times;
  for (int i = 1; i <= cfg.snapshots; ++i)
    snap_times.push_back(cfg.t_end * i / (cfg.snapshots + 1));
  size_t next_snap = 0;
  int snap_index = 0;

  auto write_snapshot = [&](const Field1D& f, const std::string& suffix) {
    std::string p = out_path(out_dir, cfg.out_prefix + "_field" + suffix + ".csv");
    std::ofstream os(p);
    write_field_csv(os, f);
    res.outputs.push_back(p);
  };

  const double tiny = 1e-12 * std::max(1.0, cfg.t_end);
  StepInfo sinfo;
  try {
    while (field.time < cfg.t_end - tiny) {
      sinfo.index += 1;
      field = step(field, cfg.cfl, mode, cfg.t_end - field.time, &sinfo);
      energy.on_step(field, sinfo);
      while (next_snap < snap_times.size() &&
             field.time >= snap_times[next_snap] - tiny) {
        char suffix[16];
        std::snprintf(suffix, sizeof suffix, "_%03d", ++snap_index);
        write_snapshot(field, suffix);
        ++next_snap;
      }
    }
  } catch (const std::exception& e) {
    res.exit_code = 3;
    res.message = e.what();
  }

  if (cfg.write_csv) {
    write_snapshot(field, "");
    std::string p = out_path(out_dir, cfg.out_prefix + "_energy.csv");
    std::ofstream os(p);
    write_energy_csv(os, energy.reports());
    res.outputs.push_back(p);
  }
  if (cfg.write_svg) {
    std::vector<PlotSeries> series(3);
    series[0].label = "v";
    series[1].label = "F";
    series[2].label = "sigma";
    for (size_t i = 0; i < field.cells.size(); ++i) {
      double x = field.grid.center(static_cast<int>(i));
      State1D s = primitives(field.cells[i], field.material);
      for (auto& sr : series) sr.x.push_back(x);
      series[0].y.push_back(s.v);
      series[1].y.push_back(s.F);
      series[2].y.push_back(s.sigma);
    }
    std::string p = out_path(out_dir, cfg.out_prefix + ".svg");
    std::ofstream os(p);
    write_line_plot(os, "Field profiles at t = " + format_double(field.time),
                    "X", "value", series);
    res.outputs.push_back(p);
  }

  std::string extra =
      "# final time = " + format_double(field.time) + "\n# steps = " +
      std::to_string(sinfo.index) + "\n";
  if (res.exit_code == 3)
    extra += "# WARNING: solver failure: " + res.message + "\n";
  write_sidecar(cfg, out_dir, res, extra);
  info(quiet, "pde: advanced to t = " + format_double(field.time) + " in " +
                  std::to_string(sinfo.index) + " steps");
  return res;
}

struct SweepRow {
  double value = 0.0;
  double sigma_steady = 0.0;
  bool has_extinction = false;
  double extinction = 0.0;
  SolverStats stats;
  std::string status = "ok";
};

SweepRow sweep_row(const ScenarioConfig& cfg, double value) {
  SweepRow row;
  row.value = value;
  double m = cfg.m, k = cfg.resolved_k(cfg.m), tau0 = cfg.tau0,
         vx0 = cfg.sw_vx0;
  switch (cfg.axis) {
    case SweepAxis::kM:
      m = value;
      k = cfg.resolved_k(value);
      break;
    case SweepAxis::kK:
      k = value;
      break;
    case SweepAxis::kTau0:
      tau0 = value;
      break;
    case SweepAxis::kVx0:
      vx0 = value;
      break;
  }
  try {
    Material mat;
    mat.rho_star = cfg.rho_star;
    mat.elastic = cfg.linear_elastic
                      ? ElasticLaw{LinearElastic{cfg.modulus}}
                      : ElasticLaw{PowerGas{cfg.p0, cfg.gamma}};
    mat.viscous = QuadraticViscous{tau0};
    mat.fluid = PowerLawFluid(k, m);
    mat.body_force = cfg.body_force;
    mat.validate();

    OdeOptions opts;
    opts.rtol = cfg.rtol;
    opts.atol = cfg.atol;
    opts.max_steps = cfg.max_steps;
    opts.t_end = cfg.t_end;
    Trajectory traj = simulate_homogeneous(
        mat, ShearProtocol::constant_rate(vx0), cfg.sw_sigma0, cfg.sw_F0,
        opts);
    row.sigma_steady = traj.sigma.back();
    row.stats = traj.stats;
    if (traj.status == OdeStatus::kStepUnderflow) row.status = "step_underflow";
    if (traj.status == OdeStatus::kMaxStepsExceeded) row.status = "max_steps";
    if (m > 1.0) {
      row.has_extinction = true;
      row.extinction = extinction_time({mat.fluid, cfg.sw_sigma0});
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    row.status = "error: " + msg;
  }
  return row;
}

}  // namespace

ScenarioResult run_sweep(const ScenarioConfig& cfg, const std::string& out_dir,
                         bool quiet, int workers) {
  ScenarioResult res;
  if (cfg.kind != ScenarioKind::kSweep) {
    res.exit_code = 2;
    res.message = "run_sweep requires kind = sweep";
    return res;
  }
  const size_t n = cfg.sweep_values.size();
  std::vector<SweepRow> rows(n);
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  size_t nthreads =
      std::min<size_t>(n, workers > 0 ? static_cast<size_t>(workers) : hw);

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
      rows[i] = sweep_row(cfg, cfg.sweep_values[i]);
  };
  std::vector<std::thread> pool;
  for (size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  if (cfg.write_csv) {
    const char* axis = cfg.axis == SweepAxis::kM      ? "m"
                       : cfg.axis == SweepAxis::kK    ? "k"
                       : cfg.axis == SweepAxis::kTau0 ? "tau0"
                                                      : "vx0";
    std::string p = out_path(out_dir, cfg.out_prefix + ".csv");
    std::ofstream os(p);
    os << axis << ",sigma_steady,extinction_tbar,steps,rejected,rhs_evals,"
          "status\n";
    for (const auto& row : rows) {
      os << format_double(row.value) << "," << format_double(row.sigma_steady)
         << ",";
      if (row.has_extinction) os << format_double(row.extinction);
      os << "," << row.stats.steps << "," << row.stats.rejected << ","
         << row.stats.rhs_evals << "," << row.status << "\n";
    }
    res.outputs.push_back(p);
  }
  write_sidecar(cfg, out_dir, res);
  info(quiet, "sweep: " + std::to_string(n) + " rows");
  return res;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            const std::string& out_dir, bool quiet) {
  switch (cfg.kind) {
    case ScenarioKind::kCase1:
      return scenario_case1(cfg, out_dir, quiet);
    case ScenarioKind::kCase2:
      return scenario_case2(cfg, out_dir, quiet);
    case ScenarioKind::kPde:
      return scenario_pde(cfg, out_dir, quiet);
    case ScenarioKind::kSweep:
      return run_sweep(cfg, out_dir, quiet);
  }
  return {};
}

int run_scenario_file(const std::string& path, const std::string& out_dir,
                      bool quiet, int sweep_workers) {
  ScenarioConfig cfg;
  try {
    cfg = load_scenario(path);
  } catch (const ConfigError& e) {
    for (const auto& msg : e.messages()) std::cerr << msg << "\n";
    return 2;
  }
  ScenarioResult res =
      cfg.kind == ScenarioKind::kSweep
          ? run_sweep(cfg, out_dir, quiet, sweep_workers)
          : run_scenario(cfg, out_dir, quiet);
  if (!res.message.empty()) std::cerr << res.message << "\n";
  return res.exit_code;
}

}  // namespace retflow
