#include "run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>

#include "gllab/csv.hpp"
#include "gllab/errors.hpp"
#include "gllab/hydrodynamic_pde.hpp"
#include "gllab/profile.hpp"
#include "gllab/rare_event_lab.hpp"
#include "gllab/rate_function.hpp"
#include "gllab/rng.hpp"

#ifndef GLLAB_VERSION
#define GLLAB_VERSION "unknown"
#endif

namespace gllab::cli {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

struct KeySpec {
  const char* section;
  const char* key;
  const char* value;
  const char* doc;
};

// Order here is the order of print-defaults and of the manifest.
const KeySpec kSchema[] = {
    {"potential", "kind", "gaussian", "gaussian | quartic"},
    {"potential", "variance", "1", "gaussian: variance of Phi"},
    {"potential", "a", "1", "quartic: phi = a x^2/2 + b x^4/4"},
    {"potential", "b", "0.25", "quartic: quartic coefficient"},
    {"potential", "quad_nodes", "4096", "trapezoid nodes for the single-site integrals"},
    {"potential", "quad_halfwidth", "12", "integration window [-w, w]"},

    {"system", "n_sites", "32", "lattice size N"},
    {"system", "horizon", "0.5", "final time T"},
    {"system", "dt", "0", "time step; 0 picks c/N^2"},
    {"system", "stability_constant", "0", "c in dt <= c/N^2; 0 picks 0.1/max|phi''|"},
    {"system", "seed", "1", "master seed; replica r uses stream (seed, r)"},
    {"system", "samples", "11", "snapshots written by simulate"},

    {"profile", "kind", "equilibrium", "equilibrium | tilted_sine | constant"},
    {"profile", "amplitude", "0.5", "tilted_sine: mean profile a sin(2 pi theta)"},
    {"profile", "value", "0", "constant: mean charge"},

    {"control", "kind", "zero", "zero | constant | sine_pairing | matrix"},
    {"control", "value", "0", "constant: psi everywhere"},
    {"control", "scale", "0", "sine_pairing: target pairing with sin(2 pi theta)"},
    {"control", "breakpoints", "", "matrix: 0 = t_0 < ... < t_K = T, space separated"},
    {"control", "values", "", "matrix: K rows of n_sites values, row-major"},

    {"pde", "n_theta", "64", "grid cells J"},
    {"pde", "n_steps", "0", "time steps; 0 picks the smallest stable count"},
    {"pde", "cfl_safety", "0.9", "dt <= safety * dtheta^2 / max h''"},
    {"pde", "table_nodes", "513", "nodes of the h' interpolation table"},

    {"rate", "field", "", "field CSV to score; empty solves the pde section"},

    {"ldp", "kappa", "1", "F = min(kappa (<mu(T), sin> - target)^2, cap)"},
    {"ldp", "target", "0.3", ""},
    {"ldp", "cap", "1", ""},
    {"ldp", "n_list", "8 16 32 64", "lattice sizes"},
    {"ldp", "replicas", "10000", "Monte Carlo replicas per estimate"},
    {"ldp", "workers", "1", "replica threads"},
    {"ldp", "control_scales", "7", "controls tried for the variational bound"},
    {"ldp", "path_scales", "25", "paths tried for inf F + I"},

    {"output", "dir", "out", "artifact directory (GLLAB_OUTPUT_DIR overrides)"},
};

const std::set<std::string> kManifestKeys = {"version", "command"};

const KeySpec* find_key(const std::string& section, const std::string& key) {
  for (const KeySpec& k : kSchema) {
    if (section == k.section && key == k.key) return &k;
  }
  return nullptr;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& section, const std::string& key, const std::string& why) {
  throw ConfigInvalid(section + "." + key + ": " + why);
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::string str(const char* section, const char* key) const {
    return trim(tree_.get_child(section).get<std::string>(pt::ptree::path_type(key, '\0')));
  }

  double real(const char* section, const char* key) const { return parse_real(section, key, str(section, key)); }
  double positive(const char* section, const char* key) const {
    const double v = real(section, key);
    if (!(v > 0.0)) bad(section, key, "must be positive");
    return v;
  }
  double nonnegative(const char* section, const char* key) const {
    const double v = real(section, key);
    if (!(v >= 0.0)) bad(section, key, "must be nonnegative");
    return v;
  }
  std::uint64_t count(const char* section, const char* key, bool allow_zero) const {
    const std::uint64_t v = parse_count(section, key, str(section, key));
    if (!allow_zero && v == 0) bad(section, key, "must be positive");
    return v;
  }
  std::vector<double> reals(const char* section, const char* key) const {
    std::vector<double> out;
    std::istringstream is(str(section, key));
    for (std::string tok; is >> tok;) out.push_back(parse_real(section, key, tok));
    return out;
  }
  std::vector<std::size_t> counts(const char* section, const char* key) const {
    std::vector<std::size_t> out;
    std::istringstream is(str(section, key));
    for (std::string tok; is >> tok;) {
      const std::uint64_t v = parse_count(section, key, tok);
      if (v == 0) bad(section, key, "entries must be positive");
      out.push_back(v);
    }
    return out;
  }
  std::string choice(const char* section, const char* key, std::initializer_list<const char*> allowed) const {
    const std::string v = str(section, key);
    for (const char* a : allowed) {
      if (v == a) return v;
    }
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    bad(section, key, "'" + v + "' is not one of " + list);
  }

 private:
  static double parse_real(const char* section, const char* key, const std::string& s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
      bad(section, key, "'" + s + "' is not a finite number");
    return v;
  }
  static std::uint64_t parse_count(const char* section, const char* key, const std::string& s) {
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
      bad(section, key, "'" + s + "' is not a nonnegative integer");
    return v;
  }

  const pt::ptree& tree_;
};

pt::ptree default_tree() {
  pt::ptree t;
  for (const KeySpec& k : kSchema) {
    if (!t.get_child_optional(k.section)) t.add_child(k.section, pt::ptree());
    t.get_child(k.section).put(pt::ptree::path_type(k.key, '\0'), k.value);
  }
  return t;
}

RunConfig interpret(const pt::ptree& tree) {
  const Reader r(tree);
  RunConfig c;
  c.resolved = tree;

  c.potential.kind = r.choice("potential", "kind", {"gaussian", "quartic"});
  c.potential.variance = r.positive("potential", "variance");
  c.potential.a = r.real("potential", "a");
  c.potential.b = r.nonnegative("potential", "b");
  if (c.potential.kind == "quartic" && c.potential.b == 0.0 && !(c.potential.a > 0.0))
    bad("potential", "a", "must be positive when b = 0");
  c.potential.quad_nodes = r.count("potential", "quad_nodes", false);
  if (c.potential.quad_nodes < 16) bad("potential", "quad_nodes", "must be at least 16");
  c.potential.quad_halfwidth = r.positive("potential", "quad_halfwidth");

  c.system.n_sites = r.count("system", "n_sites", false);
  c.system.horizon = r.nonnegative("system", "horizon");
  c.system.dt = r.nonnegative("system", "dt");
  c.system.stability_constant = r.nonnegative("system", "stability_constant");
  c.system.seed = r.count("system", "seed", true);
  c.system.samples = r.count("system", "samples", false);

  c.profile.kind = r.choice("profile", "kind", {"equilibrium", "tilted_sine", "constant"});
  c.profile.amplitude = r.real("profile", "amplitude");
  c.profile.value = r.real("profile", "value");

  c.control.kind = r.choice("control", "kind", {"zero", "constant", "sine_pairing", "matrix"});
  c.control.value = r.real("control", "value");
  c.control.scale = r.real("control", "scale");
  c.control.breakpoints = r.reals("control", "breakpoints");
  c.control.values = r.reals("control", "values");
  if (c.control.kind == "matrix") {
    const auto& bp = c.control.breakpoints;
    if (bp.size() < 2) bad("control", "breakpoints", "needs at least two entries");
    if (bp.front() != 0.0) bad("control", "breakpoints", "must start at 0");
    for (std::size_t i = 1; i < bp.size(); ++i) {
      if (!(bp[i] > bp[i - 1])) bad("control", "breakpoints", "must be increasing");
    }
    if (std::abs(bp.back() - c.system.horizon) > 1e-12 * (1.0 + c.system.horizon))
      bad("control", "breakpoints", "must end at system.horizon");
    if (c.control.values.size() != (bp.size() - 1) * c.system.n_sites)
      bad("control", "values", "needs (breakpoints - 1) * n_sites entries");
  }

  c.pde.n_theta = r.count("pde", "n_theta", false);
  if (c.pde.n_theta < 4) bad("pde", "n_theta", "must be at least 4");
  c.pde.n_steps = r.count("pde", "n_steps", true);
  c.pde.cfl_safety = r.positive("pde", "cfl_safety");
  if (c.pde.cfl_safety > 1.0) bad("pde", "cfl_safety", "must not exceed 1");
  c.pde.table_nodes = r.count("pde", "table_nodes", false);
  if (c.pde.table_nodes < 3) bad("pde", "table_nodes", "must be at least 3");

  c.rate_field = r.str("rate", "field");

  c.ldp.kappa = r.positive("ldp", "kappa");
  c.ldp.target = r.real("ldp", "target");
  c.ldp.cap = r.positive("ldp", "cap");
  c.ldp.n_list = r.counts("ldp", "n_list");
  if (c.ldp.n_list.empty()) bad("ldp", "n_list", "must list at least one size");
  c.ldp.replicas = r.count("ldp", "replicas", false);
  if (c.ldp.replicas < 2) bad("ldp", "replicas", "must be at least 2");
  c.ldp.workers = r.count("ldp", "workers", false);
  c.ldp.control_scales = r.count("ldp", "control_scales", false);
  c.ldp.path_scales = r.count("ldp", "path_scales", false);

  c.output_dir = r.str("output", "dir");
  if (c.output_dir.empty()) bad("output", "dir", "must not be empty");
  return c;
}

// --- pipelines --------------------------------------------------------------

Potential make_potential(const PotentialSpec& s) {
  QuadratureSpec q;
  q.node_count = s.quad_nodes;
  q.domain_halfwidth = s.quad_halfwidth;
  if (s.kind == "quartic") return Potential::quartic(s.a, s.b, q);
  return Potential::gaussian(s.variance, q);
}

ProfileMeasure make_profile(const Potential& pot, const ProfileSpec& s) {
  if (s.kind == "tilted_sine") return tilted_sine_profile(pot, s.amplitude);
  if (s.kind == "constant") return constant_profile(pot, s.value);
  return equilibrium_profile(pot);
}

std::vector<double> scale_grid(double top, std::size_t n) {
  if (n == 1) return {top};
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = top * static_cast<double>(i) / static_cast<double>(n - 1);
  return s;
}

double sine(double theta) { return std::sin(2.0 * std::numbers::pi * theta); }

std::function<double(double, double)> control_function(const RunConfig& c, const Potential& pot) {
  if (c.control.kind == "constant") return [v = c.control.value](double, double) { return v; };
  const PathFamily fam = sine_pairing_family(pot, c.system.horizon, {c.control.scale}, c.pde.n_theta);
  return [u = fam.u, s = c.control.scale](double t, double th) { return s * u(t, th); };
}

SimpleControl lattice_control(const RunConfig& c, const Potential& pot) {
  const std::size_t n = c.system.n_sites;
  const double t = c.system.horizon;
  if (c.control.kind == "constant") return SimpleControl::constant(n, t, c.control.value);
  if (c.control.kind == "matrix") return SimpleControl(c.control.breakpoints, n, c.control.values);
  const auto u = control_function(c, pot);
  return discretize_control(ControlGrid::from_function(n, c.pde.n_theta, t, u), n);
}

ControlGrid field_control(const RunConfig& c, const Potential& pot, std::size_t steps) {
  const std::size_t j = c.pde.n_theta;
  const double t = c.system.horizon;
  if (c.control.kind == "zero") return ControlGrid::zero(steps, j, t);
  if (c.control.kind == "matrix") {
    const SimpleControl psi(c.control.breakpoints, c.system.n_sites, c.control.values);
    return minimal_control_embedding(psi, steps, j);
  }
  return ControlGrid::from_function(steps, j, t, control_function(c, pot));
}

DensityField solve_configured(const RunConfig& c, const Potential& pot) {
  if (!(c.system.horizon > 0.0)) bad("system", "horizon", "must be positive for pde");
  const ProfileMeasure prof = make_profile(pot, c.profile);
  const auto m0 = sample_on_grid(prof.conditional_mean, c.pde.n_theta);
  const std::size_t steps =
      c.pde.n_steps > 0 ? c.pde.n_steps : stable_step_count(m0, pot, c.system.horizon, c.pde.cfl_safety);
  PdeOptions opts;
  opts.cfl_safety = c.pde.cfl_safety;
  opts.table_nodes = c.pde.table_nodes;
  return solve_controlled_pde(m0, field_control(c, pot, steps), pot, c.system.horizon, opts);
}

DensityField read_field_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) bad("rate", "field", "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("t,", 0) != 0) bad("rate", "field", "missing field header in " + path.string());
  const std::size_t j = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  DensityField f;
  f.n_theta = j;
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(row, cell, ',')) {
      double v = 0.0;
      const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size())
        bad("rate", "field", "unparsable value '" + cell + "' in " + path.string());
      if (col == 0) times.push_back(v);
      else f.values.push_back(v);
      ++col;
    }
    if (col != j + 1) bad("rate", "field", "ragged row in " + path.string());
  }
  if (times.size() < 2) bad("rate", "field", "needs at least two time levels");
  f.n_steps = times.size() - 1;
  f.horizon = times.back();
  return f;
}

template <class Writer>
fs::path emit(const fs::path& dir, const char* name, Writer&& write) {
  const fs::path p = dir / name;
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  write(os);
  if (!os) throw Error("write failed for " + p.string());
  return p;
}

}  // namespace

const char* command_name(Command c) {
  switch (c) {
    case Command::simulate: return "simulate";
    case Command::pde: return "pde";
    case Command::rate: return "rate";
    case Command::ldp: return "ldp";
  }
  return "?";
}

std::string defaults_ini() {
  std::ostringstream os;
  const char* current = "";
  for (const KeySpec& k : kSchema) {
    if (std::string(current) != k.section) {
      os << (current[0] ? "\n" : "") << "[" << k.section << "]\n";
      current = k.section;
    }
    if (k.doc[0]) os << "; " << k.doc << "\n";
    os << k.key << " = " << k.value << "\n";
  }
  return os.str();
}

RunConfig default_config() { return interpret(default_tree()); }

RunConfig load_config(std::istream& in) {
  pt::ptree user;
  try {
    pt::read_ini(in, user);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigInvalid(std::string("config does not parse: ") + e.message() + " (line " +
                        std::to_string(e.line()) + ")");
  }
  pt::ptree tree = default_tree();
  for (const auto& [section, body] : user) {
    if (body.empty() && !body.data().empty())
      throw ConfigInvalid(section + ": keys must sit inside a [section]");
    if (section == "manifest") {
      for (const auto& [key, value] : body) {
        if (!kManifestKeys.count(key)) throw ConfigInvalid("manifest." + key + ": unknown key");
      }
      continue;
    }
    for (const auto& [key, value] : body) {
      if (!find_key(section, key)) throw ConfigInvalid(section + "." + key + ": unknown key");
      tree.get_child(section).put(pt::ptree::path_type(key, '\0'), value.data());
    }
  }
  return interpret(tree);
}

RunConfig load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config file " + path.string());
  return load_config(in);
}

RunResult run(Command command, const RunConfig& config, const std::string& output_override) {
  RunResult res;
  res.output_dir = output_override.empty() ? fs::path(config.output_dir) : fs::path(output_override);
  std::error_code ec;
  fs::create_directories(res.output_dir, ec);
  if (ec) throw Error("cannot create output directory " + res.output_dir.string() + ": " + ec.message());

  const Potential pot = make_potential(config.potential);
  const fs::path& dir = res.output_dir;

  switch (command) {
    case Command::simulate: {
      SimConfig sim;
      sim.n_sites = config.system.n_sites;
      sim.horizon = config.system.horizon;
      sim.dt = config.system.dt;
      sim.seed = config.system.seed;
      sim.stability_constant = config.system.stability_constant;
      try {
        sim.validate(pot);
      } catch (const InvalidInput& e) {
        bad("system", "dt", e.what());
      }
      const ProfileMeasure prof = make_profile(pot, config.profile);
      Rng rng = make_stream(sim.seed, 0);
      const LatticeState x0 = sample_initial_from_profile(prof, sim.n_sites, rng);
      const auto times = even_sample_times(sim.horizon, config.system.samples);
      std::optional<SimpleControl> psi;
      if (config.control.kind != "zero") psi = lattice_control(config, pot);
      const TrajectoryRecord rec = simulate_trajectory(pot, sim, x0, psi ? &*psi : nullptr, times, rng);
      res.files.push_back(emit(dir, "trajectory.csv", [&](std::ostream& os) { write_trajectory_csv(os, rec); }));
      const MeasurePath path = path_from_trajectory(rec);
      res.files.push_back(emit(dir, "measure_path.csv", [&](std::ostream& os) { write_measure_path_csv(os, path); }));
      break;
    }
    case Command::pde: {
      const DensityField f = solve_configured(config, pot);
      res.files.push_back(emit(dir, "field.csv", [&](std::ostream& os) { write_field_csv(os, f); }));
      break;
    }
    case Command::rate: {
      DensityField f;
      if (config.rate_field.empty()) {
        f = solve_configured(config, pot);
        res.files.push_back(emit(dir, "field.csv", [&](std::ostream& os) { write_field_csv(os, f); }));
      } else {
        f = read_field_csv(config.rate_field);
      }
      const RateDecomposition r = rate(f, pot);
      res.files.push_back(emit(dir, "rate.csv", [&](std::ostream& os) { write_rate_csv(os, r); }));
      break;
    }
    case Command::ldp: {
      const double t = config.system.horizon;
      if (!(t > 0.0)) bad("system", "horizon", "must be positive for ldp");
      const Functional f = Functional::quadratic_pairing(sine, config.ldp.kappa, config.ldp.target, config.ldp.cap);
      const PathFamily controls =
          sine_pairing_family(pot, t, scale_grid(config.ldp.target, config.ldp.control_scales), config.pde.n_theta);
      const PathFamily paths =
          sine_pairing_family(pot, t, scale_grid(config.ldp.target, config.ldp.path_scales), config.pde.n_theta);
      TrendOptions opt;
      opt.replicas = config.ldp.replicas;
      opt.workers = config.ldp.workers;
      opt.seed = config.system.seed;
      opt.dt_constant = config.system.stability_constant;
      const auto rows = ldp_trend_study(f, config.ldp.n_list, pot, t, make_profile(pot, config.profile), controls,
                                        paths, opt);
      res.files.push_back(emit(dir, "trend.csv", [&](std::ostream& os) { write_trend_csv(os, rows); }));
      break;
    }
  }

  pt::ptree manifest;
  manifest.put("manifest.version", GLLAB_VERSION);
  manifest.put("manifest.command", command_name(command));
  for (const auto& [section, body] : config.resolved) manifest.add_child(section, body);
  manifest.get_child("output").put("dir", res.output_dir.string());
  res.files.push_back(emit(dir, "manifest.ini", [&](std::ostream& os) { pt::write_ini(os, manifest); }));
  return res;
}

}  // namespace gllab::cli
