#pragma once

// Config file handling and the pipelines behind each subcommand. The config
// is an INI file; every key has a default listed by print-defaults, and a
// key outside that list is rejected.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace gllab::cli {

enum class Command { simulate, pde, rate, ldp };

const char* command_name(Command c);

struct PotentialSpec {
  std::string kind;  // gaussian | quartic
  double variance;
  double a, b;
  std::size_t quad_nodes;
  double quad_halfwidth;
};

struct SystemSpec {
  std::size_t n_sites;
  double horizon;
  double dt;
  double stability_constant;
  std::uint64_t seed;
  std::size_t samples;
};

struct ProfileSpec {
  std::string kind;  // equilibrium | tilted_sine | constant
  double amplitude;
  double value;
};

struct ControlSpec {
  std::string kind;  // zero | constant | sine_pairing | matrix
  double value;
  double scale;
  std::vector<double> breakpoints;
  std::vector<double> values;  // row-major, pieces x n_sites
};

struct PdeSpec {
  std::size_t n_theta;
  std::size_t n_steps;  // 0: smallest stable count
  double cfl_safety;
  std::size_t table_nodes;
};

struct LdpSpec {
  double kappa, target, cap;
  std::vector<std::size_t> n_list;
  std::size_t replicas;
  std::size_t workers;
  std::size_t control_scales;
  std::size_t path_scales;
};

struct RunConfig {
  PotentialSpec potential;
  SystemSpec system;
  ProfileSpec profile;
  ControlSpec control;
  PdeSpec pde;
  std::string rate_field;  // field CSV to score; empty solves the PDE
  LdpSpec ldp;
  std::string output_dir;

  // Every key with its value as written, defaults filled in.
  boost::property_tree::ptree resolved;
};

/// The default config, with a comment line per key.
std::string defaults_ini();

/// Parses and validates; throws ConfigInvalid naming the key at fault.
RunConfig load_config(std::istream& in);
RunConfig load_config_file(const std::filesystem::path& path);
RunConfig default_config();

struct RunResult {
  std::filesystem::path output_dir;
  std::vector<std::filesystem::path> files;  // CSVs, then manifest.ini
};

/// `output_override`, when non-empty, replaces output.dir.
RunResult run(Command command, const RunConfig& config, const std::string& output_override = "");

}  // namespace gllab::cli
