#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "gllab/errors.hpp"
#include "run_config.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
  using gllab::cli::Command;

  CLI::App app{"Ginzburg-Landau lattice lab"};
  app.require_subcommand(1);
  std::string config_path;

  struct Sub {
    const char* name;
    const char* help;
    Command command;
  };
  const Sub subs[] = {
      {"simulate", "run one lattice trajectory and write its empirical measure path", Command::simulate},
      {"pde", "solve the controlled hydrodynamic equation", Command::pde},
      {"rate", "score a density path with the rate function", Command::rate},
      {"ldp", "Laplace versus variational trend over lattice sizes", Command::ldp},
  };
  std::vector<std::pair<CLI::App*, Command>> runners;
  for (const Sub& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("-c,--config", config_path, "INI config; missing keys take their defaults");
    runners.emplace_back(sub, s.command);
  }
  CLI::App* defaults = app.add_subcommand("print-defaults", "print every config key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  if (defaults->parsed()) {
    std::cout << gllab::cli::defaults_ini();
    return 0;
  }

  try {
    const gllab::cli::RunConfig cfg =
        config_path.empty() ? gllab::cli::default_config() : gllab::cli::load_config_file(config_path);
    const char* env = std::getenv("GLLAB_OUTPUT_DIR");
    for (const auto& [sub, command] : runners) {
      if (!sub->parsed()) continue;
      const auto res = gllab::cli::run(command, cfg, env ? env : "");
      for (const auto& f : res.files) std::cout << f.string() << "\n";
    }
  } catch (const gllab::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const gllab::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const gllab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
