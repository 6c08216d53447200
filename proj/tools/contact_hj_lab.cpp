#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "contact_hj/lab.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Convergence experiments for contact Hamilton-Jacobi equations on the circle",
               "contact-hj-lab"};
  std::string command, config;
  std::optional<std::string> out;
  std::optional<std::int64_t> seed;
  app.add_option("command", command, "convergence, properties or critical")
      ->required()
      ->check(CLI::IsMember({"convergence", "properties", "critical"}));
  app.add_option("--config", config, "experiment file (TOML)")->required();
  app.add_option("--out", out, "output directory (overrides [output] dir)");
  app.add_option("--seed", seed, "seed for randomized property scenarios");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return contact_hj::exit_config_error;
  }
  return contact_hj::run_command(command, config, out, seed, std::cout, std::cerr);
}
