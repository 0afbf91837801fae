#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Homotopy solver for the drift-diffusion system on a thin strip"};
  app.require_subcommand(1);

  std::string config;
  const struct {
    const char* name;
    const char* help;
  } verbs[] = {
      {"audit", "check the solvability hypotheses and write bounds.json"},
      {"solve0", "solve the decoupled lambda = 0 system and write fields_lambda0.csv"},
      {"trace", "follow the homotopy to lambda = 1 and write curve.csv and fields_lambda1.csv"},
  };
  for (const auto& v : verbs) {
    app.add_subcommand(v.name, v.help)->add_option("--config", config, "JSON configuration file")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return ddh::cli::config_error;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  return ddh::cli::run_verb(verb, std::filesystem::path(config), std::cerr);
}
