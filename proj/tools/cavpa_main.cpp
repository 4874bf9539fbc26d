#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cavpa/config.hpp"
#include "cavpa/scenarios.hpp"

namespace {

constexpr const char* kScenarios[] = {"params", "simulate", "delta",    "optimize",
                                      "scan",   "collective", "validate"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cavity-stimulated photoassociation simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string chosen;
  for (const char* name : kScenarios) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("config", config_path, "key = value config file (optional; defaults apply)")
        ->check(CLI::ExistingFile);
    sub->callback([name, &chosen] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const cavpa::RunConfig cfg =
        config_path.empty() ? cavpa::RunConfig{} : cavpa::load_config_file(config_path);
    return cavpa::scenarios::run_scenario(chosen, cfg, std::cout);
  } catch (const cavpa::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const cavpa::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
