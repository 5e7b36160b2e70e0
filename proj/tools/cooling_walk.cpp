#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "cw/cli/commands.hpp"
#include "cw/cli/config.hpp"
#include "cw/error.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulations and limit-law checks for walks whose random environment is resampled on a cooling schedule"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  for (const std::string& name : cw::cli::subcommand_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config file")->required();
    sub->add_option("--set", overrides, "override a config key (key=value)");
    sub->add_option("--out", out_dir, "output directory")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    cw::cli::Config config = cw::cli::Config::load(config_path);
    for (const std::string& o : overrides) config.apply_override(o);
    cw::cli::run_subcommand(name, config, out_dir, std::cout);
  } catch (const cw::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
