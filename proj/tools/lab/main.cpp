#include <CLI11.hpp>
#include <iostream>

#include "config.hpp"
#include "experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ckn-lab: numerical experiments for the weighted elliptic equation"};
  app.require_subcommand(1);

  std::string config_path;
  bool dump_trials = false;
  auto* run = app.add_subcommand("run", "run the experiment named in a config file");
  run->add_option("config", config_path, "key = value config file")->required();
  run->add_flag("--dump-trials", dump_trials, "write per-trial CSV for randomized suites");
  auto* list = app.add_subcommand("list", "list experiments");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (list->parsed()) {
    lab::list_experiments(std::cout);
    return 0;
  }
  lab::Config cfg;
  try {
    cfg = lab::Config::load(config_path);
  } catch (const lab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }
  return lab::run_config(cfg, lab::RunOptions{dump_trials}, std::cout, std::cerr);
}
