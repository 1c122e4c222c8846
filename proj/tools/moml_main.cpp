#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "moml/cli.hpp"
#include "moml/suite.hpp"

namespace {

void list_problems() {
  for (const auto& id : moml::suite::problem_ids()) {
    std::cout << id << "\n";
    for (const auto& param : moml::suite::problem_parameters(id)) {
      std::cout << "  " << param.name << " = " << moml::cli::format_real(param.default_value)
                << "  # " << param.description << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-objective bi-level optimisation runner"};
  app.require_subcommand(0, 1);
  bool show_problems = false;
  app.add_flag("--list-problems", show_problems, "List suite problems and their parameters");

  std::string config_path;
  std::string out_dir;
  std::string seeds;
  CLI::App* run = app.add_subcommand("run", "Execute a job described by a config file");
  run->add_option("config", config_path, "Path to the key = value config file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides `out`)");
  run->add_option("--seeds", seeds, "Comma-separated seeds (overrides `seed`/`seeds`)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : moml::cli::kExitConfigError;
  }

  if (show_problems) {
    list_problems();
    if (!*run) return moml::cli::kExitOk;
  }
  if (!*run) {
    std::cerr << app.help();
    return moml::cli::kExitConfigError;
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read config " << config_path << "\n";
    return moml::cli::kExitConfigError;
  }
  std::ostringstream text;
  text << in.rdbuf();

  auto parsed = moml::cli::parse_config(text.str());
  if (!parsed.ok()) {
    for (const auto& error : parsed.errors) std::cerr << config_path << ": " << error << "\n";
    return moml::cli::kExitConfigError;
  }
  moml::cli::RunConfig config = std::move(*parsed.config);
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (!seeds.empty()) {
    auto list = moml::cli::parse_seed_list(seeds);
    if (!list) {
      std::cerr << "error: --seeds expects comma-separated non-negative integers\n";
      return moml::cli::kExitConfigError;
    }
    config.seeds = std::move(*list);
  }
  return moml::cli::execute(config, std::cerr);
}
