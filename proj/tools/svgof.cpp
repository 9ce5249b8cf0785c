// svgof command-line front end.
//
//   svgof <simulate|estimate|gof|mc-study> --config <file>
//         [--seed <u64>] [--workers <k>] [--out <dir>]

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "svgof/cli.hpp"

namespace {

void add_command(CLI::App& app, const std::string& name,
                 const std::string& desc, svgof::RunConfig& rc,
                 std::string& config_file, std::uint64_t& seed, bool& has_seed,
                 unsigned& workers, bool& has_workers, std::string& out_dir) {
  CLI::App* sub = app.add_subcommand(name, desc);
  sub->add_option("--config", config_file, "run configuration file")
      ->required();
  sub->add_option("--seed", seed, "master seed (overrides config)")
      ->each([&has_seed](const std::string&) { has_seed = true; });
  sub->add_option("--workers", workers, "worker threads (overrides config)")
      ->each([&has_workers](const std::string&) { has_workers = true; });
  sub->add_option("--out", out_dir, "output directory");
  sub->callback([&rc, name] { rc.command = name; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic volatility diffusions: simulation, estimation and "
               "goodness-of-fit testing"};
  app.require_subcommand(1);

  svgof::RunConfig rc;
  std::string config_file;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  bool has_seed = false, has_workers = false;

  add_command(app, "simulate", "generate a sample path", rc, config_file, seed,
              has_seed, workers, has_workers, out_dir);
  add_command(app, "estimate", "fit a model to a series", rc, config_file,
              seed, has_seed, workers, has_workers, out_dir);
  add_command(app, "gof", "run one goodness-of-fit test", rc, config_file,
              seed, has_seed, workers, has_workers, out_dir);
  add_command(app, "mc-study", "Monte Carlo size/power study", rc, config_file,
              seed, has_seed, workers, has_workers, out_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    rc.cfg = svgof::parse_config_file(config_file);
    if (!out_dir.empty()) rc.out_dir = out_dir;
    if (has_seed) rc.seed_override = seed;
    if (has_workers) rc.workers_override = workers;
    return svgof::run(rc);
  } catch (const std::exception& e) {
    std::cerr << "svgof: " << e.what() << "\n";
    return 1;
  }
}
