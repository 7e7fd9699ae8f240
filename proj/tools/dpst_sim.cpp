// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <iostream>

#include "dpst/cli/commands.hpp"
#include "dpst/error.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Delay-diversity pulse-shaped MIMO transmission simulator"};
  app.require_subcommand(1);

  dpst::cli::CommandOptions opts;
  std::string config;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  std::string mode;
  std::string out_dir = ".";

  const auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", config, "INI config file ([scenario] [shaping] [search] [radio])")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed, overrides scenario.master_seed");
    sub->add_option("--threads", threads, "worker threads (default: DPST_SIM_THREADS or 1)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--mode", mode, "correlated|rayleigh|dpst|optimum|all")
        ->check(CLI::IsMember({"correlated", "rayleigh", "dpst", "optimum", "all"}));
    sub->add_option("--out-dir", out_dir, "directory for CSV and manifest output");
  };
  CLI::App *simulate = app.add_subcommand("simulate", "run the seven-cell Monte-Carlo and write CDFs");
  CLI::App *optimize = app.add_subcommand("optimize-delay", "search the per-antenna fractional delays");
  CLI::App *stats = app.add_subcommand("channel-stats", "mean rank and condition number per channel mode");
  for (CLI::App *sub : {simulate, optimize, stats}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  CLI::App *sub = app.get_subcommands().front();
  if (!config.empty()) opts.config = config;
  if (sub->count("--seed")) opts.seed = seed;
  if (!mode.empty()) opts.mode = mode;
  opts.out_dir = out_dir;
  try {
    opts.threads = threads > 0 ? threads : dpst::cli::threads_from_env(1);
  } catch (const dpst::ConfigError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  if (sub == simulate) return dpst::cli::cmd_simulate(opts, std::cout, std::cerr);
  if (sub == optimize) return dpst::cli::cmd_optimize_delay(opts, std::cout, std::cerr);
  return dpst::cli::cmd_channel_stats(opts, std::cout, std::cerr);
}
