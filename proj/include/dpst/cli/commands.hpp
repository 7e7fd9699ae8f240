// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "dpst/system_sim.hpp"

namespace dpst::cli {

struct CommandOptions {
  std::optional<std::filesystem::path> config;  // defaults when unset
  std::optional<std::uint64_t> seed;            // overrides scenario.master_seed
  std::size_t threads = 1;
  std::optional<std::string> mode;              // correlated|rayleigh|dpst|optimum|all
  std::filesystem::path out_dir = ".";
};

// Each command returns a process exit code: 0 on success, 2 for invalid
// configuration or arguments, 1 for any other failure. Diagnostics go to
// `err`, human-readable results to `out`.
int cmd_simulate(const CommandOptions &opts, std::ostream &out, std::ostream &err);
int cmd_optimize_delay(const CommandOptions &opts, std::ostream &out, std::ostream &err);
int cmd_channel_stats(const CommandOptions &opts, std::ostream &out, std::ostream &err);

/// "value,cumulative_probability" header, one row per sorted value.
void write_cdf_csv(const std::filesystem::path &path, const sim::CdfSeries &cdf);

/// Worker count from DPST_SIM_THREADS, or `fallback` when unset.
std::size_t threads_from_env(std::size_t fallback = 1);

}  // namespace dpst::cli
