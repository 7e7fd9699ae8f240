// SPDX-License-Identifier: Apache-2.0
//
// INI-style run configuration with four sections: [scenario], [shaping],
// [search] and [radio]. Parsing is strict: unknown sections or keys, bad
// types and out-of-range values raise ConfigError naming "section.key".
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "dpst/system_sim.hpp"

namespace dpst::cli {

struct RunConfig {
  sim::ScenarioConfig scenario;
  /// Set when the file gave delays in nanoseconds; the scenario delays are
  /// already converted to symbol-period units.
  std::optional<double> assumed_symbol_period_ns;

  bool operator==(const RunConfig &) const = default;
};

RunConfig parse_config_string(std::string_view text);
RunConfig parse_config_file(const std::filesystem::path &path);

/// Every key with its resolved value. Delays are always written in
/// symbol-period units, so the output parses back to the same scenario.
std::string serialize_config(const RunConfig &cfg);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace dpst::cli
