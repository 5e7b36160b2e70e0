#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cw/cli/config.hpp"

namespace cw::cli {

/// classify, kesten-table, simulate, limit-check, regime, scan-mean, mean-decay,
/// break-recurrence, valley, hit-check
const std::vector<std::string>& subcommand_names();

/// Runs one subcommand and writes its artifacts plus manifest.json into `out`.
/// Throws ConfigError for bad or missing keys and other cw::Error types for
/// runtime failures. `log` receives a short human-readable summary.
void run_subcommand(std::string_view name, Config& config, const std::filesystem::path& out,
                    std::ostream& log);

}  // namespace cw::cli
