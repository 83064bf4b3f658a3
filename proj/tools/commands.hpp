#pragma once
#include <string>
#include <vector>

#include "config.hpp"

namespace nahm::cli {

extern const std::vector<std::string> kSubcommands;

// Runs one subcommand and writes its artifacts plus summary.json into
// cfg.out_dir. Returns 0 iff every check passed. Compute errors propagate as
// nahm::Error.
int run_command(const std::string& sub, const RunConfig& cfg);

}  // namespace nahm::cli
