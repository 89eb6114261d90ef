/**
 *  @file cli.hpp
 *  @brief Batch front-end: subcommand dispatch, artifact writing and manifests
 */
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lpsk {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_divergence = 3,
    exit_infeasible = 4,
};

/// Lowercase hex SHA-256 of @p data.
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

/**
 *  @brief Runs one invocation, e.g. {"lpsk", "montecarlo", "--config", "c.ini", "--out", "dir"}
 *
 *  Diagnostics go to @p err, short summaries to @p out. Never throws.
 */
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lpsk
