#pragma once

// Experiment runner: binds a JSON config to a simulation or verification
// subcommand, writes CSV artifacts and a manifest, prints one status line.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace spme {

namespace exit_code {
inline constexpr int pass = 0;
inline constexpr int fail = 1;
inline constexpr int config = 2;
inline constexpr int blow_up = 3;
inline constexpr int error = 4;
}  // namespace exit_code

struct RunOptions {
  std::string subcommand;
  std::filesystem::path config;
  std::filesystem::path out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

/// Runs one subcommand. Status lines go to `out`, diagnostics to `err`.
int run(const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv with CLI11 and dispatches to run().
int run_cli(int argc, char** argv);

/// Seed precedence: flag, then config, then SPME_SEED, then 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> flag,
                           std::optional<std::uint64_t> config_seed);

std::string sha256_hex(const std::string& data);

}  // namespace spme
