#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tmreach/io.hpp"
#include "tmreach/network.hpp"

namespace tmreach::cli {

enum ExitCode : int { kOk = 0, kPossiblyUnsafe = 1, kInputError = 2 };

/// Fully resolved inputs of one command: command-line flags override
/// scenario values, which override defaults. Every file is loaded and
/// validated before any computation starts.
struct RunConfig {
  std::string command;
  std::string scenario_path;
  std::string network_path;
  std::optional<std::string> samples_path;
  std::string out_dir = ".";
  Scenario scenario;
  std::optional<Network> network;
  std::vector<std::vector<double>> samples;
  Box partition_bounds;
  std::vector<std::size_t> cells_per_dim;
  std::vector<std::size_t> checkpoints;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool all_cells = false;
};

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Evenly spaced prefix sizes ending at n (at most `count` of them).
std::vector<std::size_t> default_checkpoints(std::size_t n, std::size_t count = 10);

/// Verdict per cell; cells with zero mass are skipped unless `all_cells`.
std::vector<std::optional<Verdict>> verify_cells(const Network& net, const Scenario& scenario,
                                                 const OperationalProfile& profile, bool all_cells,
                                                 std::size_t jobs);

}  // namespace tmreach::cli
