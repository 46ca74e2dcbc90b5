#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmreach/baseline.hpp"
#include "tmreach/closed_loop.hpp"
#include "tmreach/op_model.hpp"

namespace tmreach {

/// Input-document error; the message starts with "<file>: <location>".
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a scenario document describes.
///
/// {
///   "state_dim": 1, "action_dim": 1,
///   "dynamics": [[{"coef": 1.0, "state": [1], "action": [0]}, ...], ...],
///   "initial_box": [[0.9, 1.1]],
///   "unsafe": [[[2.0, null]]],           // null = unbounded side
///   "goal": [[0.0, 0.0]], "deadzone": [0.1],
///   "steps": 60,
///   "network": "net.json",               // relative to the scenario file
///   "options": {"order": 2, "bernstein_order": 4, "bernstein_steps": 200,
///               "reinit": 1, "noise": [0.0], "mode": "optimized"},
///   "partition": {"bounds": [[0, 1]], "cells": [10]},
///   "checkpoints": [100, 250, 500],
///   "rollouts_per_cell": 20
/// }
struct Scenario {
  DynamicsSpec dynamics;
  Box initial_box;
  SafetySpec safety;
  std::size_t steps = 60;
  ReachOptions options;
  std::optional<std::string> network_path;
  std::optional<Box> partition_bounds;
  std::vector<std::size_t> cells_per_dim;
  std::vector<std::size_t> checkpoints;
  std::size_t rollouts_per_cell = kDefaultRolloutsPerCell;
};

/// `source` names the document in error messages; `base_dir` resolves the
/// relative network path.
Scenario parse_scenario(const std::string& text, const std::string& source, const std::string& base_dir);
Scenario load_scenario(const std::string& path);

/// One state per row; a non-numeric first row is treated as a header.
std::vector<std::vector<double>> parse_samples_csv(const std::string& text, const std::string& source);
std::vector<std::vector<double>> load_samples_csv(const std::string& path);

/// Rows "step,var,lo,hi".
void write_tube_csv(std::ostream& os, const ReachTube& tube);
std::string verdict_json(const Verdict& verdict, const ReachTube& tube);
std::string report_json(const ReliabilityReport& report, const OperationalProfile& profile);
std::string profile_json(const OperationalProfile& profile);

/// Shortest round-trip decimal form of a double.
std::string format_real(double v);

}  // namespace tmreach
