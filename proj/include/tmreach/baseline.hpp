#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tmreach/closed_loop.hpp"
#include "tmreach/network.hpp"
#include "tmreach/op_model.hpp"

namespace tmreach {

struct Rollout {
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> actions;
  bool safe = true;
  std::optional<std::size_t> violation_step;
};

/// Called with (step, observation) before the controller sees the state;
/// may perturb the observation (sensor noise).
using ObservationHook = std::function<void(std::size_t, std::vector<double>&)>;

/// Exact double-precision closed-loop simulation: a_t = net(x_t),
/// x_{t+1} = f(x_t, a_t). The state freezes once it enters the deadzone
/// (spec.capture_region()); non-finite states count as unsafe.
Rollout simulate_rollout(const Network& net, const DynamicsSpec& dyn, std::span<const double> x0,
                         std::size_t steps, const SafetySpec& spec, const ObservationHook& observe = {});

inline constexpr std::size_t kDefaultRolloutsPerCell = 20;

/// Uniform double in [0, 1) from the top 53 bits of a 64-bit draw.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1p-53; }

/// Generator for cell `cell` of a run seeded with `seed`; independent of
/// evaluation order.
std::mt19937_64 cell_rng(std::uint64_t seed, std::size_t cell);

/// Uniform point in a finite box.
std::vector<double> sample_in_box(const Box& box, std::mt19937_64& rng);

struct PointEstimate {
  double failure_probability = 0.0;
  /// Unsafe fraction per cell; nullopt for skipped zero-mass cells.
  std::vector<std::optional<double>> cell_failure;
};

/// sum_i mass_i * (unsafe rollouts in cell i / rollouts_per_cell), initial
/// points uniform in each cell with positive mass.
PointEstimate point_estimate(const Network& net, const DynamicsSpec& dyn, const SafetySpec& spec,
                             const OperationalProfile& profile, std::size_t steps,
                             std::size_t rollouts_per_cell = kDefaultRolloutsPerCell, std::uint64_t seed = 0,
                             std::size_t jobs = 1);

}  // namespace tmreach
