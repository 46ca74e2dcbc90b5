#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tmreach/interval.hpp"
#include "tmreach/network.hpp"
#include "tmreach/taylor_model.hpp"

namespace tmreach {

/// Axis-aligned box, one interval per state variable. Unbounded sides are
/// represented by infinite endpoints.
using Box = std::vector<Interval>;

bool box_contains(const Box& box, std::span<const double> x);
bool boxes_intersect(const Box& a, const Box& b);

/// coefficient * prod_j x_j^state_exponents[j] * prod_j a_j^action_exponents[j]
struct TransitionTerm {
  double coefficient = 0.0;
  Exponents state_exponents;
  Exponents action_exponents;

  unsigned degree() const { return total_degree(state_exponents) + total_degree(action_exponents); }
};

inline constexpr unsigned kDefaultMaxDynamicsDegree = 3;

/// Discrete-time polynomial plant x_{t+1} = f(x_t, a_t); transitions[i] lists
/// the terms of f_i.
struct DynamicsSpec {
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<std::vector<TransitionTerm>> transitions;

  /// Throws std::invalid_argument on shape or degree violations.
  void validate(unsigned max_degree = kDefaultMaxDynamicsDegree) const;
  std::vector<double> apply(std::span<const double> x, std::span<const double> a) const;
};

struct SafetySpec {
  std::vector<Box> unsafe_regions;
  std::optional<Box> goal_region;
  /// Per-variable half-widths around the goal; empty means no deadzone.
  std::vector<double> deadzone;

  void validate(std::size_t state_dim) const;
  /// goal +/- deadzone when both are set.
  std::optional<Box> capture_region() const;
  /// True iff x lies in some unsafe box.
  bool is_unsafe(std::span<const double> x) const;
};

inline constexpr double kDivergenceThreshold = 1e12;

struct ReachOptions {
  PropagationOptions propagation;
  /// Replace state models by fresh affine models of their bounds every this
  /// many steps; 0 disables re-initialization.
  unsigned reinit_period = 1;
  /// Per-variable observation noise radius inflating the controller input.
  std::vector<double> noise_radius;
  /// Once every state bound lies in this box the dynamics freeze.
  std::optional<Box> deadzone;
};

struct TubeStep {
  /// Models of the non-frozen part of the state set.
  std::vector<TaylorModel> tms;
  /// Reported enclosure of all trajectories at this step.
  Box bounds;
};

struct ReachTube {
  std::vector<TubeStep> steps;
  bool diverged = false;
  std::optional<std::size_t> diverged_step;
  std::optional<std::size_t> capture_step;
  unsigned reinit_period = 1;
  unsigned tm_order = kDefaultOrder;
  unsigned bernstein_order = kDefaultBernsteinOrder;
  unsigned bernstein_steps = kDefaultBernsteinSteps;
};

enum class VerdictKind { verified_safe, possibly_unsafe, diverged };
std::string_view to_string(VerdictKind kind);

struct Verdict {
  VerdictKind kind = VerdictKind::possibly_unsafe;
  std::optional<std::size_t> first_violation_step;
  Box final_bounds;

  bool safe() const { return kind == VerdictKind::verified_safe; }
};

/// One plant step in Taylor-model arithmetic.
std::vector<TaylorModel> dynamics_step(std::span<const TaylorModel> state_tms,
                                       std::span<const TaylorModel> action_tms, const DynamicsSpec& dyn,
                                       unsigned order);

/// Reach tube with steps + 1 entries (fewer if the enclosure diverges).
ReachTube reach_trajectory(const Network& net, const DynamicsSpec& dyn, const Box& init_box, std::size_t steps,
                           const ReachOptions& opts = {});

Verdict check_safety(const ReachTube& tube, const SafetySpec& spec);

}  // namespace tmreach
