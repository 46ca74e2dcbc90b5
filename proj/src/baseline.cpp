#include "tmreach/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tmreach/parallel.hpp"

namespace tmreach {

Rollout simulate_rollout(const Network& net, const DynamicsSpec& dyn, std::span<const double> x0,
                         std::size_t steps, const SafetySpec& spec, const ObservationHook& observe) {
  if (x0.size() != dyn.state_dim) {
    throw std::invalid_argument("simulate_rollout: initial state has dimension " + std::to_string(x0.size()) +
                                ", plant has " + std::to_string(dyn.state_dim));
  }
  const std::optional<Box> deadzone = spec.capture_region();
  Rollout r;
  r.states.emplace_back(x0.begin(), x0.end());

  auto flag = [&](std::size_t t) {
    const auto& x = r.states.back();
    const bool finite = std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
    if (r.safe && (!finite || spec.is_unsafe(x))) {
      r.safe = false;
      r.violation_step = t;
    }
    return finite;
  };
  if (!flag(0)) return r;

  bool frozen = deadzone && box_contains(*deadzone, r.states.back());
  for (std::size_t t = 1; t <= steps; ++t) {
    const std::vector<double> x = r.states.back();
    std::vector<double> obs = x;
    if (observe) observe(t - 1, obs);
    std::vector<double> a = net.evaluate(obs);
    r.actions.push_back(a);
    r.states.push_back(frozen ? x : dyn.apply(x, a));
    if (!flag(t)) break;
    if (deadzone && !frozen) frozen = box_contains(*deadzone, r.states.back());
  }
  return r;
}

std::mt19937_64 cell_rng(std::uint64_t seed, std::size_t cell) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(std::uint64_t(cell) >> 32)};
  return std::mt19937_64(seq);
}

std::vector<double> sample_in_box(const Box& box, std::mt19937_64& rng) {
  std::vector<double> x(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    x[i] = std::min(box[i].lo() + box[i].width() * uniform01(rng), box[i].hi());
  }
  return x;
}

PointEstimate point_estimate(const Network& net, const DynamicsSpec& dyn, const SafetySpec& spec,
                             const OperationalProfile& profile, std::size_t steps, std::size_t rollouts_per_cell,
                             std::uint64_t seed, std::size_t jobs) {
  if (rollouts_per_cell == 0) throw std::invalid_argument("point_estimate: rollouts_per_cell must be >= 1");
  const Partitioning& part = profile.partitioning;
  PointEstimate est;
  est.cell_failure.assign(part.size(), std::nullopt);
  parallel_for(part.size(), jobs, [&](std::size_t i) {
    if (profile.mass[i] <= 0.0) return;
    const Cell cell = part.cell(i);
    std::mt19937_64 rng = cell_rng(seed, i);
    std::size_t unsafe = 0;
    for (std::size_t k = 0; k < rollouts_per_cell; ++k) {
      const std::vector<double> x0 = sample_in_box(cell.box, rng);
      if (!simulate_rollout(net, dyn, x0, steps, spec).safe) ++unsafe;
    }
    est.cell_failure[i] = static_cast<double>(unsafe) / static_cast<double>(rollouts_per_cell);
  });
  for (std::size_t i = 0; i < part.size(); ++i) {
    if (est.cell_failure[i]) est.failure_probability += profile.mass[i] * *est.cell_failure[i];
  }
  return est;
}

}  // namespace tmreach
