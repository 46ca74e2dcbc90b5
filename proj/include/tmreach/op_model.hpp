#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tmreach/closed_loop.hpp"

namespace tmreach {

struct Cell {
  std::size_t index = 0;
  Box box;
  std::vector<double> center;
};

/// Regular grid over a box. Cells are numbered in row-major order (the last
/// dimension varies fastest).
class Partitioning {
 public:
  Partitioning(Box bounds, std::vector<std::size_t> cells_per_dim);

  const Box& bounds() const { return bounds_; }
  const std::vector<std::size_t>& cells_per_dim() const { return cells_per_dim_; }
  std::size_t dim() const { return bounds_.size(); }
  std::size_t size() const { return count_; }

  Cell cell(std::size_t index) const;
  std::vector<Cell> cells() const;
  std::vector<std::size_t> grid_index(std::size_t index) const;
  std::size_t flat_index(std::span<const std::size_t> grid) const;
  /// Cell containing x; points on the upper bound face belong to the last
  /// cell. nullopt when x is outside the bounds.
  std::optional<std::size_t> locate(std::span<const double> x) const;

 private:
  Box bounds_;
  std::vector<std::size_t> cells_per_dim_;
  std::size_t count_ = 0;
};

/// Empirical histogram over the cells of a partitioning.
struct OperationalProfile {
  Partitioning partitioning;
  std::vector<double> mass;
  std::vector<std::size_t> counts;
  std::size_t sample_count = 0;  ///< in-bounds samples
  std::size_t out_of_bounds = 0;
};

/// mass_i = count_i / in-bounds count. Throws when no sample is in bounds.
OperationalProfile fit_op(std::span<const std::vector<double>> samples, const Partitioning& part);

/// KL(p || q) = sum p_i log(p_i / q_i); +inf when some q_i = 0 < p_i.
double kl_divergence(std::span<const double> p, std::span<const double> q);

struct CellRecord {
  std::size_t cell = 0;
  double mass = 0.0;
  std::optional<VerdictKind> verdict;
  double failure = 0.0;  ///< in [0, 1]
};

struct ReliabilityReport {
  std::vector<CellRecord> cells;
  /// sum_i mass_i * failure_i: probability of failure per random initial state.
  double failure_probability = 0.0;
  std::size_t cells_checked = 0;
  std::size_t cells_verified = 0;  ///< verdict verified_safe
  std::vector<std::pair<std::size_t, double>> convergence;
};

/// Dirac conversion: failure 0 for verified_safe, 1 otherwise. Every cell
/// with positive mass needs a verdict.
ReliabilityReport assess_reliability(const OperationalProfile& profile,
                                     std::span<const std::optional<Verdict>> verdicts);

/// Same aggregation with a per-cell failure probability in [0, 1].
ReliabilityReport assess_reliability(const OperationalProfile& profile,
                                     std::span<const std::optional<double>> failure_probability);

/// Refits on the first n samples for each checkpoint n and aggregates.
std::vector<std::pair<std::size_t, double>> convergence_curve(std::span<const std::vector<double>> samples,
                                                              const Partitioning& part,
                                                              std::span<const std::optional<Verdict>> verdicts,
                                                              std::span<const std::size_t> checkpoints);

}  // namespace tmreach
