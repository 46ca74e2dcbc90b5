#include "tmreach/op_model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tmreach {

Partitioning::Partitioning(Box bounds, std::vector<std::size_t> cells_per_dim)
    : bounds_(std::move(bounds)), cells_per_dim_(std::move(cells_per_dim)) {
  if (bounds_.empty()) throw std::invalid_argument("Partitioning: bounds must be non-empty");
  if (cells_per_dim_.size() != bounds_.size()) {
    throw std::invalid_argument("Partitioning: " + std::to_string(cells_per_dim_.size()) +
                                " cell counts for a " + std::to_string(bounds_.size()) + "-dimensional box");
  }
  count_ = 1;
  for (std::size_t d = 0; d < bounds_.size(); ++d) {
    if (cells_per_dim_[d] == 0) throw std::invalid_argument("Partitioning: zero cell count in dimension " + std::to_string(d));
    if (!bounds_[d].is_finite() || !(bounds_[d].width() > 0.0)) {
      throw std::invalid_argument("Partitioning: bounds must be finite with positive width");
    }
    count_ *= cells_per_dim_[d];
  }
}

std::vector<std::size_t> Partitioning::grid_index(std::size_t index) const {
  if (index >= count_) throw std::out_of_range("Partitioning: cell index out of range");
  std::vector<std::size_t> g(dim());
  for (std::size_t d = dim(); d-- > 0;) {
    g[d] = index % cells_per_dim_[d];
    index /= cells_per_dim_[d];
  }
  return g;
}

std::size_t Partitioning::flat_index(std::span<const std::size_t> grid) const {
  std::size_t index = 0;
  for (std::size_t d = 0; d < dim(); ++d) index = index * cells_per_dim_[d] + grid[d];
  return index;
}

Cell Partitioning::cell(std::size_t index) const {
  const auto g = grid_index(index);
  Cell c;
  c.index = index;
  for (std::size_t d = 0; d < dim(); ++d) {
    const double lo = bounds_[d].lo();
    const double w = bounds_[d].width();
    const double n = static_cast<double>(cells_per_dim_[d]);
    const double a = g[d] == 0 ? lo : lo + w * (g[d] / n);
    const double b = g[d] + 1 == cells_per_dim_[d] ? bounds_[d].hi() : lo + w * ((g[d] + 1) / n);
    c.box.emplace_back(a, b);
    c.center.push_back(0.5 * (a + b));
  }
  return c;
}

std::vector<Cell> Partitioning::cells() const {
  std::vector<Cell> out;
  out.reserve(count_);
  for (std::size_t i = 0; i < count_; ++i) out.push_back(cell(i));
  return out;
}

std::optional<std::size_t> Partitioning::locate(std::span<const double> x) const {
  if (x.size() != dim()) throw std::invalid_argument("Partitioning::locate: dimension mismatch");
  std::vector<std::size_t> g(dim());
  for (std::size_t d = 0; d < dim(); ++d) {
    if (!bounds_[d].contains(x[d])) return std::nullopt;
    const double u = (x[d] - bounds_[d].lo()) / bounds_[d].width();
    const double k = std::floor(u * static_cast<double>(cells_per_dim_[d]));
    g[d] = std::min(static_cast<std::size_t>(std::max(k, 0.0)), cells_per_dim_[d] - 1);
  }
  return flat_index(g);
}

OperationalProfile fit_op(std::span<const std::vector<double>> samples, const Partitioning& part) {
  OperationalProfile op{part, std::vector<double>(part.size(), 0.0), std::vector<std::size_t>(part.size(), 0), 0, 0};
  for (const auto& s : samples) {
    if (auto idx = part.locate(s)) {
      ++op.counts[*idx];
      ++op.sample_count;
    } else {
      ++op.out_of_bounds;
    }
  }
  if (op.sample_count == 0) {
    throw std::invalid_argument("fit_op: all " + std::to_string(samples.size()) + " samples are out of bounds");
  }
  const double n = static_cast<double>(op.sample_count);
  for (std::size_t i = 0; i < part.size(); ++i) op.mass[i] = static_cast<double>(op.counts[i]) / n;
  return op;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: size mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

ReliabilityReport assess_reliability(const OperationalProfile& profile,
                                     std::span<const std::optional<double>> failure_probability) {
  const std::size_t n = profile.partitioning.size();
  if (failure_probability.size() != n) {
    throw std::invalid_argument("assess_reliability: expected " + std::to_string(n) + " cell entries, got " +
                                std::to_string(failure_probability.size()));
  }
  ReliabilityReport report;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = profile.mass[i];
    const auto& f = failure_probability[i];
    if (m > 0.0 && !f) throw std::invalid_argument("assess_reliability: missing verdict for cell " + std::to_string(i));
    if (f && !(*f >= 0.0 && *f <= 1.0)) {
      throw std::invalid_argument("assess_reliability: failure probability of cell " + std::to_string(i) +
                                  " outside [0, 1]");
    }
    CellRecord rec{i, m, std::nullopt, f.value_or(0.0)};
    if (f) ++report.cells_checked;
    report.failure_probability += m * rec.failure;
    report.cells.push_back(rec);
  }
  return report;
}

ReliabilityReport assess_reliability(const OperationalProfile& profile,
                                     std::span<const std::optional<Verdict>> verdicts) {
  std::vector<std::optional<double>> failure(verdicts.size());
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    if (verdicts[i]) failure[i] = verdicts[i]->safe() ? 0.0 : 1.0;
  }
  ReliabilityReport report = assess_reliability(profile, std::span<const std::optional<double>>(failure));
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    if (!verdicts[i]) continue;
    report.cells[i].verdict = verdicts[i]->kind;
    if (verdicts[i]->safe()) ++report.cells_verified;
  }
  return report;
}

std::vector<std::pair<std::size_t, double>> convergence_curve(std::span<const std::vector<double>> samples,
                                                              const Partitioning& part,
                                                              std::span<const std::optional<Verdict>> verdicts,
                                                              std::span<const std::size_t> checkpoints) {
  std::vector<std::pair<std::size_t, double>> series;
  std::size_t prev = 0;
  for (std::size_t n : checkpoints) {
    if (n == 0 || n > samples.size()) {
      throw std::invalid_argument("convergence_curve: checkpoint " + std::to_string(n) + " outside [1, " +
                                  std::to_string(samples.size()) + "]");
    }
    if (n <= prev) throw std::invalid_argument("convergence_curve: checkpoints must be increasing");
    prev = n;
    const OperationalProfile op = fit_op(samples.first(n), part);
    series.emplace_back(n, assess_reliability(op, verdicts).failure_probability);
  }
  return series;
}

}  // namespace tmreach
