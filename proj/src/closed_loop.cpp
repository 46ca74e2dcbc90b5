#include "tmreach/closed_loop.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace tmreach {

bool box_contains(const Box& box, std::span<const double> x) {
  if (box.size() != x.size()) throw std::invalid_argument("box_contains: dimension mismatch");
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (!box[i].contains(x[i])) return false;
  }
  return true;
}

bool boxes_intersect(const Box& a, const Box& b) {
  if (a.size() != b.size()) throw std::invalid_argument("boxes_intersect: dimension mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].intersects(b[i])) return false;
  }
  return true;
}

void DynamicsSpec::validate(unsigned max_degree) const {
  if (state_dim == 0) throw std::invalid_argument("dynamics: state_dim must be positive");
  if (transitions.size() != state_dim) {
    throw std::invalid_argument("dynamics: expected " + std::to_string(state_dim) + " transition lists, got " +
                                std::to_string(transitions.size()));
  }
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    for (std::size_t k = 0; k < transitions[i].size(); ++k) {
      const TransitionTerm& term = transitions[i][k];
      const std::string where = "dynamics: variable " + std::to_string(i) + ", term " + std::to_string(k);
      if (term.state_exponents.size() != state_dim) {
        throw std::invalid_argument(where + ": state exponent vector must have length " +
                                    std::to_string(state_dim));
      }
      if (term.action_exponents.size() != action_dim) {
        throw std::invalid_argument(where + ": action exponent vector must have length " +
                                    std::to_string(action_dim));
      }
      if (!std::isfinite(term.coefficient)) throw std::invalid_argument(where + ": coefficient is not finite");
      if (term.degree() > max_degree) {
        throw std::invalid_argument(where + ": total degree " + std::to_string(term.degree()) +
                                    " exceeds maximum " + std::to_string(max_degree));
      }
    }
  }
}

std::vector<double> DynamicsSpec::apply(std::span<const double> x, std::span<const double> a) const {
  if (x.size() != state_dim || a.size() != action_dim) {
    throw std::invalid_argument("DynamicsSpec::apply: dimension mismatch");
  }
  std::vector<double> next(state_dim, 0.0);
  for (std::size_t i = 0; i < state_dim; ++i) {
    for (const TransitionTerm& term : transitions[i]) {
      double v = term.coefficient;
      for (std::size_t j = 0; j < state_dim; ++j) {
        for (unsigned e = 0; e < term.state_exponents[j]; ++e) v *= x[j];
      }
      for (std::size_t j = 0; j < action_dim; ++j) {
        for (unsigned e = 0; e < term.action_exponents[j]; ++e) v *= a[j];
      }
      next[i] += v;
    }
  }
  return next;
}

void SafetySpec::validate(std::size_t state_dim) const {
  for (std::size_t r = 0; r < unsafe_regions.size(); ++r) {
    if (unsafe_regions[r].size() != state_dim) {
      throw std::invalid_argument("unsafe region " + std::to_string(r) + " has wrong dimension");
    }
  }
  if (goal_region && goal_region->size() != state_dim) {
    throw std::invalid_argument("goal region has wrong dimension");
  }
  if (!deadzone.empty()) {
    if (deadzone.size() != state_dim) throw std::invalid_argument("deadzone has wrong dimension");
    for (double h : deadzone) {
      if (!(h >= 0.0)) throw std::invalid_argument("deadzone half-widths must be >= 0");
    }
  }
}

std::optional<Box> SafetySpec::capture_region() const {
  if (!goal_region || deadzone.empty()) return std::nullopt;
  Box region(goal_region->size());
  for (std::size_t i = 0; i < region.size(); ++i) region[i] = (*goal_region)[i].inflated(deadzone[i]);
  return region;
}

bool SafetySpec::is_unsafe(std::span<const double> x) const {
  for (const Box& b : unsafe_regions) {
    if (box_contains(b, x)) return true;
  }
  return false;
}

std::string_view to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::verified_safe: return "verified_safe";
    case VerdictKind::possibly_unsafe: return "possibly_unsafe";
    case VerdictKind::diverged: return "diverged";
  }
  return "?";
}

std::vector<TaylorModel> dynamics_step(std::span<const TaylorModel> state_tms,
                                       std::span<const TaylorModel> action_tms, const DynamicsSpec& dyn,
                                       unsigned order) {
  if (state_tms.size() != dyn.state_dim || action_tms.size() != dyn.action_dim) {
    throw std::invalid_argument("dynamics_step: expected " + std::to_string(dyn.state_dim) + " states and " +
                                std::to_string(dyn.action_dim) + " actions, got " +
                                std::to_string(state_tms.size()) + " and " + std::to_string(action_tms.size()));
  }
  if (state_tms.empty()) throw std::invalid_argument("dynamics_step: empty state");
  require_same_domain(state_tms);
  require_same_domain(action_tms);
  const DomainPtr& domain = state_tms.front().domain_ptr();

  // Powers are shared across terms; key = (is_action, variable, exponent).
  std::map<std::tuple<bool, std::size_t, unsigned>, TaylorModel> powers;
  auto power_of = [&](bool action, std::size_t var, unsigned e) -> const TaylorModel& {
    auto key = std::make_tuple(action, var, e);
    auto it = powers.find(key);
    if (it == powers.end()) {
      const TaylorModel& base = action ? action_tms[var] : state_tms[var];
      it = powers.emplace(key, power(base, e, order)).first;
    }
    return it->second;
  };

  std::vector<TaylorModel> next;
  next.reserve(dyn.state_dim);
  for (std::size_t i = 0; i < dyn.state_dim; ++i) {
    TaylorModel acc = TaylorModel::zero(domain, order);
    for (const TransitionTerm& term : dyn.transitions[i]) {
      if (term.coefficient == 0.0) continue;
      std::optional<TaylorModel> product;
      auto fold = [&](bool action, std::size_t var, unsigned e) {
        if (e == 0) return;
        const TaylorModel& p = power_of(action, var, e);
        product = product ? multiply(*product, p, order) : p;
      };
      for (std::size_t j = 0; j < dyn.state_dim; ++j) fold(false, j, term.state_exponents[j]);
      for (std::size_t j = 0; j < dyn.action_dim; ++j) fold(true, j, term.action_exponents[j]);
      acc = product ? add(acc, scale(*product, term.coefficient)) : add_constant(acc, term.coefficient);
    }
    next.push_back(truncate(acc, order));
  }
  return next;
}

namespace {

Box bounds_of(std::span<const TaylorModel> tms) {
  Box b;
  b.reserve(tms.size());
  for (const auto& t : tms) b.push_back(t.bounds());
  return b;
}

bool box_diverged(const Box& b) {
  for (const Interval& iv : b) {
    if (!iv.is_finite() || iv.mag() > kDivergenceThreshold) return true;
  }
  return false;
}

std::optional<Box> intersect(const Box& a, const Box& b) {
  Box out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double lo = std::max(a[i].lo(), b[i].lo());
    const double hi = std::min(a[i].hi(), b[i].hi());
    if (lo > hi) return std::nullopt;
    out[i] = Interval(lo, hi);
  }
  return out;
}

Box join(const Box& a, const Box& b) {
  Box out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i].join(b[i]);
  return out;
}

}  // namespace

// Deadzone handling: a trajectory freezes as soon as its state enters the
// deadzone box. The frozen part of the set is enclosed by the hull of every
// earlier (moving bounds intersected with the deadzone); reported bounds are
// the hull of that and the moving enclosure. Once the whole moving
// enclosure is inside the deadzone every trajectory is frozen and the
// bounds stay constant.
ReachTube reach_trajectory(const Network& net, const DynamicsSpec& dyn, const Box& init_box, std::size_t steps,
                           const ReachOptions& opts) {
  dyn.validate();
  if (steps == 0) throw std::invalid_argument("reach_trajectory: horizon must be >= 1");
  if (init_box.size() != dyn.state_dim) {
    throw std::invalid_argument("reach_trajectory: initial box has dimension " + std::to_string(init_box.size()) +
                                ", plant has " + std::to_string(dyn.state_dim));
  }
  if (net.input_dim() != dyn.state_dim || net.output_dim() != dyn.action_dim) {
    throw std::invalid_argument("reach_trajectory: network shape does not match plant dimensions");
  }
  if (!opts.noise_radius.empty() && opts.noise_radius.size() != dyn.state_dim) {
    throw std::invalid_argument("reach_trajectory: noise radius has wrong dimension");
  }
  if (opts.deadzone && opts.deadzone->size() != dyn.state_dim) {
    throw std::invalid_argument("reach_trajectory: deadzone has wrong dimension");
  }

  const unsigned order = opts.propagation.activation.tm_order;
  ReachTube tube;
  tube.reinit_period = opts.reinit_period;
  tube.tm_order = order;
  tube.bernstein_order = opts.propagation.activation.bernstein_order;
  tube.bernstein_steps = opts.propagation.activation.bernstein_steps;

  auto domain = std::make_shared<const Domain>(Domain::canonical(dyn.state_dim));
  auto reinit = [&](const Box& b) {
    std::vector<TaylorModel> tms;
    for (std::size_t i = 0; i < b.size(); ++i) tms.push_back(TaylorModel::from_interval(b[i], i, domain, order));
    return tms;
  };

  std::vector<TaylorModel> state = reinit(init_box);
  Box moving = bounds_of(state);
  tube.steps.push_back({state, init_box});

  std::optional<Box> frozen;
  auto absorb = [&](const Box& b) {
    if (!opts.deadzone) return;
    if (auto cut = intersect(b, *opts.deadzone)) frozen = frozen ? join(*frozen, *cut) : *cut;
  };
  auto captured = [&](const Box& b) {
    return opts.deadzone && intersect(b, *opts.deadzone) == b;
  };
  absorb(init_box);
  if (captured(init_box)) tube.capture_step = 0;

  for (std::size_t t = 1; t <= steps; ++t) {
    if (tube.capture_step) {
      tube.steps.push_back(tube.steps.back());
      continue;
    }
    if (opts.reinit_period > 0 && t > 1 && (t - 1) % opts.reinit_period == 0) state = reinit(moving);

    std::vector<TaylorModel> observed = state;
    for (std::size_t i = 0; i < opts.noise_radius.size(); ++i) {
      if (opts.noise_radius[i] > 0.0) observed[i] = observed[i].widened(Interval::symmetric(opts.noise_radius[i]));
    }
    std::vector<TaylorModel> actions = network_reach(net, observed, opts.propagation);
    state = dynamics_step(state, actions, dyn, order);
    moving = bounds_of(state);
    if (box_diverged(moving)) {
      tube.diverged = true;
      tube.diverged_step = t;
      break;
    }
    absorb(moving);
    Box reported = frozen ? join(moving, *frozen) : moving;
    tube.steps.push_back({state, std::move(reported)});
    if (captured(moving)) tube.capture_step = t;
  }
  return tube;
}

Verdict check_safety(const ReachTube& tube, const SafetySpec& spec) {
  Verdict v;
  v.kind = VerdictKind::verified_safe;
  if (!tube.steps.empty()) v.final_bounds = tube.steps.back().bounds;
  for (std::size_t t = 0; t < tube.steps.size(); ++t) {
    for (const Box& unsafe : spec.unsafe_regions) {
      if (boxes_intersect(tube.steps[t].bounds, unsafe)) {
        v.kind = VerdictKind::possibly_unsafe;
        v.first_violation_step = t;
        return v;
      }
    }
  }
  if (tube.diverged) {
    v.kind = VerdictKind::diverged;
    v.first_violation_step = tube.diverged_step;
  }
  return v;
}

}  // namespace tmreach
