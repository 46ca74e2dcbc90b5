#pragma once

// Generators and reference oracles shared by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "tmreach/closed_loop.hpp"
#include "tmreach/network.hpp"
#include "tmreach/taylor_model.hpp"

namespace support {

using tmreach::Interval;

// ~330 bits of mantissa: every double product chain used by the tests is exact.
using Real = boost::multiprecision::cpp_bin_float_100;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }
  double normal(double mu, double sigma) { return std::normal_distribution<double>(mu, sigma)(rng_); }

  /// Multiple of 2^-10 in [a, b]; dyadic so that centers and radii are exact.
  double dyadic(double a, double b) { return std::ldexp(std::round(std::ldexp(uniform(a, b), 10)), -10); }
  Interval dyadic_interval(double a, double b) {
    double x = dyadic(a, b), y = dyadic(a, b);
    return Interval::hull(x, y);
  }
  Interval interval(double a, double b) { return Interval::hull(uniform(a, b), uniform(a, b)); }

  std::vector<double> point(const tmreach::Box& box) {
    std::vector<double> x(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) x[i] = uniform(box[i].lo(), box[i].hi());
    return x;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline tmreach::DomainPtr canonical(std::size_t n) {
  return std::make_shared<const tmreach::Domain>(tmreach::Domain::canonical(n));
}

/// Value of p(x) computed in high precision.
inline Real evaluate_exact(const tmreach::Polynomial& p, std::span<const double> x) {
  Real sum = 0;
  for (const auto& [e, c] : p.terms()) {
    Real m = c;
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (unsigned k = 0; k < e[i]; ++k) m *= Real(x[i]);
    }
    sum += m;
  }
  return sum;
}

inline bool contains(const Interval& iv, const Real& v) { return Real(iv.lo()) <= v && v <= Real(iv.hi()); }

/// v lies in p(x) + I, checked in high precision.
inline bool tm_encloses(const tmreach::TaylorModel& t, std::span<const double> x, const Real& v) {
  const Real d = v - evaluate_exact(t.poly(), x);
  return Real(t.remainder().lo()) <= d && d <= Real(t.remainder().hi());
}

inline std::vector<double> canonical_point(Gen& g, std::size_t n) {
  std::vector<double> x(n);
  for (double& v : x) v = g.uniform(-1.0, 1.0);
  return x;
}

struct NetShape {
  std::vector<std::size_t> widths;  ///< input width first
  std::vector<tmreach::Activation> activations;
};

inline tmreach::Network random_network(Gen& g, const NetShape& shape, double weight_scale, double bias_scale) {
  std::vector<tmreach::Layer> layers;
  for (std::size_t l = 0; l + 1 < shape.widths.size(); ++l) {
    tmreach::Layer layer;
    layer.inputs = shape.widths[l];
    layer.outputs = shape.widths[l + 1];
    layer.activation = shape.activations[l];
    for (std::size_t i = 0; i < layer.inputs * layer.outputs; ++i) layer.weights.push_back(g.uniform(-1, 1) * weight_scale);
    for (std::size_t i = 0; i < layer.outputs; ++i) layer.biases.push_back(g.uniform(-1, 1) * bias_scale);
    layers.push_back(std::move(layer));
  }
  return tmreach::Network(std::move(layers));
}

inline std::vector<tmreach::TaylorModel> box_models(const tmreach::Box& box, unsigned order = 2) {
  auto d = canonical(box.size());
  std::vector<tmreach::TaylorModel> tms;
  for (std::size_t i = 0; i < box.size(); ++i) tms.push_back(tmreach::TaylorModel::from_interval(box[i], i, d, order));
  return tms;
}

/// x' = x + 0.1 a with controller a = -0.5 x: contracts by 0.95 per step.
inline tmreach::DynamicsSpec stabilizing_plant() {
  tmreach::DynamicsSpec dyn;
  dyn.state_dim = 1;
  dyn.action_dim = 1;
  dyn.transitions = {{{1.0, {1}, {0}}, {0.1, {0}, {1}}}};
  return dyn;
}

inline tmreach::Network stabilizing_controller() {
  tmreach::Layer l;
  l.inputs = 1;
  l.outputs = 1;
  l.weights = {-0.5};
  l.biases = {0.0};
  l.activation = tmreach::Activation::linear;
  return tmreach::Network({l});
}

inline tmreach::SafetySpec stabilizing_safety() {
  tmreach::SafetySpec s;
  s.unsafe_regions = {{Interval(2.0, INFINITY)}};
  s.goal_region = tmreach::Box{Interval(0.0)};
  s.deadzone = {0.1};
  return s;
}

}  // namespace support
