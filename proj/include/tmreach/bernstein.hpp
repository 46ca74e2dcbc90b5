#pragma once

#include <string_view>
#include <vector>

#include "tmreach/interval.hpp"
#include "tmreach/polynomial.hpp"
#include "tmreach/taylor_model.hpp"

namespace tmreach {

enum class Activation { relu, sigmoid, tanh, linear };

double activate(Activation act, double y);
std::string_view to_string(Activation act);
/// Throws std::invalid_argument naming the unsupported kind.
Activation parse_activation(std::string_view name);

inline constexpr unsigned kDefaultBernsteinOrder = 4;
inline constexpr unsigned kDefaultBernsteinSteps = 200;
/// Absolute slack added on top of the sampled Bernstein error.
inline constexpr double kBernsteinErrorSlack = 1e-12;

/// Degree-k Bernstein interpolant of an activation on [a, b] together with
/// its sampled error bound.
///
/// The interpolant is stored in power form in the normalized variable
/// s = (y - a) / (b - a), which keeps evaluation well conditioned for ranges
/// far from the origin.
struct BernsteinApprox {
  Activation activation = Activation::linear;
  Interval range;
  unsigned order = 0;
  unsigned sample_steps = 0;
  std::vector<double> normalized;  ///< coefficient of s^j at index j
  double error = 0.0;

  double evaluate(double y) const;
  /// The same interpolant expanded in the pre-activation value y.
  Polynomial polynomial() const;
};

/// p(y) = sum_i act(a + (b-a) i/k) C(k,i) (y-a)^i (b-y)^(k-i) / (b-a)^k as a
/// univariate polynomial in y. A degenerate range returns the constant act(a).
Polynomial bernstein_fit(Activation act, const Interval& range, unsigned order);

/// max_{i=0..m} |p(y_i) - act(y_i)| + (b-a)/m with midpoints
/// y_i = a + (b-a)(i + 1/2)/m, plus kBernsteinErrorSlack.
double bernstein_error(Activation act, const Polynomial& p, const Interval& range, unsigned steps);

/// Fit and error bound in one go (the error uses the normalized form).
BernsteinApprox bernstein_approx(Activation act, const Interval& range, unsigned order, unsigned steps);

struct ActivationOptions {
  unsigned tm_order = kDefaultOrder;
  unsigned bernstein_order = kDefaultBernsteinOrder;
  unsigned bernstein_steps = kDefaultBernsteinSteps;
};

/// Encloses act(f) for the function f enclosed by `t`: fits the interpolant
/// on tm bounds [a, b], substitutes t into it with Taylor-model arithmetic
/// and adds [-error, error] to the remainder.
TaylorModel compose_activation(const TaylorModel& t, Activation act, const ActivationOptions& opts = {});

}  // namespace tmreach
