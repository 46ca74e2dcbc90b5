#include "tmreach/bernstein.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tmreach {

namespace {

constexpr double kUnitRoundoff = 0x1p-53;

double binomial(unsigned n, unsigned k) {
  double r = 1.0;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Power-basis coefficients in s of sum_i f_i C(k,i) s^i (1-s)^(k-i).
std::vector<double> bernstein_to_power(const std::vector<double>& f) {
  const unsigned k = static_cast<unsigned>(f.size() - 1);
  std::vector<double> c(k + 1, 0.0);
  for (unsigned i = 0; i <= k; ++i) {
    if (f[i] == 0.0) continue;
    const double ci = binomial(k, i) * f[i];
    for (unsigned j = i; j <= k; ++j) {
      const double sign = ((j - i) % 2 == 0) ? 1.0 : -1.0;
      c[j] += sign * ci * binomial(k - i, j - i);
    }
  }
  return c;
}

double horner(const std::vector<double>& c, double s) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * s + *it;
  return r;
}

template <class Eval>
double sampled_error(Activation act, Eval&& eval, const Interval& range, unsigned steps) {
  if (steps == 0) throw std::invalid_argument("bernstein_error: sampling steps must be >= 1");
  const double a = range.lo();
  const double h = range.width() / steps;
  double worst = 0.0;
  for (unsigned i = 0; i <= steps; ++i) {
    const double y = h * (i + 0.5) + a;
    worst = std::max(worst, std::fabs(eval(y) - activate(act, y)) + h);
  }
  return worst + kBernsteinErrorSlack;
}

}  // namespace

double activate(Activation act, double y) {
  switch (act) {
    case Activation::relu: return y > 0.0 ? y : 0.0;
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-y));
    case Activation::tanh: return std::tanh(y);
    case Activation::linear: return y;
  }
  return y;
}

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::linear: return "linear";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "linear") return Activation::linear;
  throw std::invalid_argument("unsupported activation \"" + std::string(name) + "\"");
}

double BernsteinApprox::evaluate(double y) const {
  if (range.is_point()) return normalized.empty() ? 0.0 : normalized[0];
  return horner(normalized, (y - range.lo()) / range.width());
}

Polynomial BernsteinApprox::polynomial() const {
  Polynomial p(1);
  if (normalized.empty()) return p;
  if (range.is_point()) return Polynomial::constant(1, normalized[0]);
  // s = (y - a) / w; expand s^j = w^-j sum_m C(j,m) y^m (-a)^(j-m).
  const double a = range.lo();
  const double w = range.width();
  std::vector<double> y_coeffs(normalized.size(), 0.0);
  for (unsigned j = 0; j < normalized.size(); ++j) {
    const double cj = normalized[j] / std::pow(w, j);
    for (unsigned m = 0; m <= j; ++m) {
      y_coeffs[m] += cj * binomial(j, m) * std::pow(-a, j - m);
    }
  }
  for (unsigned m = 0; m < y_coeffs.size(); ++m) {
    if (std::fabs(y_coeffs[m]) > 0.0) p.add_term({m}, y_coeffs[m]);
  }
  return p;
}

namespace {

BernsteinApprox fit_normalized(Activation act, const Interval& range, unsigned order) {
  if (order == 0) throw std::invalid_argument("bernstein_fit: order must be >= 1");
  BernsteinApprox ap;
  ap.activation = act;
  ap.range = range;
  ap.order = order;
  if (range.is_point()) {
    ap.normalized = {activate(act, range.lo())};
    return ap;
  }
  std::vector<double> nodes(order + 1);
  for (unsigned i = 0; i <= order; ++i) {
    // Pin the last node to b so the endpoint interpolates exactly.
    const double y = i == order ? range.hi() : range.lo() + range.width() * i / order;
    nodes[i] = activate(act, y);
  }
  ap.normalized = bernstein_to_power(nodes);
  return ap;
}

}  // namespace

Polynomial bernstein_fit(Activation act, const Interval& range, unsigned order) {
  return fit_normalized(act, range, order).polynomial();
}

double bernstein_error(Activation act, const Polynomial& p, const Interval& range, unsigned steps) {
  if (p.dimension() != 1) throw std::invalid_argument("bernstein_error: polynomial must be univariate");
  return sampled_error(act, [&p](double y) { return p.evaluate(std::span<const double>(&y, 1)); }, range,
                       steps);
}

BernsteinApprox bernstein_approx(Activation act, const Interval& range, unsigned order, unsigned steps) {
  BernsteinApprox ap = fit_normalized(act, range, order);
  ap.sample_steps = steps;
  ap.error = sampled_error(act, [&ap](double y) { return ap.evaluate(y); }, range, steps);
  return ap;
}

TaylorModel compose_activation(const TaylorModel& t, Activation act, const ActivationOptions& opts) {
  const Interval range = t.bounds();
  if (!range.is_finite()) throw std::domain_error("compose_activation: input bounds are not finite");
  if (range.is_point()) {
    return TaylorModel::constant(activate(act, range.lo()), t.domain_ptr(), opts.tm_order)
        .widened(Interval::symmetric(kBernsteinErrorSlack));
  }
  const BernsteinApprox ap = bernstein_approx(act, range, opts.bernstein_order, opts.bernstein_steps);

  // s = (t - a) * (1/w) lies in [0, 1] on the whole enclosure. Rounding of
  // 1/w perturbs s by at most 2u; charge it through the derivative bound of
  // the interpolant on [0, 1]. The sampled error was measured with rounded
  // Horner evaluation; charge that too.
  const double inv_w = 1.0 / range.width();
  const TaylorModel s = scale(add_constant(t, -range.lo()), inv_w);
  double slope = 0.0;
  double magnitude = 0.0;
  for (std::size_t j = 0; j < ap.normalized.size(); ++j) {
    slope += j * std::fabs(ap.normalized[j]);
    magnitude += std::fabs(ap.normalized[j]);
  }
  const double scaling_err = 4.0 * kUnitRoundoff * (slope + (ap.normalized.size() + 1) * magnitude);

  TaylorModel acc = TaylorModel::constant(ap.normalized.back(), t.domain_ptr(), opts.tm_order);
  for (std::size_t j = ap.normalized.size() - 1; j-- > 0;) {
    acc = add_constant(multiply(acc, s, opts.tm_order), ap.normalized[j]);
  }
  return truncate(acc, opts.tm_order).widened(Interval::symmetric(fp::add_up(ap.error, scaling_err)));
}

}  // namespace tmreach
