#include "tmreach/taylor_model.hpp"

#include <stdexcept>
#include <utility>
#include <string>

namespace tmreach {

namespace {

void require_same_domain(const TaylorModel& a, const TaylorModel& b) {
  if (a.domain_ptr() != b.domain_ptr() && !(a.domain() == b.domain())) {
    throw std::invalid_argument("TaylorModel: operands live on different domains");
  }
}

// Converts the rounding residuals collected for `poly` (pruned tails
// included) into an interval, with the fixed slack on top.
Interval rounding_interval(Polynomial& poly, RoundingSink& sink) {
  poly.prune(sink);
  return Interval::symmetric(fp::add_up(sink.total(), kRemainderSlack));
}

}  // namespace

TaylorModel::TaylorModel(Polynomial poly, Interval remainder, DomainPtr domain, unsigned order)
    : poly_(std::move(poly)), remainder_(remainder), domain_(std::move(domain)), order_(order) {
  if (!domain_) throw std::invalid_argument("TaylorModel: null domain");
  if (poly_.dimension() != domain_->dim()) {
    throw std::invalid_argument("TaylorModel: polynomial dimension " + std::to_string(poly_.dimension()) +
                                " does not match domain dimension " + std::to_string(domain_->dim()));
  }
  if (order_ == 0 && poly_.degree() > 0) {
    throw std::invalid_argument("TaylorModel: order 0 model with non-constant polynomial");
  }
  if (poly_.degree() > order_) {
    throw std::invalid_argument("TaylorModel: polynomial degree exceeds order");
  }
}

TaylorModel TaylorModel::constant(double c, DomainPtr domain, unsigned order) {
  const std::size_t dim = domain->dim();
  return {Polynomial::constant(dim, c), Interval(0.0), std::move(domain), order};
}

TaylorModel TaylorModel::from_interval(const Interval& iv, std::size_t var, DomainPtr domain, unsigned order) {
  if (!domain) throw std::invalid_argument("TaylorModel::from_interval: null domain");
  if (var >= domain->dim()) {
    throw std::out_of_range("TaylorModel::from_interval: variable index " + std::to_string(var) +
                            " out of range for dimension " + std::to_string(domain->dim()));
  }
  if (!((*domain)[var] == Interval(-1.0, 1.0))) {
    throw std::invalid_argument("TaylorModel::from_interval: variable box must be [-1, 1]");
  }
  if (!iv.is_finite()) throw std::invalid_argument("TaylorModel::from_interval: interval must be finite");
  const std::size_t dim = domain->dim();
  const double c = iv.mid();
  Polynomial p = Polynomial::constant(dim, c);
  if (iv.is_point() || order == 0) {
    // Degenerate (or order-0) model: the interval itself is the remainder.
    return {std::move(p), iv - Interval(c), std::move(domain), order};
  }
  // Grow the radius until c - r <= lo and c + r >= hi hold exactly.
  double r = iv.radius();
  auto covers = [&](double radius) {
    double err = 0.0;
    const double l = fp::two_sum(c, -radius, err);
    const bool lo_ok = l < iv.lo() || (l == iv.lo() && err <= 0.0);
    const double h = fp::two_sum(c, radius, err);
    const bool hi_ok = h > iv.hi() || (h == iv.hi() && err >= 0.0);
    return lo_ok && hi_ok;
  };
  while (!covers(r)) r = fp::up(r);
  Exponents e(dim, 0);
  e[var] = 1;
  p.add_term(e, r);
  return {std::move(p), Interval(0.0), std::move(domain), order};
}

Interval TaylorModel::bounds() const { return poly_.bounds(*domain_) + remainder_; }

bool TaylorModel::encloses(std::span<const double> x, double value) const {
  const double p = poly_.evaluate(x);
  return remainder_.contains(value - p);
}

TaylorModel TaylorModel::with_remainder(const Interval& r) const { return {poly_, r, domain_, order_}; }

TaylorModel TaylorModel::widened(const Interval& extra) const {
  return {poly_, remainder_ + extra, domain_, order_};
}

TaylorModel add(const TaylorModel& a, const TaylorModel& b) {
  require_same_domain(a, b);
  RoundingSink sink(a.domain());
  Polynomial p = a.poly().plus(b.poly(), &sink);
  const Interval rounding = rounding_interval(p, sink);
  return {std::move(p), a.remainder() + b.remainder() + rounding, a.domain_ptr(),
          std::max(a.order(), b.order())};
}

TaylorModel subtract(const TaylorModel& a, const TaylorModel& b) { return add(a, scale(b, -1.0)); }

TaylorModel scale(const TaylorModel& a, double s) {
  if (s == -1.0) {
    // Negation is exact.
    return {a.poly().scaled(-1.0), -a.remainder(), a.domain_ptr(), a.order()};
  }
  RoundingSink sink(a.domain());
  Polynomial p = a.poly().scaled(s, &sink);
  const Interval rounding = rounding_interval(p, sink);
  return {std::move(p), s * a.remainder() + rounding, a.domain_ptr(), a.order()};
}

TaylorModel add_constant(const TaylorModel& a, double c) {
  return add(a, TaylorModel::constant(c, a.domain_ptr(), a.order()));
}

namespace {

bool operand_before(const TaylorModel& a, const TaylorModel& b) {
  if (a.poly().terms() != b.poly().terms()) return a.poly().terms() < b.poly().terms();
  return std::pair(a.remainder().lo(), a.remainder().hi()) < std::pair(b.remainder().lo(), b.remainder().hi());
}

}  // namespace

TaylorModel multiply(const TaylorModel& x, const TaylorModel& y, unsigned order) {
  require_same_domain(x, y);
  const bool swap = operand_before(y, x);
  const TaylorModel& a = swap ? y : x;
  const TaylorModel& b = swap ? x : y;
  const Domain& d = a.domain();
  RoundingSink sink(d);
  auto [low, high] = a.poly().times(b.poly(), &sink).split_degree(order);
  const Interval rounding = rounding_interval(low, sink);

  const Interval pa = a.poly().bounds(d);
  const Interval pb = b.poly().bounds(d);
  const Interval rem = a.remainder() * b.remainder() + pa * b.remainder() + pb * a.remainder() +
                       high.bounds(d) + rounding;
  return {std::move(low), rem, a.domain_ptr(), order};
}

TaylorModel truncate(const TaylorModel& t, unsigned order) {
  if (t.poly().degree() <= order) {
    return {t.poly(), t.remainder(), t.domain_ptr(), std::max(order, t.poly().degree())};
  }
  auto [low, high] = t.poly().split_degree(order);
  const Interval rem = t.remainder() + high.bounds(t.domain());
  return {std::move(low), rem, t.domain_ptr(), order};
}

TaylorModel weighted_sum(std::span<const TaylorModel> tms, std::span<const double> weights, double bias,
                         unsigned order) {
  if (tms.size() != weights.size()) {
    throw std::invalid_argument("weighted_sum: " + std::to_string(tms.size()) + " models but " +
                                std::to_string(weights.size()) + " weights");
  }
  if (tms.empty()) throw std::invalid_argument("weighted_sum: empty input");
  require_same_domain(tms);
  const DomainPtr& domain = tms.front().domain_ptr();
  RoundingSink sink(*domain);
  Polynomial p = Polynomial::constant(domain->dim(), bias);
  Interval rem(0.0);
  for (std::size_t i = 0; i < tms.size(); ++i) {
    if (weights[i] == 0.0) continue;
    p.add_scaled(tms[i].poly(), weights[i], &sink);
    rem += weights[i] * tms[i].remainder();
  }
  auto [low, high] = p.split_degree(order);
  rem += high.bounds(*domain);
  rem += rounding_interval(low, sink);
  return {std::move(low), rem, domain, order};
}

TaylorModel power(const TaylorModel& t, unsigned n, unsigned order) {
  if (n == 0) return TaylorModel::constant(1.0, t.domain_ptr(), order);
  TaylorModel r = t;
  for (unsigned i = 1; i < n; ++i) r = multiply(r, t, order);
  return truncate(r, order);
}

void require_same_domain(std::span<const TaylorModel> tms) {
  for (std::size_t i = 1; i < tms.size(); ++i) require_same_domain(tms[0], tms[i]);
}

}  // namespace tmreach
