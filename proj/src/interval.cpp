#include "tmreach/interval.hpp"

#include <ostream>

namespace tmreach {

namespace fp {

double add_down(double a, double b) {
  double err = 0.0;
  const double s = two_sum(a, b, err);
  if (!std::isfinite(s)) return s;
  return err < 0.0 ? down(s) : s;
}

double add_up(double a, double b) {
  double err = 0.0;
  const double s = two_sum(a, b, err);
  if (!std::isfinite(s)) return s;
  return err > 0.0 ? up(s) : s;
}

double mul_down(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  double err = 0.0;
  const double p = two_prod(a, b, err);
  if (!std::isfinite(p)) return p;
  // FMA residuals are unreliable once the product is subnormal.
  if (std::fabs(p) < std::numeric_limits<double>::min()) return down(p);
  return err < 0.0 ? down(p) : p;
}

double mul_up(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  double err = 0.0;
  const double p = two_prod(a, b, err);
  if (!std::isfinite(p)) return p;
  if (std::fabs(p) < std::numeric_limits<double>::min()) return up(p);
  return err > 0.0 ? up(p) : p;
}

}  // namespace fp

Interval Interval::inflated(double slack) const {
  return {fp::add_down(lo_, -slack), fp::add_up(hi_, slack)};
}

Interval operator+(const Interval& a, const Interval& b) {
  return {fp::add_down(a.lo_, b.lo_), fp::add_up(a.hi_, b.hi_)};
}

Interval operator-(const Interval& a, const Interval& b) {
  return {fp::add_down(a.lo_, -b.hi_), fp::add_up(a.hi_, -b.lo_)};
}

Interval operator*(const Interval& a, const Interval& b) {
  // Zero annihilates even unbounded operands.
  if ((a.lo_ == 0.0 && a.hi_ == 0.0) || (b.lo_ == 0.0 && b.hi_ == 0.0)) {
    return Interval(0.0);
  }
  const double lo = std::min({fp::mul_down(a.lo_, b.lo_), fp::mul_down(a.lo_, b.hi_),
                              fp::mul_down(a.hi_, b.lo_), fp::mul_down(a.hi_, b.hi_)});
  const double hi = std::max({fp::mul_up(a.lo_, b.lo_), fp::mul_up(a.lo_, b.hi_),
                              fp::mul_up(a.hi_, b.lo_), fp::mul_up(a.hi_, b.hi_)});
  return {lo, hi};
}

Interval operator*(double s, const Interval& a) {
  if (s == 0.0) return Interval(0.0);
  if (s > 0.0) return {fp::mul_down(s, a.lo_), fp::mul_up(s, a.hi_)};
  return {fp::mul_down(s, a.hi_), fp::mul_up(s, a.lo_)};
}

Interval Interval::pow(unsigned n) const {
  if (n == 0) return Interval(1.0);
  // Outward-rounded |x|^n for x >= 0.
  auto pow_down = [n](double x) {
    double r = x;
    for (unsigned i = 1; i < n; ++i) r = fp::mul_down(r, x);
    return r;
  };
  auto pow_up = [n](double x) {
    double r = x;
    for (unsigned i = 1; i < n; ++i) r = fp::mul_up(r, x);
    return r;
  };
  if (n % 2 == 0) {
    // Even power: range is [min |x|^n, max |x|^n].
    const double amin = (lo_ <= 0.0 && hi_ >= 0.0) ? 0.0 : std::min(std::fabs(lo_), std::fabs(hi_));
    return {pow_down(amin), pow_up(mag())};
  }
  // Odd power is monotone.
  const double lo = lo_ >= 0.0 ? pow_down(lo_) : -pow_up(-lo_);
  const double hi = hi_ >= 0.0 ? pow_up(hi_) : -pow_down(-hi_);
  return {lo, hi};
}

std::ostream& operator<<(std::ostream& os, const Interval& iv) {
  return os << '[' << iv.lo() << ", " << iv.hi() << ']';
}

}  // namespace tmreach
