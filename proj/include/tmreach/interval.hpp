#pragma once

#include <algorithm>
#include <cmath>
#include <iosfwd>
#include <limits>
#include <stdexcept>

namespace tmreach {

/// Closed interval [lo, hi] with outward-rounded arithmetic.
///
/// Results of +, -, * are exact whenever the endpoint operation is exact in
/// double precision; otherwise the affected endpoint is moved one ulp
/// outward. Exactness is detected with error-free transforms (TwoSum, FMA),
/// so no change of the FPU rounding mode is needed.
class Interval {
 public:
  constexpr Interval() = default;
  constexpr explicit Interval(double point) : lo_(point), hi_(point) {}
  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo <= hi)) {
      throw std::invalid_argument("Interval: lower bound exceeds upper bound");
    }
  }

  static Interval symmetric(double radius) { return {-radius, radius}; }
  static Interval hull(double a, double b) { return {std::min(a, b), std::max(a, b)}; }
  static Interval entire() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf};
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double width() const { return hi_ - lo_; }
  double mid() const { return 0.5 * (lo_ + hi_); }
  double radius() const { return 0.5 * (hi_ - lo_); }
  double mag() const { return std::max(std::fabs(lo_), std::fabs(hi_)); }
  bool is_point() const { return lo_ == hi_; }
  bool is_finite() const { return std::isfinite(lo_) && std::isfinite(hi_); }

  bool contains(double x) const { return lo_ <= x && x <= hi_; }
  bool contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }
  bool intersects(const Interval& o) const { return lo_ <= o.hi_ && o.lo_ <= hi_; }

  /// Smallest interval containing both operands.
  Interval join(const Interval& o) const {
    return {std::min(lo_, o.lo_), std::max(hi_, o.hi_)};
  }
  /// Widens both endpoints by `slack` (>= 0).
  Interval inflated(double slack) const;

  Interval operator-() const { return Interval(-hi_, -lo_, Unchecked{}); }

  friend Interval operator+(const Interval& a, const Interval& b);
  friend Interval operator-(const Interval& a, const Interval& b);
  friend Interval operator*(const Interval& a, const Interval& b);
  friend Interval operator*(double s, const Interval& a);
  friend Interval operator*(const Interval& a, double s) { return s * a; }

  Interval& operator+=(const Interval& o) { return *this = *this + o; }
  Interval& operator*=(const Interval& o) { return *this = *this * o; }

  /// x^n with exact handling of even powers (the result never dips below 0).
  Interval pow(unsigned n) const;

  bool operator==(const Interval&) const = default;

 private:
  struct Unchecked {};
  Interval(double lo, double hi, Unchecked) : lo_(lo), hi_(hi) {}

  double lo_ = 0.0;
  double hi_ = 0.0;
};

std::ostream& operator<<(std::ostream& os, const Interval& iv);

/// Rounded sum and product that report the direction of their rounding error.
/// Used by Interval and by the polynomial layer to keep coefficient
/// arithmetic accountable.
namespace fp {

/// Returns fl(a + b); `err` receives the exact residual (a + b) - fl(a + b).
inline double two_sum(double a, double b, double& err) {
  const double s = a + b;
  const double bb = s - a;
  err = (a - (s - bb)) + (b - bb);
  return s;
}

/// Returns fl(a * b); `err` receives the exact residual (a * b) - fl(a * b).
inline double two_prod(double a, double b, double& err) {
  const double p = a * b;
  err = std::fma(a, b, -p);
  return p;
}

inline double down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }
inline double up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }

/// Lower/upper bounds of a + b and a * b.
double add_down(double a, double b);
double add_up(double a, double b);
double mul_down(double a, double b);
double mul_up(double a, double b);

}  // namespace fp

}  // namespace tmreach
