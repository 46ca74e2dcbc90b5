#pragma once

#include <memory>
#include <span>
#include <vector>

#include "tmreach/interval.hpp"
#include "tmreach/polynomial.hpp"

namespace tmreach {

/// Absolute slack added to the remainder by every Taylor-model operation
/// that performs floating-point arithmetic.
inline constexpr double kRemainderSlack = 1e-12;

inline constexpr unsigned kDefaultOrder = 2;
inline constexpr unsigned kMaxOrder = 6;

using DomainPtr = std::shared_ptr<const Domain>;

/// Polynomial p over a box D plus an interval remainder I: the enclosed
/// function f satisfies f(x) in p(x) + I for every x in D.
class TaylorModel {
 public:
  TaylorModel(Polynomial poly, Interval remainder, DomainPtr domain, unsigned order = kDefaultOrder);

  static TaylorModel constant(double c, DomainPtr domain, unsigned order = kDefaultOrder);
  static TaylorModel zero(DomainPtr domain, unsigned order = kDefaultOrder) {
    return constant(0.0, std::move(domain), order);
  }
  /// Affine model center(iv) + radius(iv) * x_var with zero remainder over
  /// the canonical domain. Its bounds reproduce `iv` (up to one ulp of
  /// outward rounding when center/radius are not representable).
  static TaylorModel from_interval(const Interval& iv, std::size_t var, DomainPtr domain,
                                   unsigned order = kDefaultOrder);

  const Polynomial& poly() const { return poly_; }
  const Interval& remainder() const { return remainder_; }
  const Domain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  unsigned order() const { return order_; }
  std::size_t dim() const { return domain_->dim(); }

  /// poly bounds over the domain, Minkowski-summed with the remainder.
  Interval bounds() const;
  /// Point value of the polynomial part (remainder excluded).
  double evaluate(std::span<const double> x) const { return poly_.evaluate(x); }
  /// True iff value lies in p(x) + I.
  bool encloses(std::span<const double> x, double value) const;

  TaylorModel with_remainder(const Interval& r) const;
  /// Remainder Minkowski-summed with `extra`.
  TaylorModel widened(const Interval& extra) const;

 private:
  Polynomial poly_;
  Interval remainder_;
  DomainPtr domain_;
  unsigned order_;
};

/// (p1 + p2, I1 + I2).
TaylorModel add(const TaylorModel& a, const TaylorModel& b);
TaylorModel subtract(const TaylorModel& a, const TaylorModel& b);
TaylorModel scale(const TaylorModel& a, double s);
TaylorModel add_constant(const TaylorModel& a, double c);
/// (p1 p2 - r_k, I1 I2 + Int(p1) I2 + Int(p2) I1 + Int(r_k)), r_k the terms of degree > k.
TaylorModel multiply(const TaylorModel& a, const TaylorModel& b, unsigned order);
/// Moves terms of degree > k into the remainder.
TaylorModel truncate(const TaylorModel& t, unsigned order);
/// sum_i weights[i] * tms[i] + bias, accumulated in index order.
TaylorModel weighted_sum(std::span<const TaylorModel> tms, std::span<const double> weights, double bias,
                         unsigned order);
/// t^n by repeated multiplication.
TaylorModel power(const TaylorModel& t, unsigned n, unsigned order);

inline TaylorModel operator+(const TaylorModel& a, const TaylorModel& b) { return add(a, b); }
inline TaylorModel operator-(const TaylorModel& a, const TaylorModel& b) { return subtract(a, b); }
inline TaylorModel operator*(double s, const TaylorModel& a) { return scale(a, s); }

/// Every model in `tms` is defined on the same domain.
void require_same_domain(std::span<const TaylorModel> tms);

}  // namespace tmreach
