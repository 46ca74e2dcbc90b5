#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "tmreach/interval.hpp"

namespace tmreach {

using Exponents = std::vector<unsigned>;

unsigned total_degree(const Exponents& e);

struct Monomial {
  double coefficient = 0.0;
  Exponents exponents;

  unsigned degree() const { return total_degree(exponents); }
};

/// Box of input variables a polynomial is evaluated over.
class Domain {
 public:
  explicit Domain(std::vector<Interval> boxes);
  /// The symbolic box [-1, 1]^n every Taylor model in this library lives on.
  static Domain canonical(std::size_t dim);

  std::size_t dim() const { return boxes_.size(); }
  const std::vector<Interval>& boxes() const { return boxes_; }
  const Interval& operator[](std::size_t i) const { return boxes_[i]; }
  /// Upper bound of |x^e| over the box.
  double monomial_magnitude(const Exponents& e) const;

  bool operator==(const Domain& o) const { return boxes_ == o.boxes_; }

 private:
  std::vector<Interval> boxes_;
  bool unit_ = false;
};

/// Collects floating-point residuals of coefficient arithmetic, weighted by
/// the magnitude of the monomial they belong to, so the owner can fold them
/// into an interval remainder.
class RoundingSink {
 public:
  explicit RoundingSink(const Domain& domain) : domain_(&domain) {}

  void record(const Exponents& e, double abs_err);
  /// Upper bound on |sum of recorded errors| over the domain.
  double total() const { return total_; }

 private:
  const Domain* domain_;
  double total_ = 0.0;
};

/// Coefficients below this magnitude are dropped by prune() and their
/// contribution is reported to the sink.
inline constexpr double kPruneThreshold = 1e-15;

/// Sparse multivariate polynomial keyed by exponent vector.
class Polynomial {
 public:
  using TermMap = std::map<Exponents, double>;

  explicit Polynomial(std::size_t dim);
  static Polynomial constant(std::size_t dim, double c);
  /// coef * x_var
  static Polynomial variable(std::size_t dim, std::size_t var, double coef = 1.0);

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  unsigned degree() const;
  const TermMap& terms() const { return terms_; }
  std::vector<Monomial> monomials() const;
  double coefficient(const Exponents& e) const;
  double constant_term() const;

  /// Adds `c` to the coefficient of `e`. Exact zero results are erased.
  void add_term(const Exponents& e, double c, RoundingSink* sink = nullptr);

  double evaluate(std::span<const double> x) const;
  /// Conservative range over `d`; see polynomial.cpp for the method.
  Interval bounds(const Domain& d) const;

  /// Splits into (terms with degree <= k, terms with degree > k).
  std::pair<Polynomial, Polynomial> split_degree(unsigned k) const;
  /// Removes coefficients with |c| < threshold; their magnitude goes to `sink`.
  void prune(RoundingSink& sink, double threshold = kPruneThreshold);

  Polynomial scaled(double s, RoundingSink* sink = nullptr) const;
  /// this += s * o, in place.
  void add_scaled(const Polynomial& o, double s, RoundingSink* sink = nullptr);
  Polynomial plus(const Polynomial& o, RoundingSink* sink = nullptr) const;
  Polynomial times(const Polynomial& o, RoundingSink* sink = nullptr) const;

  bool operator==(const Polynomial& o) const { return dim_ == o.dim_ && terms_ == o.terms_; }

 private:
  void check_exponents(const Exponents& e) const;

  std::size_t dim_;
  TermMap terms_;
};

Polynomial operator+(const Polynomial& a, const Polynomial& b);
Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator*(double s, const Polynomial& a);

/// Enclosure of a univariate polynomial sum_j coeffs[j] * x^j over `box`
/// from the Bernstein coefficients of degree coeffs.size() - 1.
Interval bernstein_range(std::span<const double> coeffs, const Interval& box);

}  // namespace tmreach
