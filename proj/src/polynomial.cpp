#include "tmreach/polynomial.hpp"

#include <algorithm>
#include <numeric>
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

}  // namespace

unsigned total_degree(const Exponents& e) {
  return std::accumulate(e.begin(), e.end(), 0u);
}

Domain::Domain(std::vector<Interval> boxes) : boxes_(std::move(boxes)) {
  if (boxes_.empty()) throw std::invalid_argument("Domain: dimension must be positive");
  for (const auto& b : boxes_) {
    if (!b.is_finite()) throw std::invalid_argument("Domain: boxes must be finite");
  }
  unit_ = std::all_of(boxes_.begin(), boxes_.end(), [](const Interval& b) { return b.mag() == 1.0; });
}

Domain Domain::canonical(std::size_t dim) {
  return Domain(std::vector<Interval>(dim, Interval(-1.0, 1.0)));
}

double Domain::monomial_magnitude(const Exponents& e) const {
  double m = 1.0;
  if (unit_) return m;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double v = boxes_[i].mag();
    for (unsigned k = 0; k < e[i]; ++k) m = fp::mul_up(m, v);
  }
  return m;
}

void RoundingSink::record(const Exponents& e, double abs_err) {
  if (abs_err == 0.0) return;
  const double m = domain_->monomial_magnitude(e);
  total_ = fp::add_up(total_, m == 1.0 ? std::fabs(abs_err) : fp::mul_up(std::fabs(abs_err), m));
}

Polynomial::Polynomial(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("Polynomial: dimension must be positive");
}

Polynomial Polynomial::constant(std::size_t dim, double c) {
  Polynomial p(dim);
  p.add_term(Exponents(dim, 0), c);
  return p;
}

Polynomial Polynomial::variable(std::size_t dim, std::size_t var, double coef) {
  if (var >= dim) throw std::out_of_range("Polynomial::variable: index out of range");
  Polynomial p(dim);
  Exponents e(dim, 0);
  e[var] = 1;
  p.add_term(e, coef);
  return p;
}

void Polynomial::check_exponents(const Exponents& e) const {
  if (e.size() != dim_) {
    throw std::invalid_argument("Polynomial: exponent vector has length " + std::to_string(e.size()) +
                                ", expected " + std::to_string(dim_));
  }
}

unsigned Polynomial::degree() const {
  unsigned d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
  return d;
}

std::vector<Monomial> Polynomial::monomials() const {
  std::vector<Monomial> out;
  out.reserve(terms_.size());
  for (const auto& [e, c] : terms_) out.push_back({c, e});
  return out;
}

double Polynomial::coefficient(const Exponents& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::constant_term() const { return coefficient(Exponents(dim_, 0)); }

void Polynomial::add_term(const Exponents& e, double c, RoundingSink* sink) {
  check_exponents(e);
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(e, c);
  if (inserted) return;
  double err = 0.0;
  it->second = fp::two_sum(it->second, c, err);
  if (sink) sink->record(e, err);
  if (it->second == 0.0) terms_.erase(it);
}

double Polynomial::evaluate(std::span<const double> x) const {
  if (x.size() != dim_) throw std::invalid_argument("Polynomial::evaluate: point dimension mismatch");
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double m = c;
    for (std::size_t i = 0; i < dim_; ++i) {
      for (unsigned k = 0; k < e[i]; ++k) m *= x[i];
    }
    sum += m;
  }
  return sum;
}

// Range bound: the constant term, plus for every variable the range of the
// terms that depend on that variable alone (per-monomial bound intersected
// with the Bernstein enclosure of that univariate part), plus a
// per-monomial interval bound of every mixed term.
Interval Polynomial::bounds(const Domain& d) const {
  if (d.dim() != dim_) {
    throw std::invalid_argument("Polynomial::bounds: domain has dimension " + std::to_string(d.dim()) +
                                ", polynomial has " + std::to_string(dim_));
  }
  Interval total(0.0);
  std::vector<std::vector<double>> univariate(dim_);
  std::vector<Interval> univariate_sum(dim_, Interval(0.0));

  for (const auto& [e, c] : terms_) {
    std::size_t nonzero = 0;
    std::size_t var = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
      if (e[i] != 0) {
        ++nonzero;
        var = i;
      }
    }
    if (nonzero == 0) {
      total += Interval(c);
      continue;
    }
    Interval m(1.0);
    for (std::size_t i = 0; i < dim_; ++i) {
      if (e[i] != 0) m = m * d[i].pow(e[i]);
    }
    m = c * m;
    if (nonzero == 1) {
      auto& coeffs = univariate[var];
      if (coeffs.size() <= e[var]) coeffs.resize(e[var] + 1, 0.0);
      coeffs[e[var]] = c;
      univariate_sum[var] += m;
    } else {
      total += m;
    }
  }

  for (std::size_t i = 0; i < dim_; ++i) {
    if (univariate[i].empty()) continue;
    Interval r = univariate_sum[i];
    if (univariate[i].size() > 2) {
      const Interval b = bernstein_range(univariate[i], d[i]);
      const double lo = std::max(r.lo(), b.lo());
      const double hi = std::min(r.hi(), b.hi());
      if (lo <= hi) r = Interval(lo, hi);
    }
    total += r;
  }
  return total;
}

Interval bernstein_range(std::span<const double> coeffs, const Interval& box) {
  const std::size_t n1 = coeffs.size();
  if (n1 == 0) return Interval(0.0);
  const unsigned n = static_cast<unsigned>(n1 - 1);
  const double lo = box.lo();
  const double w = box.width();

  // Coefficients in s where x = lo + w s, s in [0, 1].
  std::vector<double> shifted(n1, 0.0);
  double magnitude = 0.0;
  for (unsigned j = 0; j <= n; ++j) {
    if (coeffs[j] == 0.0) continue;
    magnitude += std::fabs(coeffs[j]) * std::pow(std::fabs(lo) + std::fabs(w), j) * std::pow(2.0, j);
    for (unsigned m = 0; m <= j; ++m) {
      shifted[m] += coeffs[j] * binomial(j, m) * std::pow(lo, j - m) * std::pow(w, m);
    }
  }
  double bmin = std::numeric_limits<double>::infinity();
  double bmax = -bmin;
  for (unsigned i = 0; i <= n; ++i) {
    double beta = 0.0;
    for (unsigned m = 0; m <= i; ++m) beta += binomial(i, m) / binomial(n, m) * shifted[m];
    bmin = std::min(bmin, beta);
    bmax = std::max(bmax, beta);
  }
  // The transform above runs in round-to-nearest; cover its error.
  const double slack = 16.0 * (n + 1) * (n + 1) * kUnitRoundoff * magnitude;
  return Interval(bmin, bmax).inflated(slack);
}

std::pair<Polynomial, Polynomial> Polynomial::split_degree(unsigned k) const {
  Polynomial low(dim_), high(dim_);
  for (const auto& [e, c] : terms_) {
    (total_degree(e) <= k ? low : high).terms_.emplace(e, c);
  }
  return {std::move(low), std::move(high)};
}

void Polynomial::prune(RoundingSink& sink, double threshold) {
  for (auto it = terms_.begin(); it != terms_.end();) {
    if (std::fabs(it->second) < threshold) {
      sink.record(it->first, it->second);
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
}

Polynomial Polynomial::scaled(double s, RoundingSink* sink) const {
  Polynomial out(dim_);
  if (s == 0.0) return out;
  for (const auto& [e, c] : terms_) {
    double err = 0.0;
    const double v = fp::two_prod(c, s, err);
    if (sink) sink->record(e, err);
    if (v != 0.0) out.terms_.emplace_hint(out.terms_.end(), e, v);
  }
  return out;
}

void Polynomial::add_scaled(const Polynomial& o, double s, RoundingSink* sink) {
  if (o.dim_ != dim_) throw std::invalid_argument("Polynomial::add_scaled: dimension mismatch");
  if (s == 0.0) return;
  for (const auto& [e, c] : o.terms_) {
    double err = 0.0;
    const double v = fp::two_prod(c, s, err);
    if (sink) sink->record(e, err);
    if (v == 0.0) continue;
    const auto it = terms_.lower_bound(e);
    if (it == terms_.end() || it->first != e) {
      terms_.emplace_hint(it, e, v);
      continue;
    }
    double sum_err = 0.0;
    it->second = fp::two_sum(it->second, v, sum_err);
    if (sink) sink->record(e, sum_err);
    if (it->second == 0.0) terms_.erase(it);
  }
}

Polynomial Polynomial::plus(const Polynomial& o, RoundingSink* sink) const {
  if (o.dim_ != dim_) throw std::invalid_argument("Polynomial::plus: dimension mismatch");
  Polynomial out = *this;
  for (const auto& [e, c] : o.terms_) out.add_term(e, c, sink);
  return out;
}

Polynomial Polynomial::times(const Polynomial& o, RoundingSink* sink) const {
  if (o.dim_ != dim_) throw std::invalid_argument("Polynomial::times: dimension mismatch");
  Polynomial out(dim_);
  Exponents e(dim_);
  for (const auto& [ea, ca] : terms_) {
    for (const auto& [eb, cb] : o.terms_) {
      for (std::size_t i = 0; i < dim_; ++i) e[i] = ea[i] + eb[i];
      double err = 0.0;
      const double p = fp::two_prod(ca, cb, err);
      if (sink) sink->record(e, err);
      out.add_term(e, p, sink);
    }
  }
  return out;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) { return a.plus(b); }
Polynomial operator*(const Polynomial& a, const Polynomial& b) { return a.times(b); }
Polynomial operator*(double s, const Polynomial& a) { return a.scaled(s); }

}  // namespace tmreach
