#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mominv/rational.hpp"

namespace mominv {

/// Exponent vector of a monomial x^alpha, also used to name the moment E[x^alpha].
///
/// Ordering is graded-lexicographic: lower total order first, and within one
/// order the larger exponent on the earlier species first. For three species
/// this gives x1 < x2 < x3 < x1^2 < x1*x2 < x1*x3 < x2^2 < x2*x3 < x3^2.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> exponents);

  static MultiIndex zero(std::size_t n);
  static MultiIndex unit(std::size_t n, std::size_t i);

  std::size_t size() const noexcept { return exponents_.size(); }
  int operator[](std::size_t i) const { return exponents_[i]; }
  std::span<const int> exponents() const noexcept { return exponents_; }
  int order() const noexcept { return order_; }
  bool is_zero() const noexcept { return order_ == 0; }

  MultiIndex operator+(const MultiIndex& other) const;

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    return a.exponents_ == b.exponents_;
  }
  friend bool operator<(const MultiIndex& a, const MultiIndex& b);

 private:
  std::vector<int> exponents_;
  int order_ = 0;
};

/// Every multi-index over n species with total order q, in graded-lex order.
std::vector<MultiIndex> indices_of_order(std::size_t n, int q);

/// "x1*x3", "x2^2"; the zero index renders as "1".
std::string monomial_string(const MultiIndex& alpha);

/// "E[x1*x3]".
std::string moment_string(const MultiIndex& alpha);

/// Sparse multivariate polynomial with exact rational coefficients.
/// Zero coefficients are never stored.
class Polynomial {
 public:
  using Terms = std::map<MultiIndex, Rational>;

  explicit Polynomial(std::size_t n) : n_(n) {}

  static Polynomial constant(std::size_t n, const Rational& c);
  static Polynomial variable(std::size_t n, std::size_t i);
  static Polynomial monomial(const MultiIndex& alpha, const Rational& c = 1);

  std::size_t variables() const noexcept { return n_; }
  const Terms& terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  /// Total degree; -1 for the zero polynomial.
  int degree() const;

  /// Coefficient of x^alpha (zero when absent).
  Rational coefficient(const MultiIndex& alpha) const;

  /// Adds c*x^alpha, dropping the term if it cancels.
  void add_term(const MultiIndex& alpha, const Rational& c);

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(const Rational& c);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }

  Polynomial pow(unsigned e) const;

  Rational evaluate(std::span<const Rational> x) const;

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.n_ == b.n_ && a.terms_ == b.terms_;
  }

  std::string to_string() const;

 private:
  std::size_t n_;
  Terms terms_;
};

}  // namespace mominv
