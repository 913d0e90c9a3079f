#include "mominv/polynomial.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mominv {

MultiIndex::MultiIndex(std::vector<int> exponents) : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw std::invalid_argument("negative exponent in multi-index");
  }
  order_ = std::accumulate(exponents_.begin(), exponents_.end(), 0);
}

MultiIndex MultiIndex::zero(std::size_t n) { return MultiIndex(std::vector<int>(n, 0)); }

MultiIndex MultiIndex::unit(std::size_t n, std::size_t i) {
  std::vector<int> e(n, 0);
  e.at(i) = 1;
  return MultiIndex(std::move(e));
}

MultiIndex MultiIndex::operator+(const MultiIndex& other) const {
  if (other.size() != size()) throw std::invalid_argument("multi-index length mismatch");
  std::vector<int> e(exponents_);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += other.exponents_[i];
  return MultiIndex(std::move(e));
}

bool operator<(const MultiIndex& a, const MultiIndex& b) {
  if (a.order_ != b.order_) return a.order_ < b.order_;
  // Within one order: larger leading exponent first.
  return std::lexicographical_compare(b.exponents_.begin(), b.exponents_.end(),
                                      a.exponents_.begin(), a.exponents_.end());
}

std::vector<MultiIndex> indices_of_order(std::size_t n, int q) {
  std::vector<MultiIndex> out;
  std::vector<int> e(n, 0);
  // Enumerate compositions of q into n parts, leading exponent descending.
  auto rec = [&](auto&& self, std::size_t pos, int remaining) -> void {
    if (pos + 1 == n) {
      e[pos] = remaining;
      out.emplace_back(e);
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      e[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  if (n == 0) return out;
  rec(rec, 0, q);
  return out;
}

std::string monomial_string(const MultiIndex& alpha) {
  if (alpha.is_zero()) return "1";
  std::string s;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] == 0) continue;
    if (!s.empty()) s += '*';
    s += 'x' + std::to_string(i + 1);
    if (alpha[i] > 1) s += '^' + std::to_string(alpha[i]);
  }
  return s;
}

std::string moment_string(const MultiIndex& alpha) { return "E[" + monomial_string(alpha) + "]"; }

Polynomial Polynomial::constant(std::size_t n, const Rational& c) {
  Polynomial p(n);
  p.add_term(MultiIndex::zero(n), c);
  return p;
}

Polynomial Polynomial::variable(std::size_t n, std::size_t i) {
  Polynomial p(n);
  p.add_term(MultiIndex::unit(n, i), 1);
  return p;
}

Polynomial Polynomial::monomial(const MultiIndex& alpha, const Rational& c) {
  Polynomial p(alpha.size());
  p.add_term(alpha, c);
  return p;
}

int Polynomial::degree() const {
  int d = -1;
  for (const auto& [alpha, c] : terms_) d = std::max(d, alpha.order());
  return d;
}

Rational Polynomial::coefficient(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? Rational(0) : it->second;
}

void Polynomial::add_term(const MultiIndex& alpha, const Rational& c) {
  if (alpha.size() != n_) throw std::invalid_argument("monomial has wrong number of variables");
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(alpha, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  for (const auto& [alpha, c] : other.terms_) add_term(alpha, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  for (const auto& [alpha, c] : other.terms_) add_term(alpha, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [alpha, coef] : terms_) coef *= c;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.n_ != b.n_) throw std::invalid_argument("polynomial variable count mismatch");
  Polynomial out(a.n_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) out.add_term(ea + eb, ca * cb);
  }
  return out;
}

Polynomial Polynomial::pow(unsigned e) const {
  Polynomial result = constant(n_, 1);
  Polynomial base = *this;
  while (e > 0) {
    if (e & 1U) result = result * base;
    e >>= 1U;
    if (e > 0) base = base * base;
  }
  return result;
}

Rational Polynomial::evaluate(std::span<const Rational> x) const {
  if (x.size() != n_) throw std::invalid_argument("evaluation point has wrong dimension");
  Rational sum = 0;
  for (const auto& [alpha, c] : terms_) {
    Rational t = c;
    for (std::size_t i = 0; i < n_; ++i) {
      for (int p = 0; p < alpha[i]; ++p) t *= x[i];
    }
    sum += t;
  }
  return sum;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [alpha, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c.get_str();
    if (!alpha.is_zero()) os << '*' << monomial_string(alpha);
  }
  return os.str();
}

}  // namespace mominv
