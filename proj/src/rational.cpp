#include "mominv/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace mominv {

namespace {

bool is_integer_literal(std::string_view s) {
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

mpz_class parse_integer(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  return mpz_class(std::string(s), 10);
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto bad = [&] {
    return std::invalid_argument("not a rational number: '" + std::string(text) + "'");
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = text.substr(0, slash);
    auto den = text.substr(slash + 1);
    if (!is_integer_literal(num) || !is_integer_literal(den)) throw bad();
    mpz_class d = parse_integer(den);
    if (d == 0) throw bad();
    Rational q(parse_integer(num), d);
    q.canonicalize();
    return q;
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto whole = text.substr(0, dot);
    auto frac = text.substr(dot + 1);
    bool negative = !whole.empty() && whole.front() == '-';
    if (whole.empty() || whole == "-" || whole == "+") whole = "0";
    if (!is_integer_literal(whole) || frac.empty() || !is_integer_literal(frac) ||
        frac.front() == '-' || frac.front() == '+') {
      throw bad();
    }
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    mpz_class w = parse_integer(whole);
    if (w < 0) w = -w;
    Rational q(w * scale + parse_integer(frac), scale);
    q.canonicalize();
    return negative ? Rational(-q) : q;
  }
  if (!is_integer_literal(text)) throw bad();
  return Rational(parse_integer(text));
}

std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace mominv
