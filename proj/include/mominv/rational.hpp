#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace mominv {

using Rational = mpq_class;

/// Parses "7", "-3/4" or "0.25" into a canonical rational.
/// Throws std::invalid_argument on anything else.
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);

}  // namespace mominv
