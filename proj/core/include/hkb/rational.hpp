#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace hkb {

using Rational = mpq_class;
using Integer = mpz_class;

// Accepts "n", "n/d", or a decimal literal such as "0.25".
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& x);

Rational rational_pow(const Rational& base, long exponent);
bool is_integer(const Rational& x);

}  // namespace hkb
