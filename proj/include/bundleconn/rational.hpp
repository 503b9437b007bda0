#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace bundleconn {

/// Exact rational number, always canonical (lowest terms, positive denominator).
using Rational = mpq_class;

/// Parses "num/den" or "num"; throws InputError on malformed text or zero denominator.
Rational parse_rational(std::string_view text);

/// Canonical "num/den" text; integers are written with denominator 1.
std::string to_string(const Rational& q);

using RationalVector = std::vector<Rational>;

}  // namespace bundleconn
