#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace soclearn {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using RationalTable = std::vector<std::vector<Rational>>;

// Parses "p/q" or an integer literal. Returns nullopt for anything else
// (decimals, exponents, garbage); callers decide whether a real is allowed.
std::optional<Rational> parse_exact_rational(std::string_view text);

double to_double(const Rational& value);
std::string to_string(const Rational& value);

Rational pow(const Rational& base, std::size_t exponent);

// Least common multiple of the denominators of `values` (each in lowest terms).
BigInt lcd(std::span<const Rational> values);

// Best rational approximation p/q of x with 1 <= q <= max_denominator, using the
// continued-fraction convergents and the admissible semiconvergent.
Rational best_rational_approximation(double x, std::int64_t max_denominator);

} // namespace soclearn
