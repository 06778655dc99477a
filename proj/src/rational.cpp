#include "soclearn/rational.hpp"

#include <boost/multiprecision/integer.hpp>

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace soclearn {

namespace {

bool is_integer_literal(std::string_view s) {
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

} // namespace

std::optional<Rational> parse_exact_rational(std::string_view text) {
    text = trim(text);
    auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        if (!is_integer_literal(text)) return std::nullopt;
        if (text.front() == '+') text.remove_prefix(1);
        return Rational(BigInt(std::string(text)));
    }
    auto num = trim(text.substr(0, slash));
    auto den = trim(text.substr(slash + 1));
    if (!is_integer_literal(num) || !is_integer_literal(den)) return std::nullopt;
    if (num.front() == '+') num.remove_prefix(1);
    if (den.front() == '+') den.remove_prefix(1);
    BigInt d(std::string{den});
    if (d == 0) return std::nullopt;
    return Rational(BigInt(std::string{num}), d);
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

std::string to_string(const Rational& value) {
    if (denominator(value) == 1) return numerator(value).str();
    return numerator(value).str() + "/" + denominator(value).str();
}

Rational pow(const Rational& base, std::size_t exponent) {
    Rational result = 1;
    Rational b = base;
    while (exponent > 0) {
        if (exponent & 1U) result *= b;
        exponent >>= 1U;
        if (exponent > 0) b *= b;
    }
    return result;
}

BigInt lcd(std::span<const Rational> values) {
    BigInt acc = 1;
    for (const auto& v : values) {
        BigInt d = denominator(v);
        acc = acc / boost::multiprecision::gcd(acc, d) * d;
    }
    return acc;
}

Rational best_rational_approximation(double x, std::int64_t max_denominator) {
    if (!std::isfinite(x)) throw std::invalid_argument("best_rational_approximation: non-finite input");
    if (max_denominator < 1) throw std::invalid_argument("best_rational_approximation: max_denominator < 1");

    // Work on the exact binary value of x so that the expansion terminates.
    int exp = 0;
    double mant = std::frexp(x, &exp);
    auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
    Rational exact = exp - 53 >= 0 ? Rational(BigInt(scaled) << (exp - 53))
                                   : Rational(BigInt(scaled), BigInt(1) << (53 - exp));
    if (denominator(exact) <= max_denominator) return exact;

    const BigInt limit = max_denominator;
    // Convergents h/k with the standard recurrence.
    BigInt h_prev = 1, h = 0, k_prev = 0, k = 1;
    BigInt num = numerator(exact), den = denominator(exact);
    // Floor division that rounds toward -inf for negatives.
    auto floor_div = [](const BigInt& a, const BigInt& b) {
        BigInt q = a / b;
        if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
        return q;
    };
    // h/k after first step is a0/1.
    {
        BigInt a = floor_div(num, den);
        BigInt rem = num - a * den;
        h_prev = 1; k_prev = 0;
        h = a; k = 1;
        num = den; den = rem;
    }
    while (den != 0) {
        BigInt a = floor_div(num, den);
        BigInt k_next = a * k + k_prev;
        if (k_next > limit) {
            // Largest semiconvergent that fits, compared against the last convergent.
            BigInt t = (limit - k_prev) / k;
            Rational semi(t * h + h_prev, t * k + k_prev);
            Rational conv(h, k);
            Rational d_semi = semi - exact;
            Rational d_conv = conv - exact;
            if (d_semi < 0) d_semi = -d_semi;
            if (d_conv < 0) d_conv = -d_conv;
            return (t > 0 && d_semi < d_conv) ? semi : conv;
        }
        BigInt h_next = a * h + h_prev;
        h_prev = h; k_prev = k;
        h = h_next; k = k_next;
        BigInt rem = num - a * den;
        num = den; den = rem;
    }
    return Rational(h, k);
}

} // namespace soclearn
