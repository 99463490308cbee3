#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace treedyn {

// Invalid input data (malformed trees, out-of-range points, bad files).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Broken internal invariant; any throw of this is a bug.
struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exact scalar for the counterexample family and for every periodicity claim.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// The library is generic over the coordinate scalar: Rational for exact work,
// double for the estimators. NumTraits is the only place that knows which is which.
template <class R>
struct NumTraits;

template <>
struct NumTraits<double> {
    static constexpr bool exact = false;
    static constexpr const char* name = "float";

    static double from_fraction(long long num, long long den) {
        return static_cast<double>(num) / static_cast<double>(den);
    }
    static double to_double(double x) { return x; }
    static double abs(double x) { return std::fabs(x); }

    // Breakpoints in the library are exactly representable; this only absorbs
    // rounding in derived quantities.
    static double continuity_tol() { return 1e-12; }

    // %.17g round-trips doubles, keeping serialized output byte-stable.
    static std::string format(double x) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return buf;
    }

    static double parse(std::string_view s);
};

template <>
struct NumTraits<Rational> {
    static constexpr bool exact = true;
    static constexpr const char* name = "rational";

    static Rational from_fraction(long long num, long long den) {
        return Rational(num, den);
    }
    static double to_double(const Rational& x) { return static_cast<double>(x); }
    static Rational abs(const Rational& x) { return x < 0 ? Rational(-x) : x; }
    static Rational continuity_tol() { return Rational(0); }

    static std::string format(const Rational& x) {
        if (boost::multiprecision::denominator(x) == 1)
            return boost::multiprecision::numerator(x).str();
        return boost::multiprecision::numerator(x).str() + "/" +
               boost::multiprecision::denominator(x).str();
    }

    static Rational parse(std::string_view s);
};

namespace detail {

inline bool parse_decimal_as_rational(std::string_view s, Rational& out) {
    // integer, p/q, or decimal (decimals become exact powers-of-ten fractions)
    bool neg = false;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        neg = s[i] == '-';
        ++i;
    }
    if (i >= s.size()) return false;
    BigInt num = 0, den = 1;
    bool any_digit = false, seen_dot = false, seen_slash = false;
    BigInt slash_den = 0;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c >= '0' && c <= '9') {
            if (seen_slash) {
                slash_den = slash_den * 10 + (c - '0');
            } else {
                num = num * 10 + (c - '0');
                if (seen_dot) den *= 10;
            }
            any_digit = true;
        } else if (c == '.' && !seen_dot && !seen_slash) {
            seen_dot = true;
        } else if (c == '/' && !seen_slash && !seen_dot && any_digit) {
            seen_slash = true;
            any_digit = false;
        } else {
            return false;
        }
    }
    if (!any_digit) return false;
    if (seen_slash) {
        if (slash_den == 0) return false;
        den = slash_den;
    }
    out = Rational(num, den);
    if (neg) out = -out;
    return true;
}

}  // namespace detail

inline Rational NumTraits<Rational>::parse(std::string_view s) {
    Rational r;
    if (detail::parse_decimal_as_rational(s, r)) return r;
    throw InputError("cannot parse '" + std::string(s) + "' as a rational");
}

inline double NumTraits<double>::parse(std::string_view s) {
    // Accept the rational spellings too, so one file can switch numeric mode.
    Rational r;
    if (detail::parse_decimal_as_rational(s, r)) return static_cast<double>(r);
    try {
        std::size_t pos = 0;
        double v = std::stod(std::string(s), &pos);
        if (pos == s.size()) return v;
    } catch (const InputError&) {
        throw;
    } catch (...) {
    }
    throw InputError("cannot parse '" + std::string(s) + "' as a number");
}

}  // namespace treedyn
