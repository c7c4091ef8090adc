#pragma once

// Numeric regimes shared by every module.
//
// All evaluators are templates over a Scalar type and are explicitly
// instantiated for two regimes: double (fast, tolerance-compared) and
// Rational (GMP mpq_class, exact). Theta and q given as fractions keep a
// whole pipeline exact.

#include <gmpxx.h>

#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qruns {

using Rational = mpq_class;

/// Default absolute tolerance for float-regime comparisons.
inline constexpr double kFloatTolerance = 1e-10;

template <typename T>
concept Scalar = std::same_as<T, double> || std::same_as<T, Rational>;

template <Scalar T>
T from_int(std::int64_t v) {
  if constexpr (std::same_as<T, double>) {
    return static_cast<double>(v);
  } else {
    Rational r{mpz_class{std::to_string(v), 10}};
    return r;
  }
}

/// base^exp for exp >= 0, by squaring. pow(x, 0) == 1 including x == 0.
template <Scalar T>
T ipow(const T& base, std::int64_t exp) {
  if (exp < 0) throw std::domain_error("ipow: negative exponent");
  T result = from_int<T>(1);
  T b = base;
  while (exp > 0) {
    if (exp & 1) result *= b;
    exp >>= 1;
    if (exp > 0) b *= b;
  }
  return result;
}

template <Scalar T>
double to_double(const T& v) {
  if constexpr (std::same_as<T, double>) {
    return v;
  } else {
    return v.get_d();
  }
}

template <Scalar T>
T abs_value(const T& v) {
  if constexpr (std::same_as<T, double>) {
    return v < 0 ? -v : v;
  } else {
    return abs(v);
  }
}

/// Exact equality for Rational, |a-b| <= tol for double.
template <Scalar T>
bool scalar_equal(const T& a, const T& b, double tol = kFloatTolerance) {
  if constexpr (std::same_as<T, double>) {
    return abs_value(a - b) <= tol;
  } else {
    return a == b;
  }
}

/// Parses "p/q", an integer, or a plain decimal ("0.25", "-3", ".5") into an
/// exact rational. Exponent notation, inf and nan are rejected.
Rational parse_rational(std::string_view text);

/// Parses any std::stod-accepted number, or a "p/q" fraction.
double parse_double(std::string_view text);

/// "num/den" for non-integers, "num" for integers.
std::string format_exact(const Rational& v);

/// printf-style %g with `digits` significant digits.
std::string format_double(double v, int digits = 17);

template <Scalar T>
std::string format_scalar(const T& v, int digits = 17) {
  if constexpr (std::same_as<T, double>) {
    return format_double(v, digits);
  } else {
    return format_exact(v);
  }
}

template <Scalar T>
T parse_scalar(std::string_view text) {
  if constexpr (std::same_as<T, double>) {
    return parse_double(text);
  } else {
    return parse_rational(text);
  }
}

}  // namespace qruns
