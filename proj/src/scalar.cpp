#include "qruns/scalar.hpp"

#include <cctype>
#include <cstdio>
#include <sstream>

namespace qruns {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

Rational parse_decimal(std::string_view text) {
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  const auto dot = body.find('.');
  std::string_view whole = body.substr(0, dot);
  std::string_view frac =
      dot == std::string_view::npos ? std::string_view{} : body.substr(dot + 1);
  if (whole.empty() && frac.empty()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  if ((!whole.empty() && !all_digits(whole)) ||
      (dot != std::string_view::npos && !frac.empty() && !all_digits(frac)) ||
      (dot != std::string_view::npos && frac.empty() && whole.empty())) {
    throw std::invalid_argument("not a plain decimal: '" + std::string(text) +
                                "'");
  }
  std::string digits = std::string(whole) + std::string(frac);
  if (digits.empty()) digits = "0";
  mpz_class num{digits, 10};
  mpz_class den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  Rational r{num, den};
  r.canonicalize();
  return negative ? Rational{-r} : r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty number");
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);

  std::string_view num_text = text.substr(0, slash);
  std::string_view den_text = text.substr(slash + 1);
  std::string_view num_digits = num_text;
  if (!num_digits.empty() && (num_digits.front() == '-' || num_digits.front() == '+')) {
    num_digits.remove_prefix(1);
  }
  if (!all_digits(num_digits) || !all_digits(den_text)) {
    throw std::invalid_argument("malformed fraction: '" + std::string(text) +
                                "'");
  }
  mpz_class den{std::string(den_text), 10};
  if (den == 0) throw std::invalid_argument("zero denominator");
  mpz_class num{std::string(num_digits), 10};
  if (num_text.front() == '-') num = -num;
  Rational r{num, den};
  r.canonicalize();
  return r;
}

double parse_double(std::string_view text) {
  if (text.find('/') != std::string_view::npos) {
    return parse_rational(text).get_d();
  }
  std::size_t used = 0;
  const std::string owned{text};
  double v = 0.0;
  try {
    v = std::stod(owned, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + owned + "'");
  }
  if (used != owned.size()) {
    throw std::invalid_argument("trailing characters in '" + owned + "'");
  }
  return v;
}

std::string format_exact(const Rational& v) {
  Rational c = v;
  c.canonicalize();
  return c.get_str();
}

std::string format_double(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace qruns
