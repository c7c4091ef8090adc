#pragma once

// q-calculus primitives and the classical counting functions that every
// q -> 1 limit reduces to.
//
// q == 1 is a regular input everywhere: q-numbers are evaluated as the
// polynomial 1 + q + ... + q^(z-1), which is the continuous extension of
// (1 - q^z)/(1 - q).

#include "qruns/scalar.hpp"

#include <cstdint>

namespace qruns {

/// [z]_q; equals z at q == 1. Requires z >= 0.
template <Scalar T>
T q_number(std::int64_t z, const T& q) {
  if (z < 0) throw std::domain_error("q_number: z must be >= 0");
  T sum = from_int<T>(0);
  T power = from_int<T>(1);
  for (std::int64_t j = 0; j < z; ++j) {
    sum += power;
    power *= q;
  }
  return sum;
}

/// [m]_q! = [1]_q [2]_q ... [m]_q.
template <Scalar T>
T q_factorial(std::int64_t m, const T& q) {
  if (m < 0) throw std::domain_error("q_factorial: m must be >= 0");
  T result = from_int<T>(1);
  for (std::int64_t j = 2; j <= m; ++j) result *= q_number(j, q);
  return result;
}

/// Gaussian binomial [n choose m]_q, 0 outside 0 <= m <= n.
///
/// Built by the q-Pascal rule so that only additions and multiplications by
/// powers of q occur; no division, so it is exact for rationals and stable
/// for doubles near q = 1.
template <Scalar T>
T q_binomial(std::int64_t n, std::int64_t m, const T& q);

/// (a; q)_n = prod_{k=0}^{n-1} (1 - a q^k).
template <Scalar T>
T q_pochhammer(const T& a, const T& q, std::int64_t n) {
  if (n < 0) throw std::domain_error("q_pochhammer: n must be >= 0");
  T result = from_int<T>(1);
  T term = a;
  const T one = from_int<T>(1);
  for (std::int64_t k = 0; k < n; ++k) {
    result *= one - term;
    term *= q;
  }
  return result;
}

/// Ordinary binomial coefficient with the vanishing convention: 0 unless
/// 0 <= k <= n.
std::int64_t binomial(std::int64_t n, std::int64_t k);

/// S(a, b, c): compositions of c into a parts, each strictly between 0 and b.
/// Alternating-sum formula; 1 for a == c == 0.
std::int64_t count_S(std::int64_t a, std::int64_t b, std::int64_t c);

/// R(a, b, c): compositions of c into a positive parts with some part >= b.
std::int64_t count_R(std::int64_t a, std::int64_t b, std::int64_t c);

/// M(a, b) = binomial(b-1, a-1): compositions of b into a positive parts.
std::int64_t count_M(std::int64_t a, std::int64_t b);

/// C(a, b, c): solutions of x_1 + ... + x_b = a with 0 <= x_i <= c.
std::int64_t count_C(std::int64_t a, std::int64_t b, std::int64_t c);

}  // namespace qruns
