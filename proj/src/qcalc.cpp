#include "qruns/qcalc.hpp"

#include <algorithm>
#include <vector>

namespace qruns {

template <Scalar T>
T q_binomial(std::int64_t n, std::int64_t m, const T& q) {
  if (m < 0 || n < 0 || m > n) return from_int<T>(0);
  m = std::min(m, n - m);
  // row[j] holds [i choose j]_q while i sweeps 0..n.
  // [i choose j] = [i-1 choose j-1] + q^j [i-1 choose j].
  std::vector<T> row(static_cast<std::size_t>(m + 1), from_int<T>(0));
  std::vector<T> qpow(static_cast<std::size_t>(m + 1));
  qpow[0] = from_int<T>(1);
  for (std::int64_t j = 1; j <= m; ++j) qpow[j] = qpow[j - 1] * q;
  row[0] = from_int<T>(1);
  for (std::int64_t i = 1; i <= n; ++i) {
    for (std::int64_t j = std::min(i, m); j >= 1; --j) {
      row[j] = row[j - 1] + qpow[j] * row[j];
    }
  }
  return row[m];
}

template double q_binomial<double>(std::int64_t, std::int64_t, const double&);
template Rational q_binomial<Rational>(std::int64_t, std::int64_t,
                                      const Rational&);

std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::int64_t result = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    // exact at every step: result * (n - k + i) is divisible by i
    result = result * (n - k + i) / i;
  }
  return result;
}

std::int64_t count_S(std::int64_t a, std::int64_t b, std::int64_t c) {
  if (a < 0 || c < 0) return 0;
  if (a == 0) return c == 0 ? 1 : 0;
  if (b <= 1 || c < a) return 0;
  const std::int64_t upper = std::min(a, (c - a) / (b - 1));
  std::int64_t total = 0;
  for (std::int64_t j = 0; j <= upper; ++j) {
    const std::int64_t term =
        binomial(a, j) * binomial(c - j * (b - 1) - 1, a - 1);
    total += (j % 2 == 0) ? term : -term;
  }
  return total;
}

std::int64_t count_R(std::int64_t a, std::int64_t b, std::int64_t c) {
  if (a <= 0 || c < a) return 0;
  if (b <= 1) return count_M(a, c);
  const std::int64_t upper = std::min(a, (c - a) / (b - 1));
  std::int64_t total = 0;
  for (std::int64_t j = 1; j <= upper; ++j) {
    const std::int64_t term =
        binomial(a, j) * binomial(c - j * (b - 1) - 1, a - 1);
    total += (j % 2 == 1) ? term : -term;
  }
  return total;
}

std::int64_t count_M(std::int64_t a, std::int64_t b) {
  if (a == 0 && b == 0) return 1;
  if (a < 1 || b < a) return 0;
  return binomial(b - 1, a - 1);
}

std::int64_t count_C(std::int64_t a, std::int64_t b, std::int64_t c) {
  if (a < 0) return 0;
  if (a == 0) return 1;
  if (b <= 0 || c < 0) return 0;
  std::int64_t total = 0;
  for (std::int64_t j = 0; j <= b; ++j) {
    const std::int64_t term =
        binomial(b, j) * binomial(a - (c + 1) * j + b - 1, b - 1);
    total += (j % 2 == 0) ? term : -term;
  }
  return total;
}

}  // namespace qruns
