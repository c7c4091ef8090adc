#pragma once

// Waiting-time and longest-run distributions assembled from kernels.

#include "qruns/kernels.hpp"
#include "qruns/model.hpp"

#include <cstdint>
#include <vector>

namespace qruns {

/// Probabilities on offset, offset+1, ...
template <Scalar T>
struct Pmf {
  std::int64_t offset = 0;
  std::vector<T> probs;

  T total() const {
    T sum = from_int<T>(0);
    for (const auto& p : probs) sum += p;
    return sum;
  }
  /// 0 outside the stored range.
  T at(std::int64_t n) const {
    if (n < offset || n >= offset + static_cast<std::int64_t>(probs.size())) {
      return from_int<T>(0);
    }
    return probs[static_cast<std::size_t>(n - offset)];
  }
};

enum class Relation { LE, GE };

/// min(k1, k2) in sooner mode, k1 + k2 in later mode.
std::int64_t support_minimum(const QuotaSpec& quota);

/// P(W = n) for the quota configuration.
template <Scalar T>
T waiting_time_pmf(const ModelParams<T>& params, const QuotaSpec& quota,
                   std::int64_t n, KernelValueCache<T>& cache);

template <Scalar T>
T waiting_time_pmf(const ModelParams<T>& params, const QuotaSpec& quota,
                   std::int64_t n);

/// Sooner frequency/frequency waiting time written as a difference of
/// q-binomial tails.
template <Scalar T>
T sooner_freq_freq_closed(const ModelParams<T>& params, std::int64_t k1,
                          std::int64_t k2, std::int64_t n);

/// P(longest success run in n trials == k).
template <Scalar T>
T longest_run_pmf(const ModelParams<T>& params, std::int64_t n, std::int64_t k);

/// P(longest success run in n trials <= k).
template <Scalar T>
T longest_run_cdf(const ModelParams<T>& params, std::int64_t n, std::int64_t k);

/// P(longest success run rel1 k1 and longest failure run rel2 k2).
/// GE needs k >= 1 and LE needs k >= 0; otherwise std::invalid_argument.
template <Scalar T>
T joint_longest(const ModelParams<T>& params, std::int64_t n, std::int64_t k1,
                Relation rel1, std::int64_t k2, Relation rel2,
                KernelValueCache<T>& cache);

template <Scalar T>
T joint_longest(const ModelParams<T>& params, std::int64_t n, std::int64_t k1,
                Relation rel1, std::int64_t k2, Relation rel2);

/// P(r successes in n trials).
template <Scalar T>
T q_binomial_pmf(const ModelParams<T>& params, std::int64_t n, std::int64_t r);

/// waiting_time_pmf on support_minimum..n_max. Float entries in
/// [-1e-12, 0) are clamped to 0 with a warning on stderr.
template <Scalar T>
Pmf<T> waiting_time_table(const ModelParams<T>& params, const QuotaSpec& quota,
                          std::int64_t n_max);

}  // namespace qruns
