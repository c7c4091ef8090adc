#pragma once

// The q-binary trial model: after f failures have been observed, the next
// trial succeeds with probability theta * q^f. Successes do not change the
// success probability; only accumulated failures do.

#include "qruns/scalar.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qruns {

template <Scalar T>
struct ModelParams {
  T theta;
  T q;
};

/// Validates 0 <= theta <= 1 and 0 < q <= 1; throws std::invalid_argument.
template <Scalar T>
ModelParams<T> make_params(T theta, T q) {
  const T zero = from_int<T>(0);
  const T one = from_int<T>(1);
  if (theta < zero || theta > one) {
    throw std::invalid_argument("theta must lie in [0, 1]");
  }
  if (q <= zero || q > one) throw std::invalid_argument("q must lie in (0, 1]");
  return ModelParams<T>{std::move(theta), std::move(q)};
}

/// k consecutive equal outcomes.
struct RunQuota {
  std::int64_t k;
};
/// k outcomes in total.
struct FreqQuota {
  std::int64_t k;
};
using Quota = std::variant<RunQuota, FreqQuota>;

enum class QuotaMode { Sooner, Later };

struct QuotaSpec {
  Quota success;
  Quota failure;
  QuotaMode mode = QuotaMode::Sooner;

  /// Throws std::invalid_argument if either k < 1.
  void validate() const;
  std::int64_t success_k() const;
  std::int64_t failure_k() const;
  bool success_is_run() const;
  bool failure_is_run() const;
  /// e.g. "sooner run:2/freq:3".
  std::string describe() const;
};

/// "run:K" or "freq:K".
Quota parse_quota(std::string_view text);
std::string format_quota(const Quota& quota);

using Bit = std::uint8_t;
using BinarySequence = std::vector<Bit>;

/// theta * q^prior_failures.
template <Scalar T>
T success_prob_after(const ModelParams<T>& params, std::int64_t prior_failures) {
  return params.theta * ipow(params.q, prior_failures);
}

/// Probability of observing exactly `seq` as the first |seq| trials.
template <Scalar T>
T sequence_probability(const ModelParams<T>& params,
                       std::span<const Bit> seq) {
  const T one = from_int<T>(1);
  T prob = one;
  T p_success = params.theta;
  for (Bit b : seq) {
    if (b) {
      prob *= p_success;
    } else {
      prob *= one - p_success;
      p_success *= params.q;
    }
  }
  return prob;
}

/// 1-based index at which `quota` on `symbol` is first met, if ever.
std::optional<std::int64_t> hit_time(std::span<const Bit> seq,
                                     const Quota& quota, Bit symbol);

/// Sooner: min of the success and failure hit times (the first one that
/// happens). Later: the max, defined only once both have happened.
std::optional<std::int64_t> stopping_time(std::span<const Bit> seq,
                                          const QuotaSpec& quota);

struct LongestRuns {
  std::int64_t success = 0;
  std::int64_t failure = 0;
  bool operator==(const LongestRuns&) const = default;
};

LongestRuns longest_runs(std::span<const Bit> seq);

/// Draws trials from the model.
///
/// Generator: std::mt19937_64 seeded with `seed`; each trial consumes one
/// 64-bit output u and succeeds iff (u >> 11) * 2^-53 < theta * q^f. Both
/// the engine and this conversion are fully specified, so a seed yields the
/// same sequence on every conforming platform.
class SequenceSampler {
 public:
  explicit SequenceSampler(std::uint64_t seed) : engine_(seed) {}

  BinarySequence draw(const ModelParams<double>& params, std::int64_t n);

 private:
  std::mt19937_64 engine_;
};

BinarySequence sample_sequence(const ModelParams<double>& params,
                               std::int64_t n, std::uint64_t seed);

}  // namespace qruns
