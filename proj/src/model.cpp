#include "qruns/model.hpp"

#include <algorithm>
#include <charconv>

namespace qruns {

namespace {

std::int64_t quota_k(const Quota& q) {
  return std::visit([](const auto& v) { return v.k; }, q);
}

}  // namespace

void QuotaSpec::validate() const {
  if (success_k() < 1 || failure_k() < 1) {
    throw std::invalid_argument("quota values must be >= 1");
  }
}

std::int64_t QuotaSpec::success_k() const { return quota_k(success); }
std::int64_t QuotaSpec::failure_k() const { return quota_k(failure); }
bool QuotaSpec::success_is_run() const {
  return std::holds_alternative<RunQuota>(success);
}
bool QuotaSpec::failure_is_run() const {
  return std::holds_alternative<RunQuota>(failure);
}

std::string QuotaSpec::describe() const {
  return std::string(mode == QuotaMode::Sooner ? "sooner " : "later ") +
         format_quota(success) + "/" + format_quota(failure);
}

Quota parse_quota(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("quota must look like run:K or freq:K, got '" +
                                std::string(text) + "'");
  }
  const std::string_view kind = text.substr(0, colon);
  const std::string_view value = text.substr(colon + 1);
  std::int64_t k = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), k);
  if (ec != std::errc{} || ptr != value.data() + value.size() || k < 1) {
    throw std::invalid_argument("quota length must be a positive integer in '" +
                                std::string(text) + "'");
  }
  if (kind == "run") return RunQuota{k};
  if (kind == "freq") return FreqQuota{k};
  throw std::invalid_argument("unknown quota kind '" + std::string(kind) + "'");
}

std::string format_quota(const Quota& quota) {
  if (const auto* run = std::get_if<RunQuota>(&quota)) {
    return "run:" + std::to_string(run->k);
  }
  return "freq:" + std::to_string(std::get<FreqQuota>(quota).k);
}

std::optional<std::int64_t> hit_time(std::span<const Bit> seq,
                                     const Quota& quota, Bit symbol) {
  const bool is_run = std::holds_alternative<RunQuota>(quota);
  const std::int64_t k = quota_k(quota);
  std::int64_t count = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i] == symbol) {
      if (++count >= k) return static_cast<std::int64_t>(i + 1);
    } else if (is_run) {
      count = 0;
    }
  }
  return std::nullopt;
}

std::optional<std::int64_t> stopping_time(std::span<const Bit> seq,
                                          const QuotaSpec& quota) {
  const auto t1 = hit_time(seq, quota.success, Bit{1});
  const auto t0 = hit_time(seq, quota.failure, Bit{0});
  if (quota.mode == QuotaMode::Sooner) {
    if (t1 && t0) return std::min(*t1, *t0);
    return t1 ? t1 : t0;
  }
  if (t1 && t0) return std::max(*t1, *t0);
  return std::nullopt;
}

LongestRuns longest_runs(std::span<const Bit> seq) {
  LongestRuns out;
  std::int64_t current = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    current = (i > 0 && seq[i] == seq[i - 1]) ? current + 1 : 1;
    auto& slot = seq[i] ? out.success : out.failure;
    slot = std::max(slot, current);
  }
  return out;
}

BinarySequence SequenceSampler::draw(const ModelParams<double>& params,
                                     std::int64_t n) {
  if (n < 0) throw std::invalid_argument("sample length must be >= 0");
  BinarySequence seq;
  seq.reserve(static_cast<std::size_t>(n));
  double p_success = params.theta;
  for (std::int64_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u < p_success) {
      seq.push_back(1);
    } else {
      seq.push_back(0);
      p_success *= params.q;
    }
  }
  return seq;
}

BinarySequence sample_sequence(const ModelParams<double>& params,
                               std::int64_t n, std::uint64_t seed) {
  SequenceSampler sampler(seed);
  return sampler.draw(params, n);
}

}  // namespace qruns
