#pragma once

// Reference computations used only by the tests. Each one takes a route
// that shares no code with the library beyond the Rational type.

#include "qruns/distributions.hpp"
#include "qruns/kernels.hpp"
#include "qruns/model.hpp"
#include "qruns/qcalc.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

namespace ref {

using qruns::Rational;

inline Rational rat(const char* text) { return qruns::parse_rational(text); }

inline qruns::ModelParams<Rational> rparams(const char* theta, const char* q) {
  return {rat(theta), rat(q)};
}

// Odometer over [lo, hi]^parts; calls visit(vector) for every tuple whose
// sum is `total`.
template <typename Visit>
void each_tuple(std::int64_t parts, std::int64_t lo, std::int64_t hi,
                std::int64_t total, Visit&& visit) {
  if (parts == 0) {
    if (total == 0) visit(std::vector<std::int64_t>{});
    return;
  }
  if (hi < lo) return;
  std::vector<std::int64_t> v(static_cast<std::size_t>(parts), lo);
  while (true) {
    std::int64_t sum = 0;
    for (auto x : v) sum += x;
    if (sum == total) visit(v);
    std::size_t i = 0;
    while (i < v.size() && v[i] == hi) v[i++] = lo;
    if (i == v.size()) return;
    ++v[i];
  }
}

// Tuples of `parts` values in lo..hi summing to total, optionally requiring
// the maximum to reach `at_least`.
inline std::int64_t count_tuples(std::int64_t parts, std::int64_t lo,
                                 std::int64_t hi, std::int64_t total,
                                 std::int64_t at_least = 0) {
  std::int64_t n = 0;
  each_tuple(parts, lo, hi, total, [&](const std::vector<std::int64_t>& v) {
    if (at_least > 0 && (v.empty() || *std::max_element(v.begin(), v.end()) <
                                          at_least)) {
      return;
    }
    ++n;
  });
  return n;
}

struct Runs {
  std::vector<std::int64_t> success;
  std::vector<std::int64_t> failure;
  bool starts_with_success = false;
  bool ends_with_success = false;
};

inline Runs split_runs(const std::vector<int>& seq) {
  Runs out;
  if (seq.empty()) return out;
  out.starts_with_success = seq.front() == 1;
  out.ends_with_success = seq.back() == 1;
  std::int64_t len = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    ++len;
    if (i + 1 == seq.size() || seq[i + 1] != seq[i]) {
      (seq[i] ? out.success : out.failure).push_back(len);
      len = 0;
    }
  }
  return out;
}

inline bool admits(const qruns::PartConstraint& c,
                   const std::vector<std::int64_t>& parts) {
  if (const auto* b = std::get_if<qruns::Bounded>(&c)) {
    return std::all_of(parts.begin(), parts.end(),
                       [&](auto x) { return x >= 1 && x <= b->hi; });
  }
  if (std::holds_alternative<qruns::Positive>(c)) return true;
  if (const auto* g = std::get_if<qruns::SomeAtLeast>(&c)) {
    return !parts.empty() &&
           *std::max_element(parts.begin(), parts.end()) >= g->k;
  }
  return false;
}

// Kernel value from binary strings: every arrangement of x_total ones and
// y_total zeros is split into maximal runs; the weight is q raised to the
// number of (zero before one) pairs. Only constraints with positive parts.
inline Rational kernel_from_strings(const qruns::KernelSpec& spec,
                                    const Rational& q) {
  using qruns::ArrangementShape;
  const std::int64_t len = spec.x_total + spec.y_total;
  Rational sum = 0;
  if (spec.x_total < 0 || spec.y_total < 0) return sum;
  if (len == 0) {
    const bool empty_ok = spec.y_runs == 0 && spec.x_runs() == 0 &&
                          !std::holds_alternative<qruns::SomeAtLeast>(
                              spec.x_constraint) &&
                          !std::holds_alternative<qruns::SomeAtLeast>(
                              spec.y_constraint);
    return empty_ok ? Rational(1) : Rational(0);
  }
  const bool first_s = spec.shape == ArrangementShape::SF ||
                       spec.shape == ArrangementShape::SS;
  const bool last_s = spec.shape == ArrangementShape::FS ||
                      spec.shape == ArrangementShape::SS;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << len); ++mask) {
    if (std::popcount(mask) != spec.x_total) continue;
    std::vector<int> seq(static_cast<std::size_t>(len));
    for (std::int64_t i = 0; i < len; ++i) seq[i] = (mask >> i) & 1;
    const Runs runs = split_runs(seq);
    if (runs.starts_with_success != first_s ||
        runs.ends_with_success != last_s) {
      continue;
    }
    if (static_cast<std::int64_t>(runs.failure.size()) != spec.y_runs ||
        static_cast<std::int64_t>(runs.success.size()) != spec.x_runs()) {
      continue;
    }
    if (!admits(spec.x_constraint, runs.success) ||
        !admits(spec.y_constraint, runs.failure)) {
      continue;
    }
    std::int64_t zeros = 0;
    std::int64_t inversions = 0;
    for (int b : seq) {
      if (b) {
        inversions += zeros;
      } else {
        ++zeros;
      }
    }
    Rational term = 1;
    for (std::int64_t j = 0; j < inversions; ++j) term *= q;
    sum += term;
  }
  return sum;
}

// Cell sums by odometer: cells 0..k summing to s, with exactly t cells
// equal to k (t < 0 means any).
inline Rational cells_brute(std::int64_t r, std::int64_t s, std::int64_t t,
                            std::int64_t k, const Rational& q) {
  Rational sum = 0;
  each_tuple(r, 0, k, s, [&](const std::vector<std::int64_t>& v) {
    if (t >= 0 && std::count(v.begin(), v.end(), k) != t) return;
    std::int64_t e = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      e += static_cast<std::int64_t>(j) * v[j];
    }
    Rational term = 1;
    for (std::int64_t j = 0; j < e; ++j) term *= q;
    sum += term;
  });
  return sum;
}

// Forward propagation of probability mass over trial states, stopping
// mass as soon as the quota rule fires. Independent of both the kernel
// formulas and the sequence enumerator, and usable for longer horizons.
inline std::vector<Rational> waiting_by_propagation(
    const qruns::ModelParams<Rational>& p, const qruns::QuotaSpec& quota,
    std::int64_t n_max) {
  const bool run1 = quota.success_is_run();
  const bool run0 = quota.failure_is_run();
  const std::int64_t k1 = quota.success_k();
  const std::int64_t k2 = quota.failure_k();
  const bool sooner = quota.mode == qruns::QuotaMode::Sooner;
  // (failures, successes, last symbol, current run length, hit1, hit0)
  using State = std::tuple<std::int64_t, std::int64_t, int, std::int64_t,
                           bool, bool>;
  std::map<State, Rational> live{{State{0, 0, -1, 0, false, false}, 1}};
  std::vector<Rational> out(static_cast<std::size_t>(n_max + 1), 0);
  for (std::int64_t t = 1; t <= n_max; ++t) {
    std::map<State, Rational> next;
    for (const auto& [state, mass] : live) {
      const auto [f, s, last, len, hit1, hit0] = state;
      Rational ps = p.theta;
      for (std::int64_t j = 0; j < f; ++j) ps *= p.q;
      for (int bit : {0, 1}) {
        const Rational w = bit ? ps : Rational(1 - ps);
        if (w == 0) continue;
        const std::int64_t nf = f + (bit ? 0 : 1);
        const std::int64_t ns = s + (bit ? 1 : 0);
        const std::int64_t nlen = bit == last ? len + 1 : 1;
        bool h1 = hit1;
        bool h0 = hit0;
        if (bit == 1 && (run1 ? nlen >= k1 : ns >= k1)) h1 = true;
        if (bit == 0 && (run0 ? nlen >= k2 : nf >= k2)) h0 = true;
        const bool stop = sooner ? (h1 || h0) : (h1 && h0);
        if (stop) {
          out[static_cast<std::size_t>(t)] += mass * w;
        } else {
          next[State{nf, ns, bit, nlen, h1, h0}] += mass * w;
        }
      }
    }
    live = std::move(next);
  }
  return out;
}

// Distribution of (longest success run, longest failure run) after n
// trials, by the same forward propagation.
inline std::map<std::pair<std::int64_t, std::int64_t>, Rational>
longest_by_propagation(const qruns::ModelParams<Rational>& p, std::int64_t n) {
  // (failures, last symbol, run length, best success, best failure)
  using State =
      std::tuple<std::int64_t, int, std::int64_t, std::int64_t, std::int64_t>;
  std::map<State, Rational> live{{State{0, -1, 0, 0, 0}, 1}};
  for (std::int64_t t = 0; t < n; ++t) {
    std::map<State, Rational> next;
    for (const auto& [state, mass] : live) {
      const auto [f, last, len, b1, b0] = state;
      Rational ps = p.theta;
      for (std::int64_t j = 0; j < f; ++j) ps *= p.q;
      for (int bit : {0, 1}) {
        const Rational w = bit ? ps : Rational(1 - ps);
        if (w == 0) continue;
        const std::int64_t nlen = bit == last ? len + 1 : 1;
        next[State{f + (bit ? 0 : 1), bit, nlen,
                   bit ? std::max(b1, nlen) : b1,
                   bit ? b0 : std::max(b0, nlen)}] += mass * w;
      }
    }
    live = std::move(next);
  }
  std::map<std::pair<std::int64_t, std::int64_t>, Rational> out;
  for (const auto& [state, mass] : live) {
    out[{std::get<3>(state), std::get<4>(state)}] += mass;
  }
  return out;
}

// Counting products at q = 1, written per family: (success-part count,
// failure-part count). B{k}: S(parts, k, total); P: M(parts, total);
// G{k}: R(parts, k, total). Run counts are relative to s.
struct Classical {
  const char* name;
  char x_kind;
  int x_offset;
  char y_kind;
  int y_offset;
};

inline constexpr Classical kClassical[] = {
    {"A", 'B', -1, 'B', 0},  {"B", 'B', 0, 'B', 0},   {"C", 'B', 0, 'B', -1},
    {"D", 'B', 0, 'B', 0},   {"Ebar", 'B', -1, 'P', 0}, {"E", 'B', -1, 'G', 0},
    {"Fbar", 'B', 0, 'P', 0}, {"F", 'B', 0, 'G', 0},  {"Gbar", 'P', 0, 'B', -1},
    {"G", 'G', 0, 'B', -1},  {"Hbar", 'P', 0, 'B', 0}, {"H", 'G', 0, 'B', 0},
    {"Ibar", 'P', 0, 'P', -1}, {"I", 'P', 0, 'G', -1}, {"Jbar", 'P', 0, 'P', 0},
    {"J", 'P', 0, 'G', 0},   {"Kbar", 'P', -1, 'P', 0}, {"K", 'G', -1, 'P', 0},
    {"Lbar", 'P', 0, 'P', 0}, {"L", 'G', 0, 'P', 0},  {"Mbar", 'B', 0, 'P', 0},
    {"M", 'B', 0, 'G', 0},   {"Nbar", 'B', 0, 'P', -1}, {"N", 'B', 0, 'G', -1},
    {"Obar", 'P', -1, 'B', 0}, {"O", 'G', -1, 'B', 0}, {"Pbar", 'P', 0, 'B', 0},
    {"P", 'G', 0, 'B', 0},   {"Qbar", 'G', 0, 'P', 0}, {"Q", 'G', 0, 'G', 0},
    {"Rbar", 'P', -1, 'G', 0}, {"R", 'G', -1, 'G', 0}, {"Sbar", 'G', 0, 'P', -1},
    {"S", 'G', 0, 'G', -1},  {"Tbar", 'P', 0, 'G', 0}, {"T", 'G', 0, 'G', 0},
};

inline std::int64_t classical_count(char kind, std::int64_t parts, std::int64_t k,
                             std::int64_t total) {
  if (parts < 0) return 0;
  switch (kind) {
    case 'B':
      return qruns::count_S(parts, k, total);
    case 'P':
      return qruns::count_M(parts, total);
    default:
      return parts == 0 ? 0 : qruns::count_R(parts, k, total);
  }
}

}  // namespace ref
