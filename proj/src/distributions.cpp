#include "qruns/distributions.hpp"

#include "qruns/qcalc.hpp"

#include <algorithm>
#include <iostream>
#include <vector>

namespace qruns {

namespace {

using KF = KernelFamily;

// Shared pieces of every assembly: powers of theta and q, and the failure
// products prod_{j=1}^{i} (1 - theta q^(j-1)).
template <Scalar T>
class Assembler {
 public:
  Assembler(const ModelParams<T>& params, std::int64_t k1, std::int64_t k2,
            KernelValueCache<T>& cache)
      : params_(params), k1_(k1), k2_(k2), cache_(cache) {}

  T theta_pow(std::int64_t e) { return grow(theta_powers_, params_.theta, e); }
  T q_pow(std::int64_t e) { return grow(q_powers_, params_.q, e); }

  T failures(std::int64_t i) {
    if (fail_products_.empty()) fail_products_.push_back(from_int<T>(1));
    while (static_cast<std::int64_t>(fail_products_.size()) <= i) {
      const auto j = static_cast<std::int64_t>(fail_products_.size());
      fail_products_.push_back(
          fail_products_.back() *
          (from_int<T>(1) - params_.theta * q_pow(j - 1)));
    }
    return fail_products_[static_cast<std::size_t>(i)];
  }

  // Sum over s = 1..s_max of the listed families at (m, r, s), with the
  // SS families optionally indexed by s + 1.
  T run_sum(const std::vector<KF>& families, std::int64_t m, std::int64_t r,
            std::int64_t s_max, bool shift_ss = false) {
    T sum = from_int<T>(0);
    if (m < 0 || r < 0) return sum;
    for (std::int64_t s = 1; s <= s_max; ++s) {
      for (KF f : families) {
        const bool ss = f == KF::C || f == KF::G || f == KF::GBar ||
                        f == KF::I || f == KF::IBar || f == KF::N ||
                        f == KF::NBar || f == KF::S || f == KF::SBar;
        const std::int64_t idx = (shift_ss && ss) ? s + 1 : s;
        sum += named_kernel(f, m, r, idx, k1_, k2_, params_.q, cache_);
      }
    }
    return sum;
  }

 private:
  static T grow(std::vector<T>& table, const T& base, std::int64_t e) {
    if (table.empty()) table.push_back(from_int<T>(1));
    while (static_cast<std::int64_t>(table.size()) <= e) {
      table.push_back(table.back() * base);
    }
    return table[static_cast<std::size_t>(e)];
  }

  const ModelParams<T>& params_;
  std::int64_t k1_;
  std::int64_t k2_;
  KernelValueCache<T>& cache_;
  std::vector<T> theta_powers_;
  std::vector<T> q_powers_;
  std::vector<T> fail_products_;
};

// Success side ends with a run of k1 successes after a failure (or at the
// start); the prefix holds i failures. `families` are the two shapes of a
// prefix ending in a failure, i runs over [i_lo, i_hi].
template <Scalar T>
T success_run_side(Assembler<T>& a, std::int64_t n, std::int64_t k1,
                   std::int64_t i_lo, std::int64_t i_hi, KF ff, KF sf) {
  T sum = from_int<T>(0);
  for (std::int64_t i = std::max<std::int64_t>(i_lo, 1);
       i <= std::min(i_hi, n - k1); ++i) {
    const T kernels = a.run_sum({ff, sf}, n - k1 - i, i, i);
    if (kernels == 0) continue;
    sum += a.theta_pow(n - i) * a.q_pow(i * k1) * a.failures(i) * kernels;
  }
  return sum;
}

// Failure side ends with a run of k2 failures after a success; the prefix
// holds `succ` successes and n - k2 - succ failures.
template <Scalar T>
T failure_run_side(Assembler<T>& a, std::int64_t n, std::int64_t k2,
                   std::int64_t succ_lo, std::int64_t succ_hi, KF ss, KF fs) {
  T sum = from_int<T>(0);
  for (std::int64_t succ = std::max<std::int64_t>(succ_lo, 1);
       succ <= std::min(succ_hi, n - k2); ++succ) {
    const T kernels = a.run_sum({ss, fs}, succ, n - k2 - succ, succ);
    if (kernels == 0) continue;
    sum += a.theta_pow(succ) * a.failures(n - succ) * kernels;
  }
  return sum;
}

// The k1-th success arrives at trial n: k1 successes and n - k1 failures,
// ending in a success.
template <Scalar T>
T success_freq_side(Assembler<T>& a, std::int64_t n, std::int64_t k1, KF ss,
                    KF fs) {
  if (n < k1) return from_int<T>(0);
  return a.theta_pow(k1) * a.failures(n - k1) *
         a.run_sum({ss, fs}, k1, n - k1, k1);
}

// The k2-th failure arrives at trial n: k2 failures and n - k2 successes,
// ending in a failure.
template <Scalar T>
T failure_freq_side(Assembler<T>& a, std::int64_t n, std::int64_t k2, KF ff,
                    KF sf) {
  if (n < k2) return from_int<T>(0);
  return a.theta_pow(n - k2) * a.failures(k2) *
         a.run_sum({ff, sf}, n - k2, k2, k2);
}

template <Scalar T>
T sooner_pmf(Assembler<T>& a, bool run1, bool run0, std::int64_t k1,
             std::int64_t k2, std::int64_t n) {
  T p1 = from_int<T>(0);
  T p0 = from_int<T>(0);
  if (run1 && run0) {
    p1 = n == k1 ? a.theta_pow(k1)
                 : success_run_side(a, n, k1, 1, n, KF::A, KF::B);
    p0 = n == k2 ? a.failures(k2)
                 : failure_run_side(a, n, k2, 1, n, KF::C, KF::D);
  } else if (!run1 && run0) {
    p1 = success_freq_side(a, n, k1, KF::GBar, KF::HBar);
    if (n == k2) {
      p0 = a.failures(k2);
    } else {
      p0 = failure_run_side(a, n, k2, 1, k1 - 1, KF::GBar, KF::HBar);
    }
  } else if (run1 && !run0) {
    p1 = n == k1 ? a.theta_pow(k1)
                 : success_run_side(a, n, k1, 1, k2 - 1, KF::EBar, KF::FBar);
    p0 = failure_freq_side(a, n, k2, KF::EBar, KF::FBar);
  } else {
    if (n <= k1 + k2 - 1) {
      p1 = success_freq_side(a, n, k1, KF::IBar, KF::JBar);
      p0 = failure_freq_side(a, n, k2, KF::KBar, KF::LBar);
    }
  }
  return p1 + p0;
}

template <Scalar T>
T later_pmf(Assembler<T>& a, bool run1, bool run0, std::int64_t k1,
            std::int64_t k2, std::int64_t n) {
  T p1 = from_int<T>(0);
  T p0 = from_int<T>(0);
  if (run1 && run0) {
    p1 = success_run_side(a, n, k1, k2, n, KF::E, KF::F);
    p0 = failure_run_side(a, n, k2, k1, n, KF::G, KF::H);
  } else if (!run1 && run0) {
    p1 = success_freq_side(a, n, k1, KF::I, KF::J);
    p0 = failure_run_side(a, n, k2, k1, n, KF::GBar, KF::HBar);
  } else if (run1 && !run0) {
    p1 = success_run_side(a, n, k1, k2, n, KF::EBar, KF::FBar);
    p0 = failure_freq_side(a, n, k2, KF::K, KF::L);
  } else {
    if (n >= k1 + k2) {
      p1 = success_freq_side(a, n, k1, KF::IBar, KF::JBar);
      p0 = failure_freq_side(a, n, k2, KF::KBar, KF::LBar);
    }
  }
  return p1 + p0;
}

bool holds(std::int64_t value, Relation rel, std::int64_t k) {
  return rel == Relation::LE ? value <= k : value >= k;
}

void check_relation(Relation rel, std::int64_t k) {
  if (rel == Relation::GE && k < 1) {
    throw std::invalid_argument("joint_longest: GE needs k >= 1");
  }
  if (rel == Relation::LE && k < 0) {
    throw std::invalid_argument("joint_longest: LE needs k >= 0");
  }
}

}  // namespace

std::int64_t support_minimum(const QuotaSpec& quota) {
  quota.validate();
  return quota.mode == QuotaMode::Sooner
             ? std::min(quota.success_k(), quota.failure_k())
             : quota.success_k() + quota.failure_k();
}

template <Scalar T>
T waiting_time_pmf(const ModelParams<T>& params, const QuotaSpec& quota,
                   std::int64_t n, KernelValueCache<T>& cache) {
  quota.validate();
  if (n < support_minimum(quota)) return from_int<T>(0);
  const std::int64_t k1 = quota.success_k();
  const std::int64_t k2 = quota.failure_k();
  Assembler<T> a(params, k1, k2, cache);
  const bool run1 = quota.success_is_run();
  const bool run0 = quota.failure_is_run();
  return quota.mode == QuotaMode::Sooner ? sooner_pmf(a, run1, run0, k1, k2, n)
                                         : later_pmf(a, run1, run0, k1, k2, n);
}

template <Scalar T>
T waiting_time_pmf(const ModelParams<T>& params, const QuotaSpec& quota,
                   std::int64_t n) {
  KernelValueCache<T> cache;
  return waiting_time_pmf(params, quota, n, cache);
}

template <Scalar T>
T q_binomial_pmf(const ModelParams<T>& params, std::int64_t n, std::int64_t r) {
  if (r < 0 || n < 0 || r > n) return from_int<T>(0);
  return q_binomial(n, r, params.q) * ipow(params.theta, r) *
         q_pochhammer(params.theta, params.q, n - r);
}

template <Scalar T>
T sooner_freq_freq_closed(const ModelParams<T>& params, std::int64_t k1,
                          std::int64_t k2, std::int64_t n) {
  if (k1 < 1 || k2 < 1) {
    throw std::invalid_argument("quota values must be >= 1");
  }
  T value = from_int<T>(0);
  if (n < 1) return value;
  for (std::int64_t x = std::max<std::int64_t>(n - k2, 0); x <= k1 - 1; ++x) {
    value += q_binomial_pmf(params, n - 1, x);
  }
  for (std::int64_t x = std::max<std::int64_t>(n + 1 - k2, 0); x <= k1 - 1;
       ++x) {
    value -= q_binomial_pmf(params, n, x);
  }
  return value;
}

template <Scalar T>
T longest_run_pmf(const ModelParams<T>& params, std::int64_t n,
                  std::int64_t k) {
  if (n < 0 || k < 0 || k > n) return from_int<T>(0);
  if (k == 0) return q_pochhammer(params.theta, params.q, n);
  T sum = from_int<T>(0);
  for (std::int64_t y = 0; y <= n; ++y) {
    T cells = from_int<T>(0);
    for (std::int64_t t = 1; t <= y + 1; ++t) {
      cells += longest_cell_kernel_U(y + 1, n - y, t, k, params.q);
    }
    if (cells == 0) continue;
    sum += ipow(params.theta, n - y) * q_pochhammer(params.theta, params.q, y) *
           cells;
  }
  return sum;
}

template <Scalar T>
T longest_run_cdf(const ModelParams<T>& params, std::int64_t n,
                  std::int64_t k) {
  if (n < 0 || k < 0) return from_int<T>(0);
  T sum = from_int<T>(0);
  for (std::int64_t y = 0; y <= n; ++y) {
    const T cells = longest_cell_kernel_V(y + 1, n - y, k, params.q);
    if (cells == 0) continue;
    sum += ipow(params.theta, n - y) * q_pochhammer(params.theta, params.q, y) *
           cells;
  }
  return sum;
}

template <Scalar T>
T joint_longest(const ModelParams<T>& params, std::int64_t n, std::int64_t k1,
                Relation rel1, std::int64_t k2, Relation rel2,
                KernelValueCache<T>& cache) {
  check_relation(rel1, k1);
  check_relation(rel2, k2);
  if (n < 0) return from_int<T>(0);
  if (n == 0) {
    return from_int<T>(holds(0, rel1, k1) && holds(0, rel2, k2) ? 1 : 0);
  }
  // Kernel thresholds: LE k means parts <= k, i.e. the B{k'-1} family with
  // k' = k + 1; GE k means some part >= k.
  const std::int64_t a1 = rel1 == Relation::LE ? k1 + 1 : k1;
  const std::int64_t a2 = rel2 == Relation::LE ? k2 + 1 : k2;
  Assembler<T> a(params, a1, a2, cache);

  // FS, FF, SS (indexed by failure runs + 1), SF.
  std::vector<KF> families;
  if (rel1 == Relation::LE && rel2 == Relation::LE) {
    families = {KF::D, KF::A, KF::C, KF::B};
  } else if (rel1 == Relation::LE) {
    families = {KF::M, KF::E, KF::N, KF::F};
  } else if (rel2 == Relation::LE) {
    families = {KF::H, KF::O, KF::G, KF::P};
  } else {
    families = {KF::Q, KF::R, KF::S, KF::T};
  }
  const std::int64_t i_lo = rel2 == Relation::GE ? k2 : 1;
  const std::int64_t i_hi = rel1 == Relation::GE ? n - k1 : n;

  T sum = from_int<T>(0);
  for (std::int64_t i = std::max<std::int64_t>(i_lo, 1); i <= i_hi; ++i) {
    const T kernels = a.run_sum(families, n - i, i, i, true);
    if (kernels == 0) continue;
    sum += a.theta_pow(n - i) * a.failures(i) * kernels;
  }
  // The all-success sequence has no failure run at all.
  if (holds(n, rel1, k1) && holds(0, rel2, k2)) sum += a.theta_pow(n);
  return sum;
}

template <Scalar T>
T joint_longest(const ModelParams<T>& params, std::int64_t n, std::int64_t k1,
                Relation rel1, std::int64_t k2, Relation rel2) {
  KernelValueCache<T> cache;
  return joint_longest(params, n, k1, rel1, k2, rel2, cache);
}

template <Scalar T>
Pmf<T> waiting_time_table(const ModelParams<T>& params, const QuotaSpec& quota,
                          std::int64_t n_max) {
  Pmf<T> pmf;
  pmf.offset = support_minimum(quota);
  KernelValueCache<T> cache;
  for (std::int64_t n = pmf.offset; n <= n_max; ++n) {
    T p = waiting_time_pmf(params, quota, n, cache);
    if constexpr (std::same_as<T, double>) {
      if (p < 0.0 && p >= -1e-12) {
        std::cerr << "warning: clamped P(W=" << n << ") = " << p << " to 0\n";
        p = 0.0;
      }
    }
    pmf.probs.push_back(std::move(p));
  }
  return pmf;
}

#define QRUNS_INSTANTIATE_DISTRIBUTIONS(T)                                     \
  template T waiting_time_pmf<T>(const ModelParams<T>&, const QuotaSpec&,     \
                                 std::int64_t, KernelValueCache<T>&);         \
  template T waiting_time_pmf<T>(const ModelParams<T>&, const QuotaSpec&,     \
                                 std::int64_t);                               \
  template T sooner_freq_freq_closed<T>(const ModelParams<T>&, std::int64_t,  \
                                        std::int64_t, std::int64_t);          \
  template T longest_run_pmf<T>(const ModelParams<T>&, std::int64_t,          \
                                std::int64_t);                                \
  template T longest_run_cdf<T>(const ModelParams<T>&, std::int64_t,          \
                                std::int64_t);                                \
  template T joint_longest<T>(const ModelParams<T>&, std::int64_t,            \
                              std::int64_t, Relation, std::int64_t, Relation, \
                              KernelValueCache<T>&);                          \
  template T joint_longest<T>(const ModelParams<T>&, std::int64_t,            \
                              std::int64_t, Relation, std::int64_t,           \
                              Relation);                                      \
  template T q_binomial_pmf<T>(const ModelParams<T>&, std::int64_t,           \
                               std::int64_t);                                 \
  template Pmf<T> waiting_time_table<T>(const ModelParams<T>&,                \
                                        const QuotaSpec&, std::int64_t);

QRUNS_INSTANTIATE_DISTRIBUTIONS(double)
QRUNS_INSTANTIATE_DISTRIBUTIONS(Rational)

#undef QRUNS_INSTANTIATE_DISTRIBUTIONS

}  // namespace qruns
