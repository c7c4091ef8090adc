#pragma once

// Constrained composition sums ("kernels").
//
// A kernel sums q^(sum_j w_j x_j) over all ways of writing a binary sequence
// as alternating runs: success runs x_1, x_2, ... and failure runs
// y_1, y_2, ..., where w_j is the total length of the failure runs placed
// before x_j. Every named family below is one choice of arrangement shape
// plus a constraint on the success parts and one on the failure parts, so a
// single evaluator covers all of them.

#include "qruns/scalar.hpp"

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <variant>

namespace qruns {

/// First letter: symbol of the first run; second: symbol of the last run.
/// F = failure (0), S = success (1).
enum class ArrangementShape { FF, FS, SF, SS };

/// Each part in 1..hi.
struct Bounded {
  std::int64_t hi;
};
/// Each part >= 1.
struct Positive {};
/// Each part >= 1 and the largest part >= k.
struct SomeAtLeast {
  std::int64_t k;
};
/// Each part in 0..hi.
struct BoundedWithZero {
  std::int64_t hi;
};

using PartConstraint =
    std::variant<Bounded, Positive, SomeAtLeast, BoundedWithZero>;

struct KernelSpec {
  ArrangementShape shape = ArrangementShape::FF;
  std::int64_t y_runs = 0;   // number of failure runs
  std::int64_t x_total = 0;  // successes
  std::int64_t y_total = 0;  // failures
  PartConstraint x_constraint = Positive{};
  PartConstraint y_constraint = Positive{};

  /// FF: y_runs - 1, FS/SF: y_runs, SS: y_runs + 1.
  std::int64_t x_runs() const;
};

/// Thrown by kernel_direct when an instance exceeds the enumeration budget.
class EnumerationBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::int64_t kDefaultKernelBudget = 24;

/// Brute-force value of the defining sum: enumerates every admissible pair
/// of compositions. Intended as an oracle for small instances; throws
/// EnumerationBudgetExceeded when x_total + y_total > max_total.
template <Scalar T>
T kernel_direct(const KernelSpec& spec, const T& q,
                std::int64_t max_total = kDefaultKernelBudget);

template <Scalar T>
class KernelValueCache;

/// Memoized evaluation by peeling the final run. State is
/// (successes left, failures left, runs left, symbol of the last run,
/// whether each at-least constraint is still unmet). Sub-results are shared
/// through `cache` across every spec with the same shape, constraints and q.
template <Scalar T>
T kernel_eval(const KernelSpec& spec, const T& q, KernelValueCache<T>& cache);

/// Same as above with a private cache.
template <Scalar T>
T kernel_eval(const KernelSpec& spec, const T& q);

/// Thread-safe memo store for kernel_eval. Holding a cache never changes the
/// returned values.
template <Scalar T>
class KernelValueCache {
 public:
  KernelValueCache() = default;
  KernelValueCache(const KernelValueCache&) = delete;
  KernelValueCache& operator=(const KernelValueCache&) = delete;

  /// Number of memoized sub-states across all tables.
  std::size_t size() const;
  void clear();

  // Table identity: shape, encoded x constraint, encoded y constraint, q.
  using TableKey =
      std::tuple<int, int, std::int64_t, int, std::int64_t, T>;
  using Table = std::unordered_map<std::uint64_t, T>;

 private:
  template <Scalar U>
  friend U kernel_eval(const KernelSpec&, const U&, KernelValueCache<U>&);

  mutable std::mutex mutex_;
  std::map<TableKey, Table> tables_;
};

// ---------------------------------------------------------------------------
// Named families

enum class KernelFamily {
  A, B, C, D,
  EBar, E, FBar, F, GBar, G, HBar, H,
  IBar, I, JBar, J, KBar, K, LBar, L,
  MBar, M, NBar, N, OBar, O, PBar, P,
  QBar, Q, RBar, R, SBar, S, TBar, T,
};

inline constexpr int kFamilyCount = 36;

/// "A", "Ebar", ... "T". Also accepts the combining-overline spelling
/// ("Ē") and a trailing "_bar".
std::optional<KernelFamily> parse_family(std::string_view name);
std::string family_name(KernelFamily family);

/// Maps a family and its (m, r, s, k1, k2) arguments to a KernelSpec.
///
/// Success parts: B{k1-1}, Positive or G{k1}; failure parts: B{k2-1},
/// Positive or G{k2}. The run-count argument s follows each family's own
/// convention: s failure runs for FF/FS/SF shapes, s success runs (and s-1
/// failure runs) for SS. Returns nullopt when a derived run count is
/// negative, in which case the kernel is 0.
std::optional<KernelSpec> family_spec(KernelFamily family, std::int64_t m,
                                      std::int64_t r, std::int64_t s,
                                      std::int64_t k1, std::int64_t k2);

template <Scalar T>
T named_kernel(KernelFamily family, std::int64_t m, std::int64_t r,
               std::int64_t s, std::int64_t k1, std::int64_t k2, const T& q,
               KernelValueCache<T>& cache);

/// Name-based dispatch; throws std::invalid_argument for unknown names.
template <Scalar T>
T named_kernel(std::string_view family, std::int64_t m, std::int64_t r,
               std::int64_t s, std::int64_t k1, std::int64_t k2, const T& q,
               KernelValueCache<T>& cache);

// ---------------------------------------------------------------------------
// Longest-run cell kernels
//
// Cells x_1..x_r (0 <= x_j <= k) sum to s; cell j is weighted by j-1.

/// Sum of q^(x_2 + 2 x_3 + ... + (r-1) x_r) over cells with exactly t of
/// them equal to k.
template <Scalar T>
T longest_cell_kernel_U(std::int64_t r, std::int64_t s, std::int64_t t,
                        std::int64_t k, const T& q);

/// Same sum without the restriction on how many cells are full.
template <Scalar T>
T longest_cell_kernel_V(std::int64_t r, std::int64_t s, std::int64_t k,
                        const T& q);

}  // namespace qruns
