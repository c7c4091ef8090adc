#pragma once

// Exhaustive enumeration over all 2^n sequences in exact arithmetic, and
// differential comparison of the distributions module against it.

#include "qruns/distributions.hpp"
#include "qruns/model.hpp"

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qruns {

/// stopping_time(seq) == n.
struct WaitingEquals {
  QuotaSpec quota;
  std::int64_t n = 0;
};
/// Longest success run == k.
struct LongestEquals {
  std::int64_t k = 0;
};
/// Longest success run <= k.
struct LongestAtMost {
  std::int64_t k = 0;
};
struct JointLongest {
  std::int64_t k1 = 0;
  Relation rel1 = Relation::LE;
  std::int64_t k2 = 0;
  Relation rel2 = Relation::LE;
};

using EventPredicate =
    std::variant<WaitingEquals, LongestEquals, LongestAtMost, JointLongest>;

bool event_holds(const EventPredicate& pred, std::span<const Bit> seq);
std::string describe_event(const EventPredicate& pred);

inline constexpr std::int64_t kOracleBudget = 20;

class OracleBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sum of sequence probabilities over length-n sequences satisfying `pred`.
/// Prefix probabilities are shared along a depth-first walk.
Rational oracle_event_prob(const ModelParams<Rational>& params, std::int64_t n,
                           const EventPredicate& pred,
                           std::int64_t budget = kOracleBudget);

/// Waiting-time probabilities on support_minimum..n_max.
Pmf<Rational> oracle_waiting_pmf(const ModelParams<Rational>& params,
                                  const QuotaSpec& quota, std::int64_t n_max,
                                  std::int64_t budget = kOracleBudget);

enum class Verdict { Match, Mismatch };

struct DiscrepancyReport {
  std::string configuration;
  std::int64_t n = 0;
  Rational formula_value;
  Rational oracle_value;
  Rational difference;  // |formula - oracle|
  Verdict verdict = Verdict::Match;
};

/// Points to compare. Each check family is skipped when its bound is < 0.
struct ScanGrid {
  std::vector<ModelParams<Rational>> params;
  std::vector<QuotaSpec> quotas;
  std::int64_t waiting_n_max = -1;
  std::int64_t longest_n_max = -1;
  std::int64_t joint_n_max = -1;
  std::int64_t joint_k_max = 0;
};

/// theta in {1/5, 1/2, 4/5}, q in {1/2, 9/10, 1}; all eight quota
/// configurations for (k1, k2) in {(2,2), (2,3), (3,2)}; waiting n <= 14,
/// longest n <= 14, joint n <= 12 with k <= 3.
ScanGrid default_grid();

/// Reads a grid from JSON:
///   {"theta": ["1/2"], "q": ["1/2", "1"],
///    "quotas": [{"mode": "sooner", "success": "run:2", "failure": "freq:3"}],
///    "waiting_n_max": 10, "longest_n_max": 8,
///    "joint_n_max": 8, "joint_k_max": 3}
/// Missing bounds disable that check. Throws std::invalid_argument.
ScanGrid grid_from_json(std::string_view text);

/// Evaluators under test; replaceable so the harness itself can be tested.
struct FormulaSet {
  std::function<Rational(const ModelParams<Rational>&, const QuotaSpec&,
                         std::int64_t, KernelValueCache<Rational>&)>
      waiting;
  std::function<Rational(const ModelParams<Rational>&, std::int64_t,
                         std::int64_t)>
      longest_pmf;
  std::function<Rational(const ModelParams<Rational>&, std::int64_t,
                         std::int64_t)>
      longest_cdf;
  std::function<Rational(const ModelParams<Rational>&, std::int64_t,
                         std::int64_t, Relation, std::int64_t, Relation,
                         KernelValueCache<Rational>&)>
      joint;
};

FormulaSet library_formulas();

struct ScanResult {
  std::vector<DiscrepancyReport> reports;
  std::size_t mismatches = 0;
};

/// One report per grid point, in a fixed order: params, then waiting
/// configurations by n, then longest pmf/cdf by (n, k), then joint
/// quadrants by (n, k1, k2).
ScanResult differential_scan(const ScanGrid& grid,
                             const FormulaSet& formulas = library_formulas());

struct McEstimate {
  std::int64_t samples = 0;
  std::int64_t hits = 0;
  double estimate = 0.0;
  double std_error = 0.0;  // sqrt(p(1-p)/samples) at the estimate
};

/// Draws `samples` sequences of length n from one SequenceSampler seeded
/// with `seed` and counts those satisfying `pred`.
McEstimate monte_carlo_estimate(const ModelParams<double>& params,
                                std::int64_t n, const EventPredicate& pred,
                                std::int64_t samples, std::uint64_t seed);

/// JSON array of report objects with fields configuration, n,
/// formula_value, oracle_value, difference, verdict.
std::string reports_to_json(const std::vector<DiscrepancyReport>& reports);

}  // namespace qruns
