#include "qruns/oracle.hpp"

#include "reference.hpp"

#include <json.hpp>

#include <gtest/gtest.h>

namespace {

using qruns::QuotaMode;
using qruns::QuotaSpec;
using qruns::Rational;
using qruns::RunQuota;
using ref::rat;

const QuotaSpec kRunRun{RunQuota{2}, RunQuota{2}, QuotaMode::Sooner};

TEST(OracleEventProb, Examples) {
  EXPECT_EQ(qruns::oracle_event_prob(ref::rparams("1/2", "1"), 3,
                                     qruns::WaitingEquals{kRunRun, 3}),
            rat("1/4"));
  EXPECT_EQ(qruns::oracle_event_prob(ref::rparams("1/2", "1/2"), 2,
                                     qruns::LongestEquals{0}),
            rat("3/8"));
  EXPECT_EQ(qruns::oracle_event_prob(ref::rparams("2/9", "5/7"), 2,
                                     qruns::LongestAtMost{2}),
            1);
}

TEST(OracleEventProb, BudgetIsEnforced) {
  EXPECT_THROW(qruns::oracle_event_prob(ref::rparams("1/2", "1/2"), 21,
                                        qruns::LongestAtMost{3}),
               qruns::OracleBudgetExceeded);
  EXPECT_THROW(qruns::oracle_event_prob(ref::rparams("1/2", "1/2"), 6,
                                        qruns::LongestAtMost{3}, 5),
               qruns::OracleBudgetExceeded);
}

TEST(OracleEventProb, TotalsAreOne) {
  const auto p = ref::rparams("3/7", "5/6");
  for (std::int64_t n = 0; n <= 14; ++n) {
    EXPECT_EQ(qruns::oracle_event_prob(p, n, qruns::LongestAtMost{n}), 1);
    Rational total = 0;
    for (std::int64_t k = 0; k <= n; ++k) {
      total += qruns::oracle_event_prob(p, n, qruns::LongestEquals{k});
    }
    EXPECT_EQ(total, 1);
  }
}

// Every sequence probability has a denominator dividing
// den(theta)^n * den(q)^(n(n-1)/2) (up to the common factor of the
// complements), so each event probability does too.
TEST(OracleEventProb, DenominatorsDivideTrialProduct) {
  const auto p = ref::rparams("2/3", "3/5");
  for (std::int64_t n = 1; n <= 10; ++n) {
    mpz_class bound = 1;
    for (std::int64_t i = 0; i < n; ++i) {
      bound *= p.theta.get_den();
      for (std::int64_t j = 0; j < i; ++j) bound *= p.q.get_den();
    }
    for (std::int64_t k = 0; k <= n; ++k) {
      const Rational v = qruns::oracle_event_prob(p, n, qruns::LongestEquals{k});
      EXPECT_GE(v, 0);
      EXPECT_TRUE(mpz_divisible_p(bound.get_mpz_t(), v.get_den().get_mpz_t()));
    }
  }
}

TEST(OracleEventProb, MatchesPropagation) {
  const auto p = ref::rparams("1/5", "9/10");
  for (const QuotaSpec& quota :
       {kRunRun, QuotaSpec{qruns::FreqQuota{3}, RunQuota{2}, QuotaMode::Later}}) {
    const auto expected = ref::waiting_by_propagation(p, quota, 12);
    for (std::int64_t n = 0; n <= 12; ++n) {
      EXPECT_EQ(qruns::oracle_event_prob(p, n, qruns::WaitingEquals{quota, n}),
                expected[n]);
    }
  }
}

TEST(OracleWaitingPmf, Examples) {
  const QuotaSpec ff{qruns::FreqQuota{1}, qruns::FreqQuota{1},
                     QuotaMode::Sooner};
  const auto point = qruns::oracle_waiting_pmf(ref::rparams("3/8", "1/4"), ff, 4);
  EXPECT_EQ(point.offset, 1);
  EXPECT_EQ(point.probs,
            (std::vector<Rational>{1, 0, 0, 0}));
  const auto rr = qruns::oracle_waiting_pmf(ref::rparams("1/2", "1"), kRunRun, 3);
  EXPECT_EQ(rr.offset, 2);
  EXPECT_EQ(rr.probs, (std::vector<Rational>{rat("1/2"), rat("1/4")}));
  const QuotaSpec later{RunQuota{2}, RunQuota{3}, QuotaMode::Later};
  EXPECT_LE(qruns::oracle_waiting_pmf(ref::rparams("1/2", "1/2"), later, 14)
                .total(),
            1);
}

TEST(DifferentialScan, EmptyGrid) {
  const auto result = qruns::differential_scan(qruns::ScanGrid{});
  EXPECT_TRUE(result.reports.empty());
  EXPECT_EQ(result.mismatches, 0u);
}

qruns::ScanGrid small_grid() {
  qruns::ScanGrid grid;
  grid.params = {ref::rparams("1/2", "1/2"), ref::rparams("4/5", "9/10")};
  grid.quotas = {kRunRun,
                 QuotaSpec{qruns::FreqQuota{2}, RunQuota{3}, QuotaMode::Later}};
  grid.waiting_n_max = 9;
  grid.longest_n_max = 6;
  grid.joint_n_max = 5;
  grid.joint_k_max = 2;
  return grid;
}

TEST(DifferentialScan, LibraryMatchesOnSmallGrid) {
  const auto result = qruns::differential_scan(small_grid());
  EXPECT_EQ(result.mismatches, 0u);
  // Per params: 8 + 5 waiting points, 28 (n, k) pairs for pmf and cdf,
  // and 6 n values times 9 + 6 + 6 + 4 joint thresholds.
  EXPECT_EQ(result.reports.size(), 2u * (8 + 5 + 2 * 28 + 6 * 25));
}

TEST(DifferentialScan, DeterministicOrder) {
  const auto a = qruns::differential_scan(small_grid());
  const auto b = qruns::differential_scan(small_grid());
  ASSERT_EQ(a.reports.size(), b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    EXPECT_EQ(a.reports[i].configuration, b.reports[i].configuration);
    EXPECT_EQ(a.reports[i].n, b.reports[i].n);
  }
  EXPECT_EQ(a.reports.front().configuration.rfind("theta=1/2 q=1/2", 0), 0u);
}

TEST(DifferentialScan, CorruptedFormulaIsFlagged) {
  auto formulas = qruns::library_formulas();
  const auto honest = formulas.waiting;
  formulas.waiting = [honest](const qruns::ModelParams<Rational>& p,
                              const QuotaSpec& quota, std::int64_t n,
                              qruns::KernelValueCache<Rational>& cache) {
    Rational v = honest(p, quota, n, cache);
    if (n == 5) v *= p.theta;  // drop-in typo: a stray factor
    return v;
  };
  const auto result = qruns::differential_scan(small_grid(), formulas);
  EXPECT_GE(result.mismatches, 1u);
  for (const auto& r : result.reports) {
    if (r.verdict == qruns::Verdict::Mismatch) {
      EXPECT_EQ(r.n, 5);
      EXPECT_EQ(r.difference, abs(r.formula_value - r.oracle_value));
    }
  }
}

TEST(DifferentialScan, DefaultGridShape) {
  const auto grid = qruns::default_grid();
  EXPECT_EQ(grid.params.size(), 9u);
  EXPECT_EQ(grid.quotas.size(), 24u);
  EXPECT_EQ(grid.waiting_n_max, 14);
  EXPECT_EQ(grid.longest_n_max, 14);
  EXPECT_EQ(grid.joint_n_max, 12);
}

TEST(GridFromJson, ParsesAndValidates) {
  const auto grid = qruns::grid_from_json(R"({
    "theta": ["1/2", "0.8"], "q": ["1"],
    "quotas": [{"mode": "later", "success": "freq:2", "failure": "run:3"}],
    "waiting_n_max": 7})");
  ASSERT_EQ(grid.params.size(), 2u);
  EXPECT_EQ(grid.params[1].theta, rat("4/5"));
  ASSERT_EQ(grid.quotas.size(), 1u);
  EXPECT_EQ(grid.quotas[0].describe(), "later freq:2/run:3");
  EXPECT_EQ(grid.waiting_n_max, 7);
  EXPECT_EQ(grid.longest_n_max, -1);
  EXPECT_THROW(qruns::grid_from_json("{"), std::invalid_argument);
  EXPECT_THROW(qruns::grid_from_json(R"({"theta": ["2"], "q": ["1"]})"),
               std::invalid_argument);
  EXPECT_THROW(qruns::grid_from_json(
                   R"({"theta": ["1/2"], "q": ["1"], "longest_n_max": 25})"),
               std::invalid_argument);
}

TEST(ReportsToJson, Schema) {
  qruns::ScanGrid grid;
  grid.params = {ref::rparams("1/2", "1/2")};
  grid.quotas = {kRunRun};
  grid.waiting_n_max = 3;
  const auto json =
      nlohmann::json::parse(qruns::reports_to_json(
          qruns::differential_scan(grid).reports));
  ASSERT_TRUE(json.is_array());
  ASSERT_EQ(json.size(), 2u);
  EXPECT_EQ(json[0]["configuration"], "theta=1/2 q=1/2 waiting sooner run:2/run:2");
  EXPECT_EQ(json[0]["n"], 2);
  EXPECT_EQ(json[0]["formula_value"], "5/8");
  EXPECT_EQ(json[0]["oracle_value"], "5/8");
  EXPECT_EQ(json[0]["difference"], "0");
  EXPECT_EQ(json[0]["verdict"], "match");
}

TEST(MonteCarlo, WithinFourSigmaOfOracle) {
  const qruns::ModelParams<double> p{0.5, 0.5};
  const auto exact = ref::rparams("1/2", "1/2");
  const std::int64_t samples = 200'000;
  const qruns::EventPredicate events[] = {
      qruns::WaitingEquals{kRunRun, 4}, qruns::LongestAtMost{2},
      qruns::JointLongest{1, qruns::Relation::GE, 2, qruns::Relation::LE}};
  for (const auto& pred : events) {
    const double truth = qruns::oracle_event_prob(exact, 10, pred).get_d();
    const auto est = qruns::monte_carlo_estimate(p, 10, pred, samples, 11);
    EXPECT_EQ(est.samples, samples);
    EXPECT_LE(std::abs(est.estimate - truth),
              4 * std::sqrt(truth * (1 - truth) / samples))
        << qruns::describe_event(pred);
  }
}

}  // namespace
