#include "qruns/oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

namespace qruns {

namespace {

std::string relation_name(Relation rel) {
  return rel == Relation::LE ? "le" : "ge";
}

std::string params_name(const ModelParams<Rational>& p) {
  return "theta=" + format_exact(p.theta) + " q=" + format_exact(p.q);
}

// Depth-first walk over all length-n sequences. `prob` is the probability
// of the current prefix and `p_success` the next trial's success chance.
class Enumerator {
 public:
  Enumerator(const ModelParams<Rational>& params, std::int64_t n,
             const EventPredicate& pred)
      : params_(params), pred_(pred), seq_(static_cast<std::size_t>(n)) {}

  Rational run() {
    walk(0, Rational(1), params_.theta);
    return total_;
  }

 private:
  void walk(std::size_t depth, const Rational& prob,
            const Rational& p_success) {
    if (depth == seq_.size()) {
      if (event_holds(pred_, seq_)) total_ += prob;
      return;
    }
    seq_[depth] = 0;
    walk(depth + 1, prob * (1 - p_success), p_success * params_.q);
    seq_[depth] = 1;
    walk(depth + 1, prob * p_success, p_success);
  }

  const ModelParams<Rational>& params_;
  const EventPredicate& pred_;
  BinarySequence seq_;
  Rational total_ = 0;
};

DiscrepancyReport compare(std::string configuration, std::int64_t n,
                          Rational formula, Rational oracle) {
  DiscrepancyReport report;
  report.configuration = std::move(configuration);
  report.n = n;
  report.difference = abs(formula - oracle);
  report.verdict = report.difference == 0 ? Verdict::Match : Verdict::Mismatch;
  report.formula_value = std::move(formula);
  report.oracle_value = std::move(oracle);
  return report;
}

// All reports for one parameter pair.
std::vector<DiscrepancyReport> scan_params(const ScanGrid& grid,
                                           const ModelParams<Rational>& p,
                                           const FormulaSet& formulas) {
  std::vector<DiscrepancyReport> out;
  const std::string prefix = params_name(p);
  if (grid.waiting_n_max >= 0) {
    for (const QuotaSpec& quota : grid.quotas) {
      KernelValueCache<Rational> cache;
      const std::string name = prefix + " waiting " + quota.describe();
      for (std::int64_t n = support_minimum(quota); n <= grid.waiting_n_max;
           ++n) {
        out.push_back(compare(name, n, formulas.waiting(p, quota, n, cache),
                              oracle_event_prob(p, n, WaitingEquals{quota, n})));
      }
    }
  }
  for (std::int64_t n = 0; n <= grid.longest_n_max; ++n) {
    for (std::int64_t k = 0; k <= n; ++k) {
      out.push_back(compare(prefix + " longest pmf k=" + std::to_string(k), n,
                            formulas.longest_pmf(p, n, k),
                            oracle_event_prob(p, n, LongestEquals{k})));
      out.push_back(compare(prefix + " longest cdf k=" + std::to_string(k), n,
                            formulas.longest_cdf(p, n, k),
                            oracle_event_prob(p, n, LongestAtMost{k})));
    }
  }
  if (grid.joint_n_max >= 0) {
    KernelValueCache<Rational> cache;
    const Relation rels[] = {Relation::LE, Relation::GE};
    for (std::int64_t n = 0; n <= grid.joint_n_max; ++n) {
      for (Relation r1 : rels) {
        for (Relation r2 : rels) {
          for (std::int64_t k1 = r1 == Relation::GE ? 1 : 0;
               k1 <= grid.joint_k_max; ++k1) {
            for (std::int64_t k2 = r2 == Relation::GE ? 1 : 0;
                 k2 <= grid.joint_k_max; ++k2) {
              const JointLongest event{k1, r1, k2, r2};
              out.push_back(compare(prefix + " " + describe_event(event), n,
                                    formulas.joint(p, n, k1, r1, k2, r2, cache),
                                    oracle_event_prob(p, n, event)));
            }
          }
        }
      }
    }
  }
  return out;
}

ModelParams<Rational> rational_params(const Rational& theta,
                                      const Rational& q) {
  return make_params(theta, q);
}

}  // namespace

bool event_holds(const EventPredicate& pred, std::span<const Bit> seq) {
  return std::visit(
      [&](const auto& e) -> bool {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, WaitingEquals>) {
          const auto t = stopping_time(seq, e.quota);
          return t && *t == e.n;
        } else if constexpr (std::is_same_v<E, LongestEquals>) {
          return longest_runs(seq).success == e.k;
        } else if constexpr (std::is_same_v<E, LongestAtMost>) {
          return longest_runs(seq).success <= e.k;
        } else {
          const LongestRuns runs = longest_runs(seq);
          const auto ok = [](std::int64_t v, Relation rel, std::int64_t k) {
            return rel == Relation::LE ? v <= k : v >= k;
          };
          return ok(runs.success, e.rel1, e.k1) &&
                 ok(runs.failure, e.rel2, e.k2);
        }
      },
      pred);
}

std::string describe_event(const EventPredicate& pred) {
  return std::visit(
      [](const auto& e) -> std::string {
        using E = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<E, WaitingEquals>) {
          return "waiting " + e.quota.describe() + " n=" + std::to_string(e.n);
        } else if constexpr (std::is_same_v<E, LongestEquals>) {
          return "longest == " + std::to_string(e.k);
        } else if constexpr (std::is_same_v<E, LongestAtMost>) {
          return "longest <= " + std::to_string(e.k);
        } else {
          return "joint " + relation_name(e.rel1) + " " + std::to_string(e.k1) +
                 " " + relation_name(e.rel2) + " " + std::to_string(e.k2);
        }
      },
      pred);
}

Rational oracle_event_prob(const ModelParams<Rational>& params, std::int64_t n,
                           const EventPredicate& pred, std::int64_t budget) {
  if (n > budget) {
    throw OracleBudgetExceeded("oracle: n = " + std::to_string(n) +
                               " exceeds enumeration budget " +
                               std::to_string(budget));
  }
  if (n < 0) return Rational(0);
  Enumerator walker(params, n, pred);
  return walker.run();
}

Pmf<Rational> oracle_waiting_pmf(const ModelParams<Rational>& params,
                                  const QuotaSpec& quota, std::int64_t n_max,
                                  std::int64_t budget) {
  Pmf<Rational> pmf;
  pmf.offset = support_minimum(quota);
  for (std::int64_t n = pmf.offset; n <= n_max; ++n) {
    pmf.probs.push_back(
        oracle_event_prob(params, n, WaitingEquals{quota, n}, budget));
  }
  return pmf;
}

ScanGrid default_grid() {
  ScanGrid grid;
  for (const char* theta : {"1/5", "1/2", "4/5"}) {
    for (const char* q : {"1/2", "9/10", "1"}) {
      grid.params.push_back(
          rational_params(parse_rational(theta), parse_rational(q)));
    }
  }
  const std::pair<std::int64_t, std::int64_t> ks[] = {{2, 2}, {2, 3}, {3, 2}};
  for (QuotaMode mode : {QuotaMode::Sooner, QuotaMode::Later}) {
    for (bool run1 : {true, false}) {
      for (bool run0 : {true, false}) {
        for (const auto& [k1, k2] : ks) {
          QuotaSpec quota;
          quota.mode = mode;
          quota.success = run1 ? Quota{RunQuota{k1}} : Quota{FreqQuota{k1}};
          quota.failure = run0 ? Quota{RunQuota{k2}} : Quota{FreqQuota{k2}};
          grid.quotas.push_back(quota);
        }
      }
    }
  }
  grid.waiting_n_max = 14;
  grid.longest_n_max = 14;
  grid.joint_n_max = 12;
  grid.joint_k_max = 3;
  return grid;
}

ScanGrid grid_from_json(std::string_view text) {
  using nlohmann::json;
  ScanGrid grid;
  try {
    const json doc = json::parse(text);
    std::vector<Rational> thetas;
    std::vector<Rational> qs;
    for (const auto& v : doc.at("theta")) {
      thetas.push_back(parse_rational(v.get<std::string>()));
    }
    for (const auto& v : doc.at("q")) {
      qs.push_back(parse_rational(v.get<std::string>()));
    }
    for (const auto& theta : thetas) {
      for (const auto& q : qs) grid.params.push_back(rational_params(theta, q));
    }
    if (doc.contains("quotas")) {
      for (const auto& item : doc.at("quotas")) {
        QuotaSpec quota;
        const std::string mode = item.at("mode").get<std::string>();
        if (mode != "sooner" && mode != "later") {
          throw std::invalid_argument("mode must be sooner or later");
        }
        quota.mode = mode == "sooner" ? QuotaMode::Sooner : QuotaMode::Later;
        quota.success = parse_quota(item.at("success").get<std::string>());
        quota.failure = parse_quota(item.at("failure").get<std::string>());
        grid.quotas.push_back(quota);
      }
    }
    grid.waiting_n_max = doc.value("waiting_n_max", std::int64_t{-1});
    grid.longest_n_max = doc.value("longest_n_max", std::int64_t{-1});
    grid.joint_n_max = doc.value("joint_n_max", std::int64_t{-1});
    grid.joint_k_max = doc.value("joint_k_max", std::int64_t{0});
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad grid file: ") + e.what());
  }
  const std::int64_t largest = std::max(
      {grid.waiting_n_max, grid.longest_n_max, grid.joint_n_max});
  if (largest > kOracleBudget) {
    throw std::invalid_argument("grid exceeds the enumeration budget of " +
                                std::to_string(kOracleBudget));
  }
  return grid;
}

FormulaSet library_formulas() {
  FormulaSet f;
  f.waiting = [](const ModelParams<Rational>& p, const QuotaSpec& quota,
                 std::int64_t n, KernelValueCache<Rational>& cache) {
    return waiting_time_pmf(p, quota, n, cache);
  };
  f.longest_pmf = [](const ModelParams<Rational>& p, std::int64_t n,
                     std::int64_t k) { return longest_run_pmf(p, n, k); };
  f.longest_cdf = [](const ModelParams<Rational>& p, std::int64_t n,
                     std::int64_t k) { return longest_run_cdf(p, n, k); };
  f.joint = [](const ModelParams<Rational>& p, std::int64_t n,
               std::int64_t k1, Relation r1, std::int64_t k2, Relation r2,
               KernelValueCache<Rational>& cache) {
    return joint_longest(p, n, k1, r1, k2, r2, cache);
  };
  return f;
}

ScanResult differential_scan(const ScanGrid& grid,
                             const FormulaSet& formulas) {
  // Parameter pairs are independent; each worker owns its caches and the
  // results are concatenated in grid order.
  std::vector<std::future<std::vector<DiscrepancyReport>>> jobs;
  for (const auto& p : grid.params) {
    jobs.push_back(std::async(std::launch::async, [&grid, &formulas, p] {
      return scan_params(grid, p, formulas);
    }));
  }
  ScanResult result;
  for (auto& job : jobs) {
    for (auto& report : job.get()) {
      if (report.verdict == Verdict::Mismatch) ++result.mismatches;
      result.reports.push_back(std::move(report));
    }
  }
  return result;
}

McEstimate monte_carlo_estimate(const ModelParams<double>& params,
                                std::int64_t n, const EventPredicate& pred,
                                std::int64_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  SequenceSampler sampler(seed);
  McEstimate out;
  out.samples = samples;
  for (std::int64_t i = 0; i < samples; ++i) {
    if (event_holds(pred, sampler.draw(params, n))) ++out.hits;
  }
  out.estimate = static_cast<double>(out.hits) / static_cast<double>(samples);
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) /
                            static_cast<double>(samples));
  return out;
}

std::string reports_to_json(const std::vector<DiscrepancyReport>& reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : reports) {
    out.push_back({{"configuration", r.configuration},
                   {"n", r.n},
                   {"formula_value", format_exact(r.formula_value)},
                   {"oracle_value", format_exact(r.oracle_value)},
                   {"difference", format_exact(r.difference)},
                   {"verdict", r.verdict == Verdict::Match ? "match"
                                                           : "mismatch"}});
  }
  return out.dump(2);
}

}  // namespace qruns
