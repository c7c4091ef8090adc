#include "cli.hpp"

#include "qruns/distributions.hpp"
#include "qruns/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>

namespace qruns::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParamArgs {
  std::string theta;
  std::string q;
};

struct WaitingArgs {
  std::string mode = "sooner";
  std::string success;
  std::string failure;
};

struct LongestArgs {
  std::int64_t n = -1;
  bool cdf = false;
  std::vector<std::string> joint;
};

struct OutputArgs {
  bool exact = false;
  std::string format = "csv";
  int precision = 17;
};

struct Row {
  std::int64_t key;
  std::string text;        // CSV cell
  nlohmann::json value;    // JSON value
};

QuotaSpec build_quota(const WaitingArgs& w) {
  if (w.success.empty() || w.failure.empty()) {
    throw UsageError("--success and --failure are required");
  }
  if (w.mode != "sooner" && w.mode != "later") {
    throw UsageError("--mode must be sooner or later");
  }
  QuotaSpec quota;
  quota.mode = w.mode == "sooner" ? QuotaMode::Sooner : QuotaMode::Later;
  try {
    quota.success = parse_quota(w.success);
    quota.failure = parse_quota(w.failure);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return quota;
}

Relation parse_relation(const std::string& text) {
  if (text == "le") return Relation::LE;
  if (text == "ge") return Relation::GE;
  throw UsageError("relation must be le or ge, got '" + text + "'");
}

std::int64_t parse_count(const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError("expected an integer, got '" + text + "'");
}

JointLongest parse_joint(const std::vector<std::string>& parts) {
  JointLongest j;
  j.k1 = parse_count(parts.at(0));
  j.rel1 = parse_relation(parts.at(1));
  j.k2 = parse_count(parts.at(2));
  j.rel2 = parse_relation(parts.at(3));
  if ((j.rel1 == Relation::GE && j.k1 < 1) ||
      (j.rel2 == Relation::GE && j.k2 < 1) || j.k1 < 0 || j.k2 < 0) {
    throw UsageError("--joint needs k >= 1 for ge and k >= 0 for le");
  }
  return j;
}

// Exact output only makes sense for inputs that are already exact.
void require_fraction(const std::string& name, const std::string& text) {
  if (text.find_first_of(".eE") != std::string::npos) {
    throw UsageError(name + " must be an integer or a fraction p/q when exact "
                            "output is requested, got '" + text + "'");
  }
}

template <Scalar T>
ModelParams<T> build_params(const ParamArgs& p) {
  try {
    return make_params(parse_scalar<T>(p.theta), parse_scalar<T>(p.q));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

template <Scalar T>
Row make_row(std::int64_t key, const T& value, const OutputArgs& o) {
  if constexpr (std::same_as<T, Rational>) {
    if (o.exact) return {key, format_exact(value), format_exact(value)};
    const double d = value.get_d();
    const std::string text = format_double(d, o.precision);
    return {key, text, nlohmann::json::parse(text)};
  } else {
    std::string text = format_double(value, o.precision);
    return {key, text, nlohmann::json::parse(text)};
  }
}

void emit(std::ostream& out, const OutputArgs& o, const std::string& key_name,
          const std::vector<Row>& rows, const nlohmann::json& header) {
  if (o.format == "json") {
    nlohmann::json doc = header;
    doc["support"] = nlohmann::json::array();
    for (const Row& r : rows) {
      doc["support"].push_back({{key_name, r.key}, {"p", r.value}});
    }
    out << doc.dump(2) << "\n";
    return;
  }
  out << key_name << ",probability\n";
  for (const Row& r : rows) out << r.key << "," << r.text << "\n";
}

template <Scalar T>
nlohmann::json params_json(const ModelParams<T>& p, const OutputArgs& o) {
  return {{"theta", format_scalar(p.theta, o.precision)},
          {"q", format_scalar(p.q, o.precision)}};
}

template <Scalar T>
void waiting_table(std::ostream& out, const ModelParams<T>& params,
                   const QuotaSpec& quota, std::int64_t n_max,
                   const OutputArgs& o) {
  const Pmf<T> pmf = waiting_time_table(params, quota, n_max);
  std::vector<Row> rows;
  for (std::size_t i = 0; i < pmf.probs.size(); ++i) {
    rows.push_back(
        make_row(pmf.offset + static_cast<std::int64_t>(i), pmf.probs[i], o));
  }
  emit(out, o, "n", rows,
       {{"params", params_json(params, o)}, {"quota", quota.describe()}});
}

// k = 0..n rows for the pmf or cdf, or n' = 0..n rows for a joint event.
template <Scalar T, typename Eval>
void longest_table(std::ostream& out, const ModelParams<T>& params,
                   const LongestArgs& l, const OutputArgs& o, Eval&& eval) {
  std::vector<Row> rows;
  nlohmann::json header{{"params", params_json(params, o)}, {"n", l.n}};
  std::string key_name = "k";
  if (!l.joint.empty()) {
    const JointLongest j = parse_joint(l.joint);
    header["event"] = describe_event(j);
    key_name = "n";
    for (std::int64_t n = 0; n <= l.n; ++n) {
      rows.push_back(make_row(n, eval(n, EventPredicate{j}), o));
    }
  } else {
    header["event"] = l.cdf ? "longest success run cdf"
                            : "longest success run pmf";
    for (std::int64_t k = 0; k <= l.n; ++k) {
      const EventPredicate pred =
          l.cdf ? EventPredicate{LongestAtMost{k}} : EventPredicate{LongestEquals{k}};
      rows.push_back(make_row(k, eval(l.n, pred), o));
    }
  }
  emit(out, o, key_name, rows, header);
}

template <Scalar T>
T longest_formula(const ModelParams<T>& params, std::int64_t n,
                  const EventPredicate& pred) {
  if (const auto* e = std::get_if<LongestEquals>(&pred)) {
    return longest_run_pmf(params, n, e->k);
  }
  if (const auto* a = std::get_if<LongestAtMost>(&pred)) {
    return longest_run_cdf(params, n, a->k);
  }
  const auto& j = std::get<JointLongest>(pred);
  return joint_longest(params, n, j.k1, j.rel1, j.k2, j.rel2);
}

void check_output(const OutputArgs& o) {
  if (o.format != "csv" && o.format != "json") {
    throw UsageError("--format must be csv or json");
  }
  if (o.precision < 1 || o.precision > 40) {
    throw UsageError("--precision must lie in 1..40");
  }
}

void add_params(CLI::App* cmd, ParamArgs& p) {
  cmd->add_option("--theta", p.theta, "success probability with no failures")
      ->required();
  cmd->add_option("--q", p.q, "decay factor per failure")->required();
}

void add_waiting(CLI::App* cmd, WaitingArgs& w) {
  cmd->add_option("--mode", w.mode, "sooner or later")->capture_default_str();
  cmd->add_option("--success", w.success, "success quota, run:K or freq:K");
  cmd->add_option("--failure", w.failure, "failure quota, run:K or freq:K");
}

void add_output(CLI::App* cmd, OutputArgs& o, bool exact_flag = true) {
  if (exact_flag) {
    cmd->add_flag("--exact", o.exact, "print fractions (needs fraction inputs)");
  }
  cmd->add_option("--format", o.format, "csv or json")->capture_default_str();
  cmd->add_option("--precision", o.precision, "significant digits")
      ->capture_default_str();
}

void add_longest(CLI::App* cmd, LongestArgs& l) {
  cmd->add_flag("--cdf", l.cdf, "P(longest <= k) instead of P(longest == k)");
  cmd->add_option("--joint", l.joint,
                  "K1 le|ge K2 le|ge: longest success and failure runs")
      ->expected(4);
}

int run_verify(const std::string& grid_arg, const std::string& report_path,
               std::ostream& out) {
  ScanGrid grid;
  if (grid_arg == "default") {
    grid = default_grid();
  } else {
    std::ifstream in(grid_arg);
    if (!in) throw UsageError("cannot read grid file '" + grid_arg + "'");
    const std::string text{std::istreambuf_iterator<char>(in),
                           std::istreambuf_iterator<char>()};
    try {
      grid = grid_from_json(text);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  const ScanResult result = differential_scan(grid);
  for (const auto& r : result.reports) {
    if (r.verdict == Verdict::Match) continue;
    out << "MISMATCH " << r.configuration << " n=" << r.n
        << " formula=" << format_exact(r.formula_value)
        << " oracle=" << format_exact(r.oracle_value) << "\n";
  }
  out << "checked " << result.reports.size() << " points, "
      << result.mismatches << " mismatches\n";
  if (!report_path.empty()) {
    std::ofstream report(report_path);
    if (!report) throw UsageError("cannot write '" + report_path + "'");
    report << reports_to_json(result.reports) << "\n";
  }
  return result.mismatches == 0 ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Waiting-time and longest-run distributions of q-binary trials"};
  app.name("qruns");
  app.require_subcommand(1);

  ParamArgs params;
  WaitingArgs waiting;
  LongestArgs longest;
  OutputArgs output;
  std::int64_t n_max = -1;
  bool rational = false;
  std::string grid = "default";
  std::string report_path;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::int64_t mc_n = -1;
  std::optional<std::int64_t> longest_equals;
  std::optional<std::int64_t> longest_at_most;

  CLI::App* pmf = app.add_subcommand("pmf", "waiting-time distribution table");
  add_waiting(pmf, waiting);
  add_params(pmf, params);
  pmf->add_option("--n-max", n_max, "last n to print")->required();
  add_output(pmf, output);

  CLI::App* lon = app.add_subcommand("longest", "longest success run table");
  lon->add_option("--n", longest.n, "number of trials")->required();
  add_params(lon, params);
  add_longest(lon, longest);
  add_output(lon, output);

  CLI::App* orc = app.add_subcommand(
      "oracle", "the same tables by exhaustive enumeration");
  add_waiting(orc, waiting);
  add_params(orc, params);
  orc->add_option("--n-max", n_max, "last n for a waiting-time table");
  orc->add_option("--n", longest.n, "number of trials for a longest-run table");
  add_longest(orc, longest);
  orc->add_flag("--rational", rational, "print exact fractions");
  add_output(orc, output, false);

  CLI::App* ver = app.add_subcommand(
      "verify", "compare every formula with the enumeration oracle");
  ver->add_option("--grid", grid, "default, or a JSON grid file")
      ->capture_default_str();
  ver->add_option("--report", report_path, "write all reports as JSON");

  CLI::App* mc = app.add_subcommand("mc", "Monte Carlo estimate of one event");
  mc->add_option("--samples", samples, "number of sequences")->required();
  mc->add_option("--seed", seed, "generator seed")->required();
  add_params(mc, params);
  add_waiting(mc, waiting);
  mc->add_option("--n", mc_n, "sequence length (waiting events: W == n)")
      ->required();
  mc->add_option("--longest-equals", longest_equals, "event: longest == K");
  mc->add_option("--longest-at-most", longest_at_most, "event: longest <= K");
  mc->add_option("--joint", longest.joint, "event: K1 le|ge K2 le|ge")
      ->expected(4);
  mc->add_option("--precision", output.precision, "significant digits")
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  CLI::App* active = app.get_subcommands().front();
  try {
    check_output(output);
    if (active == pmf) {
      const QuotaSpec quota = build_quota(waiting);
      if (n_max < support_minimum(quota)) {
        throw UsageError("--n-max is below the support minimum " +
                         std::to_string(support_minimum(quota)));
      }
      if (output.exact) {
        require_fraction("--theta", params.theta);
        require_fraction("--q", params.q);
        waiting_table(out, build_params<Rational>(params), quota, n_max,
                      output);
      } else {
        waiting_table(out, build_params<double>(params), quota, n_max, output);
      }
      return 0;
    }
    if (active == lon) {
      if (longest.n < 0) throw UsageError("--n must be >= 0");
      if (output.exact) {
        require_fraction("--theta", params.theta);
        require_fraction("--q", params.q);
        const auto p = build_params<Rational>(params);
        longest_table(out, p, longest, output,
                      [&](std::int64_t n, const EventPredicate& pred) {
                        return longest_formula(p, n, pred);
                      });
      } else {
        const auto p = build_params<double>(params);
        longest_table(out, p, longest, output,
                      [&](std::int64_t n, const EventPredicate& pred) {
                        return longest_formula(p, n, pred);
                      });
      }
      return 0;
    }
    if (active == orc) {
      output.exact = rational;
      if (rational) {
        require_fraction("--theta", params.theta);
        require_fraction("--q", params.q);
      }
      const auto p = build_params<Rational>(params);
      if (!waiting.success.empty() || !waiting.failure.empty()) {
        const QuotaSpec quota = build_quota(waiting);
        if (n_max < support_minimum(quota)) {
          throw UsageError("--n-max is below the support minimum " +
                           std::to_string(support_minimum(quota)));
        }
        const Pmf<Rational> pmf = oracle_waiting_pmf(p, quota, n_max);
        std::vector<Row> rows;
        for (std::size_t i = 0; i < pmf.probs.size(); ++i) {
          rows.push_back(make_row(pmf.offset + static_cast<std::int64_t>(i),
                                  pmf.probs[i], output));
        }
        emit(out, output, "n", rows,
             {{"params", params_json(p, output)}, {"quota", quota.describe()}});
        return 0;
      }
      if (longest.n < 0) {
        throw UsageError("oracle needs --success/--failure/--n-max or --n");
      }
      longest_table(out, p, longest, output,
                    [&](std::int64_t n, const EventPredicate& pred) {
                      return oracle_event_prob(p, n, pred);
                    });
      return 0;
    }
    if (active == ver) return run_verify(grid, report_path, out);

    // mc
    if (samples < 1) throw UsageError("--samples must be >= 1");
    if (mc_n < 0) throw UsageError("--n must be >= 0");
    const int chosen = (!waiting.success.empty() || !waiting.failure.empty()) +
                       longest_equals.has_value() +
                       longest_at_most.has_value() + !longest.joint.empty();
    if (chosen != 1) {
      throw UsageError(
          "mc needs exactly one event: --success/--failure, "
          "--longest-equals, --longest-at-most or --joint");
    }
    EventPredicate pred;
    if (longest_equals) {
      pred = LongestEquals{*longest_equals};
    } else if (longest_at_most) {
      pred = LongestAtMost{*longest_at_most};
    } else if (!longest.joint.empty()) {
      pred = parse_joint(longest.joint);
    } else {
      pred = WaitingEquals{build_quota(waiting), mc_n};
    }
    const auto p = build_params<double>(params);
    const McEstimate est = monte_carlo_estimate(p, mc_n, pred, samples, seed);
    out << "event,samples,hits,estimate,std_error\n"
        << describe_event(pred) << "," << est.samples << "," << est.hits << ","
        << format_double(est.estimate, output.precision) << ","
        << format_double(est.std_error, output.precision) << "\n";
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << active->help();
    return 2;
  } catch (const OracleBudgetExceeded& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace qruns::cli
