#include "cli_commands.h"

#include <cmath>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "minimax_bayes/game.h"
#include "minimax_bayes/mdp.h"
#include "minimax_bayes/problem_io.h"
#include "minimax_bayes/rng.h"
#include "minimax_bayes/trace_io.h"
#include "minimax_bayes/wma.h"
#include "minimax_bayes/wma_sr.h"

namespace minimax_bayes::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kVerifyViolation = 4;
constexpr double kTraceTolerance = 1e-9;
constexpr double kOracleTolerance = 1e-9;
constexpr std::uint64_t kAzumaSeedSlot = 0xA2;
constexpr double kAzumaEpsilons[] = {0.05, 0.1, 0.2};

class MissingArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Inputs {
  Problem problem;
  PolicySet policies;
  std::optional<RestrictedPriorSet> restriction;
};

Inputs LoadInputs(const fs::path& problem_file,
                  const std::optional<fs::path>& policy_file,
                  const std::optional<fs::path>& restriction_file,
                  std::uint64_t cap) {
  Problem problem = LoadProblem(problem_file);
  PolicySet policies =
      policy_file ? LoadPolicySet(*policy_file)
                  : EnumeratePolicies(problem.num_states, problem.num_actions,
                                      cap);
  for (const DeterministicPolicy& policy : policies) {
    policy.CheckCompatible(problem.mdps.front());
  }
  std::optional<RestrictedPriorSet> restriction;
  if (restriction_file) {
    restriction = LoadRestriction(*restriction_file, problem, policies);
    if (restriction->num_mdps() != problem.num_mdps()) {
      throw InvalidInputError("$.statistic_values",
                              "one row per MDP is required");
    }
  }
  return {std::move(problem), std::move(policies), std::move(restriction)};
}

// max_i (U xi)_i minus nature's best reply to q, over the restricted set when
// one is given.
double Gap(const PayoffMatrix& payoff, const Eigen::VectorXd& q,
           const Eigen::VectorXd& xi, const RestrictedPriorSet* restriction) {
  if (restriction == nullptr) return StrategyGap(payoff.values(), q, xi);
  const Belief reply = NatureBestResponseConstrained(q, payoff, *restriction);
  return payoff.PolicyPayoffs(Belief(xi)).maxCoeff() -
         payoff.MdpPayoffs(q).dot(reply.probs());
}

RolloutMode ParseMode(const std::string& mode) {
  if (mode == "truncated") return RolloutMode::kTruncatedDiscounted;
  if (mode == "geometric") return RolloutMode::kGeometric;
  throw InvalidInputError("--mode", "expected truncated or geometric, got '" +
                                        mode + "'");
}

int Guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const InvalidInputError& e) {
    err << "error: " << e.what() << '\n';
    return kMalformedInput;
  } catch (const MissingArtifactError& e) {
    err << "error: " << e.what() << '\n';
    return kMalformedInput;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << '\n';
    return kInfeasible;
  } catch (const InfeasibleRestrictionError& e) {
    err << "error: infeasible restriction: " << e.what() << '\n';
    return kInfeasible;
  } catch (const SolverError& e) {
    err << "error: solver failure: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kMalformedInput;
  }
}

void WriteText(const fs::path& file, const std::function<void(std::ostream&)>& fill) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  fill(out);
}

json OptionalPath(const std::optional<fs::path>& p) {
  return p ? json(fs::absolute(*p).lexically_normal().string()) : json(nullptr);
}

GameSolution AverageSolution(const WmaTrace& trace, const PayoffMatrix& payoff,
                             const RestrictedPriorSet* restriction,
                             std::string method) {
  GameSolution solution;
  solution.value = trace.AveragePayoff();
  solution.policy_distribution = trace.AverageDistribution();
  solution.belief = Belief(CleanSimplexPoint(trace.AverageBelief()));
  solution.method = std::move(method);
  solution.duality_gap = Gap(payoff, solution.policy_distribution,
                             solution.belief.probs(), restriction);
  solution.iterations = trace.num_rounds();
  return solution;
}

int SolveImpl(const SolveOptions& opt, std::ostream& out) {
  const std::string& solver = opt.solver;
  if (solver != "exact" && solver != "wma" && solver != "wma-sr" &&
      solver != "fictitious") {
    throw InvalidInputError("--solver", "unknown solver '" + solver + "'");
  }
  if (solver != "exact" && opt.rounds < 1) {
    throw InvalidInputError("--rounds", "need at least one round");
  }
  if (opt.samples < 1) throw InvalidInputError("--samples", "need S >= 1");
  if (opt.epochs < 0) throw InvalidInputError("--epochs", "must be >= 0");
  if (opt.epochs > 0 && solver != "wma-sr") {
    throw InvalidInputError("--epochs", "epochs apply to wma-sr only");
  }
  if (opt.restriction && solver == "fictitious") {
    throw InvalidInputError("--restriction",
                            "fictitious play runs on the unrestricted game");
  }
  const RolloutMode mode = ParseMode(opt.mode);

  const Inputs in =
      LoadInputs(opt.problem, opt.policies, opt.restriction, opt.policy_cap);
  const RestrictedPriorSet* restriction =
      in.restriction ? &*in.restriction : nullptr;
  const PayoffMatrix payoff =
      BuildPayoffMatrix(in.problem.mdps, in.policies, in.problem.init);
  fs::create_directories(opt.out);

  WmaConfig config;
  config.learning_rate = opt.learning_rate;
  config.rounds = opt.rounds;
  config.seed = opt.seed;
  EstimatorConfig est;
  est.samples = opt.samples;
  est.mode = mode;
  est.shared_samples = !opt.independent_samples;

  GameSolution solution;
  std::int64_t rounds_run = 0;
  json resolved_rate = nullptr;

  if (solver == "exact") {
    solution = restriction ? ExactGameValue(payoff, *restriction)
                           : ExactGameValue(payoff);
  } else if (solver == "fictitious") {
    const FictitiousPlayResult fp = FictitiousPlay(payoff, opt.rounds);
    solution = fp.solution;
    rounds_run = opt.rounds;
    WriteText(opt.out / "trace.csv",
              [&](std::ostream& os) { WriteFictitiousPlayCsv(os, fp); });
  } else if (solver == "wma") {
    const double rate = ResolveLearningRate(config, payoff.num_policies());
    resolved_rate = rate;
    config.learning_rate = rate;
    const WmaTrace trace = WmaRun(payoff, config, restriction);
    solution = AverageSolution(trace, payoff, restriction, "wma");
    rounds_run = trace.num_rounds();
    WriteText(opt.out / "trace.csv", [&](std::ostream& os) {
      WriteTraceCsv(os, TraceRowsFromWma(trace), false);
    });
    TraceDocument doc;
    doc.solver = solver;
    doc.Append(trace, 1, 0);
    WriteJsonFile(opt.out / "trace.json", TraceDocumentToJson(doc));
  } else {
    TraceDocument doc;
    doc.solver = solver;
    std::vector<TraceRow> rows;
    if (opt.epochs > 0) {
      const std::vector<EpochResult> epochs =
          EpochRunner(in.problem.mdps, in.policies, in.problem.init, config,
                      est, opt.epochs, restriction);
      for (const EpochResult& e : epochs) {
        std::vector<TraceRow> r = TraceRowsFromWmaSr(e.run, e.epoch, rounds_run);
        rows.insert(rows.end(), r.begin(), r.end());
        doc.Append(e.run.trace, e.epoch, rounds_run);
        rounds_run += e.length;
      }
      solution = AverageSolution(epochs.back().run.trace, payoff, restriction,
                                 "wma-sr");
    } else {
      const double rate = ResolveLearningRate(config, payoff.num_policies());
      resolved_rate = rate;
      config.learning_rate = rate;
      const WmaSrResult run = WmaSrRun(in.problem.mdps, in.policies,
                                       in.problem.init, config, est, restriction);
      rows = TraceRowsFromWmaSr(run, 1, 0);
      doc.Append(run.trace, 1, 0);
      solution = AverageSolution(run.trace, payoff, restriction, "wma-sr");
      rounds_run = run.trace.num_rounds();
    }
    WriteText(opt.out / "trace.csv",
              [&](std::ostream& os) { WriteTraceCsv(os, rows, true); });
    WriteJsonFile(opt.out / "trace.json", TraceDocumentToJson(doc));
  }

  json solution_doc = GameSolutionToJson(solution);
  solution_doc["reward_scale"] = in.problem.reward_scale;
  solution_doc["value_raw"] = solution.value / in.problem.reward_scale;
  WriteJsonFile(opt.out / "solution.json", solution_doc);

  const json manifest = {
      {"problem", fs::absolute(opt.problem).lexically_normal().string()},
      {"solver", solver},
      {"config",
       {{"learning_rate", resolved_rate},
        {"rounds", solver == "exact" ? 0 : opt.rounds},
        {"samples", opt.samples},
        {"epochs", opt.epochs},
        {"seed", opt.seed},
        {"mode", opt.mode},
        {"shared_samples", !opt.independent_samples}}},
      {"out", fs::absolute(opt.out).lexically_normal().string()},
      {"restriction", OptionalPath(opt.restriction)},
      {"policies", OptionalPath(opt.policies)},
      {"policy_cap", opt.policy_cap}};
  WriteJsonFile(opt.out / "manifest.json", manifest);

  out << "value=" << FormatDouble(solution.value)
      << " gap=" << FormatDouble(solution.duality_gap)
      << " rounds=" << rounds_run << '\n';
  return kOk;
}

// Collects check lines; a check holds when its slack is nonnegative.
class Report {
 public:
  explicit Report(std::ostream& out) : out_(out) {}

  void Check(const std::string& name, double slack, const std::string& detail = "") {
    const bool holds = slack >= 0.0;
    all_hold_ = all_hold_ && holds;
    ++checked_;
    out_ << name << ' ' << (holds ? "holds" : "violated")
         << " slack=" << FormatDouble(slack);
    if (!detail.empty()) out_ << ' ' << detail;
    out_ << '\n';
  }
  void Skip(const std::string& name, const std::string& reason) {
    out_ << name << " skipped " << reason << '\n';
  }
  void Fail(const std::string& name, const std::string& reason) {
    all_hold_ = false;
    ++checked_;
    out_ << name << " violated " << reason << '\n';
  }
  bool all_hold() const { return all_hold_; }
  int checked() const { return checked_; }

 private:
  std::ostream& out_;
  bool all_hold_ = true;
  int checked_ = 0;
};

json ReadArtifact(const fs::path& file) {
  if (!fs::exists(file)) {
    throw MissingArtifactError("missing artifact " + file.string());
  }
  return ReadJsonFile(file);
}

std::optional<fs::path> PathField(const json& manifest, const char* key) {
  if (!manifest.contains(key) || manifest[key].is_null()) return std::nullopt;
  return fs::path(manifest[key].get<std::string>());
}

Eigen::VectorXd JsonVector(const json& doc) {
  const std::vector<double> v = doc.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                           static_cast<Eigen::Index>(v.size()));
}

void CheckOracle(Report& report, const Inputs& in, const GameSolution& solution,
                 bool value_below_bayes) {
  const OracleBound bound = ComputeOracleBound(
      in.problem.mdps, solution.belief, in.policies, in.problem.init);
  std::ostringstream detail;
  detail << "value=" << FormatDouble(solution.value)
         << " bayes=" << FormatDouble(bound.lower)
         << " oracle=" << FormatDouble(bound.upper);
  double slack = std::min(bound.upper - bound.lower,
                          bound.upper - solution.value) + kOracleTolerance;
  if (value_below_bayes) {
    slack = std::min(slack, bound.lower - solution.value + kOracleTolerance);
  }
  report.Check("oracle_bound", slack, detail.str());
}

struct Segment {
  TraceSegment info;
  WmaTrace trace;
  std::vector<const TraceRow*> rows;
  std::vector<int> sampled;
};

void VerifyWeightedMajority(Report& report, const json& manifest,
                            const Inputs& in, const PayoffMatrix& payoff,
                            const fs::path& dir, int azuma_runs) {
  const std::string solver = manifest["solver"].get<std::string>();
  const bool estimated = solver == "wma-sr";
  const fs::path csv_file = dir / "trace.csv";
  if (!fs::exists(csv_file)) {
    throw MissingArtifactError("missing artifact " + csv_file.string());
  }
  std::ifstream csv_in(csv_file, std::ios::binary);
  const ParsedTraceCsv csv = ReadTraceCsv(csv_in);
  const TraceDocument doc = TraceDocumentFromJson(ReadArtifact(dir / "trace.json"));
  const int n = payoff.num_policies();
  if (doc.num_policies != n || doc.num_mdps != payoff.num_mdps()) {
    report.Fail("trace_consistency", "trace shape does not match the problem");
    return;
  }
  if (csv.rows.size() != doc.rounds.size()) {
    report.Fail("trace_consistency",
                "trace.csv has " + std::to_string(csv.rows.size()) +
                    " rows, trace.json has " + std::to_string(doc.rounds.size()));
    return;
  }
  if (csv.with_estimates != estimated) {
    report.Fail("trace_consistency", "trace.csv columns do not match the solver");
    return;
  }

  double max_dev = 0.0;
  bool structural = true;
  std::vector<Segment> segments;
  std::size_t next = 0;
  for (const TraceSegment& info : doc.segments) {
    Segment seg;
    seg.info = info;
    WmaTrace& t = seg.trace;
    t.learning_rate = info.learning_rate;
    t.num_policies = n;
    t.num_mdps = payoff.num_mdps();
    t.expert_totals = Eigen::VectorXd::Zero(n);
    t.expert_abs_totals = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd log_weights = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < info.length; ++k, ++next) {
      if (next >= doc.rounds.size()) {
        structural = false;
        break;
      }
      const TraceRecord& rec = doc.rounds[next];
      const TraceRow& row = csv.rows[next];
      WmaRound r;
      r.distribution = rec.distribution;
      r.belief = Belief(CleanSimplexPoint(rec.belief));
      r.payoff_row = payoff.PolicyPayoffs(r.belief);
      r.update_row = rec.update_row;
      r.sampled_policy = rec.sampled_policy;
      r.expected_payoff = row.expected_payoff;
      r.realized_payoff = r.update_row[r.sampled_policy];

      const Eigen::VectorXd expected_q =
          (log_weights.array() - log_weights.maxCoeff()).exp().matrix();
      max_dev = std::max(max_dev, (expected_q / expected_q.sum() -
                                   r.distribution).cwiseAbs().maxCoeff());
      max_dev = std::max(max_dev, std::abs(row.expected_payoff -
                                           r.payoff_row.dot(r.distribution)));
      if (!estimated) {
        max_dev = std::max(
            max_dev, (r.update_row - r.payoff_row).cwiseAbs().maxCoeff());
      }
      if (row.round != rec.round || row.chosen_policy != rec.sampled_policy ||
          row.chosen_mdp != r.belief.Mode() ||
          (estimated && row.epoch_index != info.epoch)) {
        structural = false;
      }
      for (int i = 0; i < n; ++i) {
        log_weights[i] += std::log1p(t.learning_rate * r.update_row[i]);
      }
      t.algorithm_value += r.expected_payoff;
      t.expert_totals += r.payoff_row;
      t.expert_abs_totals += r.payoff_row.cwiseAbs();
      t.rounds.push_back(std::move(r));
      seg.rows.push_back(&row);
    }
    segments.push_back(std::move(seg));
  }
  if (next != doc.rounds.size()) structural = false;
  if (!structural) {
    report.Fail("trace_consistency",
                "round numbering, sampled policies or epochs disagree");
  } else {
    if (estimated) {
      for (const Segment& seg : segments) {
        const ErrorLedger ledger = ComputeErrorLedger(seg.trace);
        for (std::size_t k = 0; k < seg.rows.size(); ++k) {
          max_dev = std::max(max_dev, std::abs(seg.rows[k]->estimate_error_term -
                                               ledger.per_round[k]));
        }
      }
    }
    report.Check("trace_consistency", kTraceTolerance - max_dev,
                 "max_deviation=" + FormatDouble(max_dev));
  }

  const double log_n = std::log(static_cast<double>(n));
  for (const Segment& seg : segments) {
    if (seg.trace.rounds.empty()) continue;
    const std::string suffix =
        segments.size() > 1 ? "[epoch " + std::to_string(seg.info.epoch) + "]"
                            : "";
    const ErrorLedger ledger = ComputeErrorLedger(seg.trace);
    const std::vector<Eigen::VectorXd> cumulative = ledger.CumulativePerPolicy();
    const std::vector<double> slack =
        RunningGuaranteeSlack(seg.trace, estimated ? &cumulative : nullptr);
    report.Check(estimated ? "approximation_guarantee" + suffix
                           : "multiplicative_weights_guarantee" + suffix,
                 slack.back());

    const int k = seg.trace.num_rounds();
    const double rate = seg.trace.learning_rate;
    const bool tuned =
        n == 1 || std::abs(rate - std::sqrt(log_n / k)) <= 1e-12;
    if (tuned) {
      const RegretBoundCheck check =
          CheckRegretBound(seg.trace, ledger, n, k, rate);
      report.Check("regret_bound" + suffix, check.slack,
                   "regret=" + FormatDouble(check.regret) +
                       " bound=" + FormatDouble(check.bound));
    } else {
      // Any rate: B(K) <= l sum_k |u_i*| + ln N / l + sum_k E_{k,i*}.
      const int best = ArgMaxFirst(seg.trace.expert_totals);
      const double regret =
          seg.trace.expert_totals.maxCoeff() - seg.trace.algorithm_value;
      const double bound = rate * seg.trace.expert_abs_totals[best] +
                           log_n / rate + ledger.TotalFor(best);
      report.Check("regret_bound" + suffix, bound - regret,
                   "regret=" + FormatDouble(regret) + " bound=" +
                       FormatDouble(bound) + " (general rate)");
    }
  }

  if (!estimated) return;
  const json& config = manifest["config"];
  if (config["epochs"].get<int>() > 0) {
    report.Skip("azuma", "(epoch runs restart the rate each epoch)");
    return;
  }
  if (azuma_runs == 0) {
    report.Skip("azuma", "(--azuma-runs 0)");
    return;
  }
  WmaConfig wma;
  wma.rounds = config["rounds"].get<int>();
  wma.learning_rate = config["learning_rate"].get<double>();
  EstimatorConfig est;
  est.samples = config["samples"].get<int>();
  est.mode = ParseMode(config["mode"].get<std::string>());
  est.shared_samples = config["shared_samples"].get<bool>();
  const std::uint64_t seed = config["seed"].get<std::uint64_t>();
  const RestrictedPriorSet* restriction =
      in.restriction ? &*in.restriction : nullptr;
  std::vector<ErrorLedger> ledgers;
  ledgers.reserve(azuma_runs);
  for (int r = 0; r < azuma_runs; ++r) {
    wma.seed = DeriveSeed(seed, static_cast<std::uint64_t>(r) + 1,
                          kAzumaSeedSlot, 0);
    ledgers.push_back(WmaSrRun(in.problem.mdps, in.policies, in.problem.init,
                               wma, est, restriction)
                          .ledger);
  }
  for (double eps : kAzumaEpsilons) {
    const AzumaReport azuma = AzumaCheck(ledgers, wma.rounds, eps);
    std::ostringstream name;
    name << "azuma[eps=" << eps << "]";
    report.Check(name.str(),
                 azuma.empirical_frequency - (azuma.stated_bound - kAzumaSlack),
                 "empirical=" + FormatDouble(azuma.empirical_frequency) +
                     " stated=" + FormatDouble(azuma.stated_bound));
  }
}

int VerifyImpl(const VerifyOptions& opt, std::ostream& out) {
  if (opt.azuma_runs != 0 && opt.azuma_runs < kMinAzumaRuns) {
    throw InvalidInputError("--azuma-runs",
                            "need 0 or at least " + std::to_string(kMinAzumaRuns));
  }
  const json manifest = ReadArtifact(opt.out / "manifest.json");
  const json solution_doc = ReadArtifact(opt.out / "solution.json");
  const std::string solver = manifest.at("solver").get<std::string>();
  const Inputs in = LoadInputs(manifest.at("problem").get<std::string>(),
                               PathField(manifest, "policies"),
                               PathField(manifest, "restriction"),
                               manifest.at("policy_cap").get<std::uint64_t>());
  const RestrictedPriorSet* restriction =
      in.restriction ? &*in.restriction : nullptr;
  const PayoffMatrix payoff =
      BuildPayoffMatrix(in.problem.mdps, in.policies, in.problem.init);

  GameSolution solution;
  solution.value = solution_doc.at("value").get<double>();
  solution.policy_distribution = JsonVector(solution_doc.at("policy_distribution"));
  solution.belief = Belief(CleanSimplexPoint(JsonVector(solution_doc.at("belief"))));
  solution.method = solution_doc.at("method").get<std::string>();
  if (solution.policy_distribution.size() != payoff.num_policies() ||
      solution.belief.size() != payoff.num_mdps()) {
    throw InvalidInputError("$.policy_distribution",
                            "solution shape does not match the problem");
  }

  Report report(out);
  const Eigen::VectorXd& q = solution.policy_distribution;
  const Eigen::VectorXd& xi = solution.belief.probs();
  if (solver == "exact") {
    const double gap = Gap(payoff, q, xi, restriction);
    report.Check("duality_gap", kDualityTolerance - gap,
                 "gap=" + FormatDouble(gap));
    CheckOracle(report, in, solution, true);
  } else if (solver == "fictitious") {
    const double lower = payoff.MdpPayoffs(q).minCoeff();
    const double upper = payoff.PolicyPayoffs(solution.belief).maxCoeff();
    report.Check("fictitious_play_bracket",
                 std::min(solution.value - lower, upper - solution.value) +
                     kOracleTolerance,
                 "lower=" + FormatDouble(lower) + " upper=" + FormatDouble(upper));
    CheckOracle(report, in, solution, true);
  } else if (solver == "wma" || solver == "wma-sr") {
    VerifyWeightedMajority(report, manifest, in, payoff, opt.out,
                           opt.azuma_runs);
    CheckOracle(report, in, solution, solver == "wma");
  } else {
    throw InvalidInputError("$.solver", "unknown solver '" + solver + "'");
  }
  out << (report.all_hold() ? "all " + std::to_string(report.checked()) +
                                  " checks hold"
                            : std::string("some checks are violated"))
      << '\n';
  return report.all_hold() ? kOk : kVerifyViolation;
}

}  // namespace

int RunSolve(const SolveOptions& options, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&] { return SolveImpl(options, out); });
}

int RunEnumerate(const EnumerateOptions& options, std::ostream& out,
                 std::ostream& err) {
  return Guarded(err, [&] {
    if (options.states < 1) throw InvalidInputError("--states", "must be >= 1");
    if (options.actions < 1) throw InvalidInputError("--actions", "must be >= 1");
    const PolicySet policies =
        EnumeratePolicies(options.states, options.actions, options.policy_cap);
    if (options.out.has_parent_path()) {
      fs::create_directories(options.out.parent_path());
    }
    WriteJsonFile(options.out, PolicySetToJson(policies));
    out << "policies=" << policies.size() << '\n';
    return static_cast<int>(kOk);
  });
}

int RunVerify(const VerifyOptions& options, std::ostream& out,
              std::ostream& err) {
  return Guarded(err, [&] { return VerifyImpl(options, out); });
}

}  // namespace minimax_bayes::cli
