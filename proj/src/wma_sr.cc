#include "minimax_bayes/wma_sr.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "minimax_bayes/rng.h"

namespace minimax_bayes {
namespace {

constexpr std::uint64_t kEstimatorTag = 0xE571A7E5ULL;

std::vector<double> Cdf(const Eigen::VectorXd& probs) {
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (Eigen::Index m = 0; m < probs.size(); ++m) cdf[m] = (acc += probs[m]);
  cdf.back() = 1.0;
  return cdf;
}

int SampleFromCdf(const std::vector<double>& cdf, SplitMix64& rng) {
  const double u = rng.Uniform();
  int m = 0;
  const int last = static_cast<int>(cdf.size()) - 1;
  while (m < last && u >= cdf[m]) ++m;
  return m;
}

}  // namespace

double McEstimate(std::span<const Mdp> mdps, const Belief& belief,
                  const DeterministicPolicy& policy,
                  const StateDistribution& init, int samples,
                  std::uint64_t seed, RolloutMode mode) {
  if (samples < 1) throw InvalidInputError("samples", "need S >= 1");
  if (belief.size() != static_cast<int>(mdps.size())) {
    throw InvalidInputError("belief", "length does not match the MDP count");
  }
  std::vector<RolloutSampler> samplers;
  samplers.reserve(mdps.size());
  for (const Mdp& mdp : mdps) samplers.emplace_back(mdp, policy, init);
  const std::vector<double> cdf = Cdf(belief.probs());
  double total = 0.0;
  for (int j = 0; j < samples; ++j) {
    SplitMix64 rng(DeriveSeed(seed, 0, 0, static_cast<std::uint64_t>(j)));
    const int m = SampleFromCdf(cdf, rng);
    total += samplers[m].SampleReturn(mode, rng);
  }
  return total / samples;
}

MonteCarloEstimator::MonteCarloEstimator(std::span<const Mdp> mdps,
                                         const PolicySet& policies,
                                         const StateDistribution& init,
                                         EstimatorConfig config,
                                         std::uint64_t seed)
    : num_policies_(policies.size()),
      num_mdps_(static_cast<int>(mdps.size())),
      config_(config),
      master_(DeriveSeed(seed, 0, kEstimatorTag, 0)),
      sums_(Eigen::MatrixXd::Zero(policies.size(),
                                  static_cast<Eigen::Index>(mdps.size()))),
      counts_(Eigen::MatrixXd::Zero(policies.size(),
                                    static_cast<Eigen::Index>(mdps.size()))) {
  if (config_.samples < 1) throw InvalidInputError("samples", "need S >= 1");
  if (mdps.empty()) throw InvalidInputError("mdps", "no MDPs");
  samplers_.reserve(static_cast<std::size_t>(num_policies_) * num_mdps_);
  for (int i = 0; i < num_policies_; ++i) {
    for (int m = 0; m < num_mdps_; ++m) {
      samplers_.emplace_back(mdps[m], policies[i], init);
    }
  }
  // Round 0: one S-sample pass over every (policy, MDP) pair.
  ParallelFor(
      static_cast<std::size_t>(num_policies_),
      [&](std::size_t idx) {
        const int i = static_cast<int>(idx);
        for (int m = 0; m < num_mdps_; ++m) {
          const std::uint64_t slot =
              config_.shared_samples
                  ? static_cast<std::uint64_t>(m)
                  : static_cast<std::uint64_t>(i + 1) * num_mdps_ + m;
          double total = 0.0;
          for (int j = 0; j < config_.samples; ++j) {
            SplitMix64 rng(DeriveSeed(master_, 0, slot,
                                      static_cast<std::uint64_t>(j)));
            rng();  // keep stream layout identical to round draws
            total += sampler(i, m).SampleReturn(config_.mode, rng);
          }
          sums_(i, m) = total;
          counts_(i, m) = config_.samples;
        }
      },
      config_.threads);
}

Eigen::VectorXd MonteCarloEstimator::EstimateRow(const Belief& belief,
                                                 std::int64_t round) {
  if (belief.size() != num_mdps_) {
    throw InvalidInputError("belief", "length does not match the MDP count");
  }
  if (round < 1) throw InvalidInputError("round", "rounds start at 1");
  const std::vector<double> cdf = Cdf(belief.probs());
  const int s_count = config_.samples;
  Eigen::VectorXd row(num_policies_);
  Eigen::MatrixXd round_sums = Eigen::MatrixXd::Zero(num_policies_, num_mdps_);
  Eigen::MatrixXd round_counts = Eigen::MatrixXd::Zero(num_policies_, num_mdps_);
  ParallelFor(
      static_cast<std::size_t>(num_policies_),
      [&](std::size_t idx) {
        const int i = static_cast<int>(idx);
        const std::uint64_t slot =
            config_.shared_samples ? 0 : static_cast<std::uint64_t>(i + 1);
        double total = 0.0;
        for (int j = 0; j < s_count; ++j) {
          SplitMix64 rng(DeriveSeed(master_, static_cast<std::uint64_t>(round),
                                    slot, static_cast<std::uint64_t>(j)));
          const int m = SampleFromCdf(cdf, rng);
          const double x = sampler(i, m).SampleReturn(config_.mode, rng);
          total += x;
          round_sums(i, m) += x;
          round_counts(i, m) += 1.0;
        }
        row[i] = total / s_count;
      },
      config_.threads);
  sums_ += round_sums;
  counts_ += round_counts;
  for (int i = 0; i < num_policies_; ++i) {
    if (row[i] > 1.0 || row[i] < -1.0) {
      row[i] = std::clamp(row[i], -1.0, 1.0);
      ++clamp_count_;
    }
  }
  return row;
}

Eigen::MatrixXd MonteCarloEstimator::PooledEstimates() const {
  return sums_.cwiseQuotient(counts_);
}

double ErrorLedger::TotalFor(int policy) const {
  double sum = 0.0;
  for (const Eigen::VectorXd& e : per_policy) sum += e[policy];
  return sum;
}

std::vector<Eigen::VectorXd> ErrorLedger::CumulativePerPolicy() const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(per_policy.size());
  for (const Eigen::VectorXd& e : per_policy) {
    out.push_back(out.empty() ? e : Eigen::VectorXd(out.back() + e));
  }
  return out;
}

ErrorLedger ComputeErrorLedger(const WmaTrace& trace) {
  const double rate = trace.learning_rate;
  const double log_n_over_rate =
      std::log(static_cast<double>(trace.num_policies)) / rate;
  ErrorLedger ledger;
  ledger.per_policy.reserve(trace.rounds.size());
  ledger.per_round.reserve(trace.rounds.size());
  for (const WmaRound& r : trace.rounds) {
    const Eigen::VectorXd& u = r.payoff_row;
    const Eigen::VectorXd& u_hat = r.update_row;
    const double mixed = u.dot(r.distribution);
    const double mixed_hat = u_hat.dot(r.distribution);
    const Eigen::ArrayXd exact_side =
        mixed - u.array() + rate * u.array().abs() + log_n_over_rate;
    const Eigen::ArrayXd estimate_side =
        mixed_hat - u_hat.array() + rate * u_hat.array().abs() + log_n_over_rate;
    Eigen::VectorXd err = (exact_side - estimate_side).abs().matrix();
    ledger.per_round.push_back(err.maxCoeff());
    ledger.total += ledger.per_round.back();
    ledger.per_policy.push_back(std::move(err));
  }
  return ledger;
}

WmaSrResult WmaSrRunWithEstimator(const PayoffMatrix& exact,
                                  PayoffEstimator& estimator,
                                  double learning_rate, int rounds,
                                  std::uint64_t seed,
                                  const RestrictedPriorSet* restriction,
                                  std::int64_t round_offset) {
  WmaConfig check;
  check.learning_rate = learning_rate;
  check.rounds = rounds;
  ResolveLearningRate(check, exact.num_policies());

  NatureResponse nature = [&](const Eigen::VectorXd& q) {
    const Eigen::MatrixXd view = estimator.NatureView();
    return restriction != nullptr
               ? NatureBestResponseConstrained(q, view, *restriction)
               : NatureBestResponse(q, view);
  };
  WmaSrResult result;
  result.cumulative_clamps.reserve(rounds);
  result.trace = internal::RunWeightedMajority(
      exact, learning_rate, rounds, seed, nature,
      [&](const Belief& belief, std::int64_t round) {
        Eigen::VectorXd row = estimator.EstimateRow(belief, round);
        result.cumulative_clamps.push_back(estimator.clamp_count());
        return row;
      },
      round_offset);
  result.ledger = ComputeErrorLedger(result.trace);
  return result;
}

WmaSrResult WmaSrRun(std::span<const Mdp> mdps, const PolicySet& policies,
                     const StateDistribution& init, const WmaConfig& config,
                     const EstimatorConfig& estimator_config,
                     const RestrictedPriorSet* restriction) {
  const double rate = ResolveLearningRate(config, policies.size());
  const PayoffMatrix exact =
      BuildPayoffMatrix(mdps, policies, init, estimator_config.threads);
  MonteCarloEstimator estimator(mdps, policies, init, estimator_config,
                                config.seed);
  return WmaSrRunWithEstimator(exact, estimator, rate, config.rounds,
                               config.seed, restriction);
}

double Regret(const WmaTrace& trace, const PayoffMatrix& payoff) {
  if (payoff.num_policies() != trace.num_policies ||
      payoff.num_mdps() != trace.num_mdps) {
    throw InvalidInputError("payoff", "shape does not match the trace");
  }
  Eigen::VectorXd totals = Eigen::VectorXd::Zero(trace.num_policies);
  double algorithm = 0.0;
  for (const WmaRound& r : trace.rounds) {
    const Eigen::VectorXd u = payoff.PolicyPayoffs(r.belief);
    totals += u;
    algorithm += u.dot(r.distribution);
  }
  return totals.maxCoeff() - algorithm;
}

RegretBoundCheck CheckRegretBound(const WmaTrace& trace,
                                  const ErrorLedger& ledger, int num_policies,
                                  int rounds, double learning_rate) {
  if (trace.num_policies != num_policies || trace.num_rounds() != rounds ||
      ledger.num_rounds() != rounds) {
    throw InvalidInputError("trace", "trace and ledger do not match N and K");
  }
  const double log_n = std::log(static_cast<double>(num_policies));
  const double expected_rate = std::sqrt(log_n / rounds);
  if (num_policies > 1 && std::abs(learning_rate - expected_rate) > 1e-12) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "regret bound requires learning rate sqrt(ln N / K) = "
        << expected_rate << ", got " << learning_rate;
    throw InvalidInputError("learning_rate", msg.str());
  }
  const int best = ArgMaxFirst(trace.expert_totals);
  RegretBoundCheck check;
  check.regret = trace.expert_totals.maxCoeff() - trace.algorithm_value;
  check.bound = 2.0 * std::sqrt(log_n * rounds) + ledger.TotalFor(best);
  check.slack = check.bound - check.regret;
  check.holds = check.regret <= check.bound;
  return check;
}

AzumaReport AzumaCheck(std::span<const ErrorLedger> runs, int rounds,
                       double epsilon) {
  if (static_cast<int>(runs.size()) < kMinAzumaRuns) {
    throw InvalidInputError("runs", "need at least " +
                                        std::to_string(kMinAzumaRuns) +
                                        " runs, got " +
                                        std::to_string(runs.size()));
  }
  if (rounds < 1) throw InvalidInputError("rounds", "need K >= 1");
  int below = 0;
  for (const ErrorLedger& ledger : runs) {
    if (ledger.num_rounds() != rounds) {
      throw InvalidInputError("runs", "ledger length does not match K");
    }
    double sum = 0.0;
    for (double e : ledger.per_round) sum += std::min(e, kAzumaClip);
    if (sum / rounds < epsilon) ++below;
  }
  AzumaReport report;
  report.empirical_frequency = static_cast<double>(below) / runs.size();
  report.stated_bound = 1.0 - 2.0 * std::exp(-rounds * epsilon * epsilon / 2.0);
  report.consistent =
      report.empirical_frequency >= report.stated_bound - kAzumaSlack;
  return report;
}

std::int64_t EpochSchedule::TotalRounds(int count) {
  std::int64_t total = 0;
  for (int j = 1; j <= count; ++j) total += Length(j);
  return total;
}

std::pair<int, std::int64_t> EpochSchedule::Locate(std::int64_t global_round) {
  if (global_round < 1) throw InvalidInputError("round", "rounds start at 1");
  int epoch = 1;
  std::int64_t start = 1;
  while (global_round >= start + Length(epoch)) {
    start += Length(epoch);
    ++epoch;
  }
  return {epoch, global_round - start};
}

std::vector<EpochResult> EpochRunner(std::span<const Mdp> mdps,
                                     const PolicySet& policies,
                                     const StateDistribution& init,
                                     const WmaConfig& config,
                                     const EstimatorConfig& estimator_config,
                                     int num_epochs,
                                     const RestrictedPriorSet* restriction) {
  if (num_epochs < 1) throw InvalidInputError("epochs", "need at least one epoch");
  const PayoffMatrix exact =
      BuildPayoffMatrix(mdps, policies, init, estimator_config.threads);
  MonteCarloEstimator estimator(mdps, policies, init, estimator_config,
                                config.seed);
  std::vector<EpochResult> epochs;
  epochs.reserve(num_epochs);
  std::int64_t offset = 0;
  for (int j = 1; j <= num_epochs; ++j) {
    EpochResult epoch;
    epoch.epoch = j;
    epoch.length = static_cast<int>(EpochSchedule::Length(j));
    epoch.learning_rate = DefaultLearningRate(policies.size(), epoch.length);
    epoch.run = WmaSrRunWithEstimator(exact, estimator, epoch.learning_rate,
                                      epoch.length, config.seed, restriction,
                                      offset);
    epoch.average_regret = Regret(epoch.run.trace, exact) / epoch.length;
    epoch.average_payoff = epoch.run.trace.AveragePayoff();
    offset += epoch.length;
    epochs.push_back(std::move(epoch));
  }
  return epochs;
}

}  // namespace minimax_bayes
