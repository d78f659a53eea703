#include "minimax_bayes/wma.h"

#include <cmath>
#include <sstream>

#include "minimax_bayes/rng.h"

namespace minimax_bayes {
namespace {

// Stream slot for the decision maker's policy draw.
constexpr std::uint64_t kPolicyDrawSlot = 0xD1CE;

Eigen::VectorXd DistributionFromLogWeights(const Eigen::VectorXd& log_weights) {
  const double top = log_weights.maxCoeff();
  Eigen::VectorXd q = (log_weights.array() - top).exp();
  return q / q.sum();
}

int SampleIndex(const Eigen::VectorXd& q, SplitMix64& rng) {
  const double u = rng.Uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i + 1 < q.size(); ++i) {
    acc += q[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(q.size() - 1);
}

}  // namespace

double DefaultLearningRate(int num_policies, int rounds) {
  if (num_policies <= 1) return 0.5;
  return std::min(0.5, std::sqrt(std::log(static_cast<double>(num_policies)) /
                                 static_cast<double>(rounds)));
}

double ResolveLearningRate(const WmaConfig& config, int num_policies) {
  if (config.rounds < 1) {
    throw InvalidInputError("rounds", "need at least one round");
  }
  const double rate = config.learning_rate.value_or(
      DefaultLearningRate(num_policies, config.rounds));
  if (!(rate > 0.0 && rate <= 0.5)) {
    std::ostringstream msg;
    msg << "learning rate " << rate << " outside (0, 1/2]";
    throw InvalidInputError("learning_rate", msg.str());
  }
  return rate;
}

double WmaTrace::AveragePayoff() const {
  return rounds.empty() ? 0.0 : algorithm_value / num_rounds();
}

Eigen::VectorXd WmaTrace::AverageDistribution() const {
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(num_policies);
  for (const WmaRound& r : rounds) avg += r.distribution;
  return rounds.empty() ? avg : Eigen::VectorXd(avg / num_rounds());
}

Eigen::VectorXd WmaTrace::AverageBelief() const {
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(num_mdps);
  for (const WmaRound& r : rounds) avg += r.belief.probs();
  return rounds.empty() ? avg : Eigen::VectorXd(avg / num_rounds());
}

namespace internal {

WmaTrace RunWeightedMajority(const PayoffMatrix& exact, double learning_rate,
                             int rounds, std::uint64_t seed,
                             const NatureResponse& nature,
                             const UpdateRowFn& update_row,
                             std::int64_t round_offset) {
  const int n = exact.num_policies();
  WmaTrace trace;
  trace.learning_rate = learning_rate;
  trace.num_policies = n;
  trace.num_mdps = exact.num_mdps();
  trace.expert_totals = Eigen::VectorXd::Zero(n);
  trace.expert_abs_totals = Eigen::VectorXd::Zero(n);
  trace.rounds.reserve(rounds);

  Eigen::VectorXd log_weights = Eigen::VectorXd::Zero(n);
  for (int k = 1; k <= rounds; ++k) {
    const std::int64_t global_round = round_offset + k;
    WmaRound round;
    round.log_weights = log_weights;
    round.distribution = DistributionFromLogWeights(log_weights);
    SplitMix64 rng(DeriveSeed(seed, static_cast<std::uint64_t>(global_round),
                              kPolicyDrawSlot, 0));
    round.sampled_policy = SampleIndex(round.distribution, rng);
    round.belief = nature(round.distribution);
    round.payoff_row = exact.PolicyPayoffs(round.belief);
    round.update_row = update_row(round.belief, global_round);
    round.realized_payoff = round.update_row[round.sampled_policy];
    round.expected_payoff = round.payoff_row.dot(round.distribution);

    trace.algorithm_value += round.expected_payoff;
    trace.expert_totals += round.payoff_row;
    trace.expert_abs_totals += round.payoff_row.cwiseAbs();

    for (int i = 0; i < n; ++i) {
      log_weights[i] += std::log1p(learning_rate * round.update_row[i]);
    }
    trace.rounds.push_back(std::move(round));
  }
  return trace;
}

}  // namespace internal

WmaTrace WmaRun(const PayoffMatrix& payoff, const WmaConfig& config,
                const RestrictedPriorSet* restriction) {
  const double rate = ResolveLearningRate(config, payoff.num_policies());
  NatureResponse nature;
  if (restriction != nullptr) {
    nature = [&](const Eigen::VectorXd& q) {
      return NatureBestResponseConstrained(q, payoff, *restriction);
    };
  } else {
    nature = [&](const Eigen::VectorXd& q) {
      return NatureBestResponse(q, payoff);
    };
  }
  return internal::RunWeightedMajority(
      payoff, rate, config.rounds, config.seed, nature,
      [&](const Belief& belief, std::int64_t) {
        return payoff.PolicyPayoffs(belief);
      });
}

GuaranteeCheck WmaGuaranteeCheck(const WmaTrace& trace,
                                 const Eigen::VectorXd& comparison,
                                 double learning_rate) {
  if (comparison.size() != trace.num_policies) {
    throw InvalidInputError("comparison",
                            "length does not match the policy count");
  }
  ValidateProbabilityVector(comparison, "comparison");
  const double log_n = std::log(static_cast<double>(trace.num_policies));
  const double rhs =
      (trace.expert_totals - learning_rate * trace.expert_abs_totals)
          .dot(comparison) -
      log_n / learning_rate;
  GuaranteeCheck check;
  check.slack = trace.algorithm_value - rhs;
  check.holds = trace.algorithm_value >= rhs;
  return check;
}

std::vector<double> RunningGuaranteeSlack(
    const WmaTrace& trace,
    const std::vector<Eigen::VectorXd>* cumulative_errors) {
  const double rate = trace.learning_rate;
  const double log_n = std::log(static_cast<double>(trace.num_policies));
  Eigen::VectorXd totals = Eigen::VectorXd::Zero(trace.num_policies);
  Eigen::VectorXd abs_totals = Eigen::VectorXd::Zero(trace.num_policies);
  double value = 0.0;
  std::vector<double> slack;
  slack.reserve(trace.rounds.size());
  for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
    const WmaRound& r = trace.rounds[k];
    value += r.expected_payoff;
    totals += r.payoff_row;
    abs_totals += r.payoff_row.cwiseAbs();
    Eigen::VectorXd rhs = totals - rate * abs_totals;
    if (cumulative_errors != nullptr) rhs -= (*cumulative_errors)[k];
    slack.push_back(value - rhs.maxCoeff() + log_n / rate);
  }
  return slack;
}

}  // namespace minimax_bayes
