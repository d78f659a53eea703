#ifndef MINIMAX_BAYES_WMA_H_
#define MINIMAX_BAYES_WMA_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "minimax_bayes/common.h"
#include "minimax_bayes/game.h"
#include "minimax_bayes/policy_space.h"

namespace minimax_bayes {

struct WmaConfig {
  // Unset means DefaultLearningRate(N, rounds).
  std::optional<double> learning_rate;
  int rounds = 1;
  std::uint64_t seed = 0;
};

// sqrt(ln N / K) capped at 1/2. A single expert has nothing to learn; it gets
// 1/2 so the rate stays positive.
double DefaultLearningRate(int num_policies, int rounds);

// Resolves the optional rate and validates 0 < rate <= 1/2, rounds >= 1.
double ResolveLearningRate(const WmaConfig& config, int num_policies);

struct WmaRound {
  // Weights are stored as logarithms: after many rounds of (1 + l u) factors
  // the raw weights underflow double precision long before they reach zero.
  Eigen::VectorXd log_weights;
  Eigen::VectorXd distribution;  // Q_k
  Belief belief = Belief::PointMass(1, 0);  // xi_k
  Eigen::VectorXd payoff_row;  // exact u_{xi_k}
  Eigen::VectorXd update_row;  // payoffs used in the weight update
  int sampled_policy = 0;
  double realized_payoff = 0.0;  // update_row[sampled_policy]
  double expected_payoff = 0.0;  // u_{xi_k} . Q_k
};

struct WmaTrace {
  double learning_rate = 0.0;
  int num_policies = 0;
  int num_mdps = 0;
  std::vector<WmaRound> rounds;
  double algorithm_value = 0.0;         // sum_k u_{xi_k} . Q_k
  Eigen::VectorXd expert_totals;        // sum_k u_{xi_k}
  Eigen::VectorXd expert_abs_totals;    // sum_k |u_{xi_k}|

  int num_rounds() const { return static_cast<int>(rounds.size()); }
  double AveragePayoff() const;
  Eigen::VectorXd AverageDistribution() const;  // Q bar
  Eigen::VectorXd AverageBelief() const;        // xi bar
};

// How nature answers a distribution over policies.
using NatureResponse = std::function<Belief(const Eigen::VectorXd& q)>;

// Full-information weighted majority: Q_k = w_k / sum w, nature best-responds
// to Q_k, weights update by (1 + l U(xi_k, pi_i)). With a restriction nature
// answers from the restricted prior set.
WmaTrace WmaRun(const PayoffMatrix& payoff, const WmaConfig& config,
                const RestrictedPriorSet* restriction = nullptr);

struct GuaranteeCheck {
  bool holds = false;
  // Left side minus right side; nonnegative exactly when the bound holds.
  double slack = 0.0;
};

// V >= sum_k (u_{xi_k} - l |u_{xi_k}|) . P - ln N / l, with V the expected
// algorithm payoff from the trace. Exact; no tolerance.
GuaranteeCheck WmaGuaranteeCheck(const WmaTrace& trace,
                                 const Eigen::VectorXd& comparison,
                                 double learning_rate);

// Tightest (minimum-slack) vertex comparator of WmaGuaranteeCheck after each
// prefix of rounds. `extra_error`, when given, is subtracted per expert
// (the error-term form of the bound); entry k is the cumulative error vector
// after round k.
std::vector<double> RunningGuaranteeSlack(
    const WmaTrace& trace,
    const std::vector<Eigen::VectorXd>* cumulative_errors = nullptr);

namespace internal {

// Payoffs used in the weight update for round `round` (1-based) under xi.
using UpdateRowFn =
    std::function<Eigen::VectorXd(const Belief& belief, std::int64_t round)>;

// Shared loop of WMA and WMA-SR. `exact` supplies u_{xi_k} for the trace;
// `nature` and `update_row` supply what the two players actually see.
// Round numbers passed to update_row start at round_offset + 1.
WmaTrace RunWeightedMajority(const PayoffMatrix& exact, double learning_rate,
                             int rounds, std::uint64_t seed,
                             const NatureResponse& nature,
                             const UpdateRowFn& update_row,
                             std::int64_t round_offset = 0);

}  // namespace internal

}  // namespace minimax_bayes

#endif  // MINIMAX_BAYES_WMA_H_
