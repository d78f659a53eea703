#ifndef MINIMAX_BAYES_WMA_SR_H_
#define MINIMAX_BAYES_WMA_SR_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "minimax_bayes/game.h"
#include "minimax_bayes/mdp.h"
#include "minimax_bayes/policy_space.h"
#include "minimax_bayes/wma.h"

namespace minimax_bayes {

struct EstimatorConfig {
  int samples = 64;  // S, rollouts per policy per round
  RolloutMode mode = RolloutMode::kTruncatedDiscounted;
  // Common random numbers: sample j of a round uses the same stream (hence
  // the same sampled MDP and the same uniforms) for every policy.
  bool shared_samples = true;
  int threads = 0;  // 0 = MINIMAX_BAYES_THREADS / hardware default
};

// Mean of S draws of (mu ~ belief, rollout return under `policy`).
double McEstimate(std::span<const Mdp> mdps, const Belief& belief,
                  const DeterministicPolicy& policy,
                  const StateDistribution& init, int samples,
                  std::uint64_t seed,
                  RolloutMode mode = RolloutMode::kTruncatedDiscounted);

// Source of the payoff estimates WMA-SR works with.
class PayoffEstimator {
 public:
  virtual ~PayoffEstimator() = default;

  // Estimate of u_xi for every policy, used in the weight update of round
  // `round`.
  virtual Eigen::VectorXd EstimateRow(const Belief& belief,
                                      std::int64_t round) = 0;

  // N x M payoff table nature best-responds against.
  virtual Eigen::MatrixXd NatureView() const = 0;

  // Estimates clamped into [-1, 1] so far.
  virtual std::int64_t clamp_count() const { return 0; }
};

// Monte Carlo estimator with pooled running means per (policy, MDP) pair.
// Construction runs one S-sample pass over every pair so nature has an
// estimate of each column before round 1; every later round's samples feed
// the pool as well.
class MonteCarloEstimator : public PayoffEstimator {
 public:
  MonteCarloEstimator(std::span<const Mdp> mdps, const PolicySet& policies,
                      const StateDistribution& init, EstimatorConfig config,
                      std::uint64_t seed);

  Eigen::VectorXd EstimateRow(const Belief& belief,
                              std::int64_t round) override;
  Eigen::MatrixXd NatureView() const override { return PooledEstimates(); }
  std::int64_t clamp_count() const override { return clamp_count_; }

  Eigen::MatrixXd PooledEstimates() const;
  const Eigen::MatrixXd& sample_counts() const { return counts_; }
  const EstimatorConfig& config() const { return config_; }

 private:
  const RolloutSampler& sampler(int policy, int mdp) const {
    return samplers_[static_cast<std::size_t>(policy) * num_mdps_ + mdp];
  }

  int num_policies_;
  int num_mdps_;
  EstimatorConfig config_;
  std::uint64_t master_;
  std::vector<RolloutSampler> samplers_;
  Eigen::MatrixXd sums_;
  Eigen::MatrixXd counts_;
  std::int64_t clamp_count_ = 0;
};

// Returns exact payoffs; the full-information limit of WMA-SR.
class ExactEstimator : public PayoffEstimator {
 public:
  explicit ExactEstimator(const PayoffMatrix& payoff) : payoff_(payoff) {}

  Eigen::VectorXd EstimateRow(const Belief& belief, std::int64_t) override {
    return payoff_.PolicyPayoffs(belief);
  }
  Eigen::MatrixXd NatureView() const override { return payoff_.values(); }

 private:
  const PayoffMatrix& payoff_;
};

// Per-round estimation error terms. For round k and comparator policy i the
// term is |A - A_hat| where
//   A     = u.Q - u_i + l |u_i| + ln N / l       (exact payoffs)
//   A_hat = u_hat.Q - u_hat_i + l |u_hat_i| + ln N / l   (estimates).
// The ln N / l terms cancel; they are kept so the expression reads as stated.
struct ErrorLedger {
  std::vector<Eigen::VectorXd> per_policy;  // [round](policy)
  std::vector<double> per_round;            // max over policies
  double total = 0.0;                       // sum of per_round

  int num_rounds() const { return static_cast<int>(per_round.size()); }
  // Sum over rounds for comparator `policy`.
  double TotalFor(int policy) const;
  // Cumulative per-policy error vector after each round.
  std::vector<Eigen::VectorXd> CumulativePerPolicy() const;
};

ErrorLedger ComputeErrorLedger(const WmaTrace& trace);

struct WmaSrResult {
  WmaTrace trace;
  ErrorLedger ledger;
  std::vector<std::int64_t> cumulative_clamps;  // after each round
};

// WMA with every payoff replaced by an estimate: nature best-responds to the
// estimator's view, the weights update with the round's fresh estimates.
WmaSrResult WmaSrRun(std::span<const Mdp> mdps, const PolicySet& policies,
                     const StateDistribution& init, const WmaConfig& config,
                     const EstimatorConfig& estimator_config,
                     const RestrictedPriorSet* restriction = nullptr);

// Same loop on a caller-supplied estimator. `exact` provides u for the trace
// and the ledger. Rounds are numbered from round_offset + 1.
WmaSrResult WmaSrRunWithEstimator(const PayoffMatrix& exact,
                                  PayoffEstimator& estimator,
                                  double learning_rate, int rounds,
                                  std::uint64_t seed,
                                  const RestrictedPriorSet* restriction = nullptr,
                                  std::int64_t round_offset = 0);

// B(K) = max_i sum_k U(xi_k, pi_i) - sum_k u_{xi_k}.Q_k, with u recomputed
// from `payoff`.
double Regret(const WmaTrace& trace, const PayoffMatrix& payoff);

struct RegretBoundCheck {
  bool holds = false;
  double regret = 0.0;
  double bound = 0.0;  // 2 sqrt(ln N K) + sum_k E_k (hindsight-best comparator)
  double slack = 0.0;  // bound - regret
};

// Requires learning_rate == sqrt(ln N / K) within 1e-12 (any rate when N = 1);
// throws InvalidInputError otherwise.
RegretBoundCheck CheckRegretBound(const WmaTrace& trace,
                                  const ErrorLedger& ledger, int num_policies,
                                  int rounds, double learning_rate);

struct AzumaReport {
  double empirical_frequency = 0.0;
  double stated_bound = 0.0;  // 1 - 2 exp(-K eps^2 / 2)
  bool consistent = false;    // empirical >= stated - 0.1
};

inline constexpr int kMinAzumaRuns = 30;
inline constexpr double kAzumaSlack = 0.1;
inline constexpr double kAzumaClip = 2.0;

// Fraction of runs whose per-round-average error, (1/K) sum_k min(E_k, 2), is
// below epsilon, next to the concentration bound. Needs >= 30 runs.
AzumaReport AzumaCheck(std::span<const ErrorLedger> runs, int rounds,
                       double epsilon);

// Epoch j (1-based) has length j^2.
class EpochSchedule {
 public:
  static std::int64_t Length(int epoch) {
    return static_cast<std::int64_t>(epoch) * epoch;
  }
  // Rounds in epochs 1..count.
  static std::int64_t TotalRounds(int count);
  // 1-based epoch and 0-based offset of a 1-based global round.
  static std::pair<int, std::int64_t> Locate(std::int64_t global_round);
};

struct EpochResult {
  int epoch = 0;
  int length = 0;
  double learning_rate = 0.0;
  WmaSrResult run;
  double average_regret = 0.0;   // B(T_j) / T_j on exact payoffs
  double average_payoff = 0.0;   // (1/T_j) sum u.Q
};

// Runs WMA-SR in epochs of length j^2 with weights restarted and the rate
// reset to sqrt(ln N / T_j) (capped at 1/2) each epoch. The estimator, and so
// the pooled estimates nature sees, persists across epochs. config.rounds and
// config.learning_rate are ignored.
std::vector<EpochResult> EpochRunner(std::span<const Mdp> mdps,
                                     const PolicySet& policies,
                                     const StateDistribution& init,
                                     const WmaConfig& config,
                                     const EstimatorConfig& estimator_config,
                                     int num_epochs,
                                     const RestrictedPriorSet* restriction =
                                         nullptr);

}  // namespace minimax_bayes

#endif  // MINIMAX_BAYES_WMA_SR_H_
