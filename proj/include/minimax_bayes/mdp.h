#ifndef MINIMAX_BAYES_MDP_H_
#define MINIMAX_BAYES_MDP_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "minimax_bayes/common.h"
#include "minimax_bayes/rng.h"

namespace minimax_bayes {

// Truncation error target for truncated-discounted rollouts.
inline constexpr double kTruncationEpsilon = 1e-6;

// Finite MDP with state-only rewards and a discount factor. The discount also
// defines the continuation probability of the geometric horizon.
class Mdp {
 public:
  // kernels[a] is the |S| x |S| row-stochastic matrix of action a.
  Mdp(std::vector<Eigen::MatrixXd> kernels, Eigen::VectorXd rewards,
      double discount);

  // transitions[s][a] is the next-state distribution for (s, a).
  static Mdp FromNested(
      const std::vector<std::vector<std::vector<double>>>& transitions,
      const std::vector<double>& rewards, double discount);

  int num_states() const { return static_cast<int>(rewards_.size()); }
  int num_actions() const { return static_cast<int>(kernels_.size()); }
  double discount() const { return discount_; }
  const Eigen::VectorXd& rewards() const { return rewards_; }
  const Eigen::MatrixXd& kernel(int action) const { return kernels_[action]; }
  double transition(int state, int action, int next) const {
    return kernels_[action](state, next);
  }

  Mdp WithRewards(Eigen::VectorXd rewards) const;

  bool operator==(const Mdp& other) const;

 private:
  std::vector<Eigen::MatrixXd> kernels_;
  Eigen::VectorXd rewards_;
  double discount_;
};

// Memoryless deterministic policy: one action per state.
class DeterministicPolicy {
 public:
  explicit DeterministicPolicy(std::vector<int> action_of);

  int num_states() const { return static_cast<int>(action_of_.size()); }
  int action(int state) const { return action_of_[state]; }
  const std::vector<int>& actions() const { return action_of_; }

  // Throws InvalidInputError if the policy does not fit the MDP.
  void CheckCompatible(const Mdp& mdp) const;

  auto operator<=>(const DeterministicPolicy&) const = default;

 private:
  std::vector<int> action_of_;
};

// Row s is the next-state distribution under the policy's action at s.
Eigen::MatrixXd InducedChain(const Mdp& mdp, const DeterministicPolicy& policy);

// Solves (I - gamma P) V = rho by dense LU.
Eigen::VectorXd PolicyValue(const Mdp& mdp, const DeterministicPolicy& policy);

// init^T V.
double Utility(const Mdp& mdp, const DeterministicPolicy& policy,
               const StateDistribution& init);

// sum_m belief[m] * Utility(mdps[m], policy, init).
double BeliefUtility(std::span<const Mdp> mdps, const Belief& belief,
                     const DeterministicPolicy& policy,
                     const StateDistribution& init);

enum class RolloutMode {
  // Horizon T ~ Geometric(1 - gamma), undiscounted sum of T rewards.
  kGeometric,
  // Fixed horizon TruncationHorizon(gamma), discounted sum.
  kTruncatedDiscounted,
};

struct RolloutSample {
  double total_reward = 0.0;
  int horizon_used = 0;
  bool truncated = false;
};

// ceil(ln(epsilon (1 - gamma)) / ln gamma), at least 1.
int TruncationHorizon(double gamma, double epsilon = kTruncationEpsilon);

// Precomputed sampling tables for one (MDP, policy, start distribution)
// triple. Sample() is the hot loop of every Monte Carlo estimate.
class RolloutSampler {
 public:
  RolloutSampler(const Mdp& mdp, const DeterministicPolicy& policy,
                 const StateDistribution& init);

  RolloutSample Sample(RolloutMode mode, SplitMix64& rng) const;

  double SampleReturn(RolloutMode mode, SplitMix64& rng) const {
    return Sample(mode, rng).total_reward;
  }

 private:
  int SampleRow(const double* cdf, SplitMix64& rng) const;

  int num_states_;
  double discount_;
  int horizon_;
  std::vector<double> rewards_;
  std::vector<double> init_cdf_;
  std::vector<double> next_cdf_;  // row-major |S| x |S|
};

// One rollout from a stream seeded with `seed`.
RolloutSample Rollout(const Mdp& mdp, const DeterministicPolicy& policy,
                      const StateDistribution& init, RolloutMode mode,
                      std::uint64_t seed);

// Utility error bound for an MDP whose kernel rows and rewards are within
// epsilon of a grid point: epsilon / (1 - gamma)^2.
double DiscretizationBound(double epsilon, double gamma);

// Rescales every MDP's rewards by (1 - gamma) / max(1, max |rho|), the max
// taken over the whole set, so every return lies in [-1, 1]. Returns the
// factor applied; divide a normalized utility by it to recover raw units.
double NormalizeRewards(std::vector<Mdp>& mdps);

// The factor NormalizeRewards would apply, without modifying anything.
double RewardScale(std::span<const Mdp> mdps);

}  // namespace minimax_bayes

#endif  // MINIMAX_BAYES_MDP_H_
