#ifndef MINIMAX_BAYES_POLICY_SPACE_H_
#define MINIMAX_BAYES_POLICY_SPACE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "minimax_bayes/common.h"
#include "minimax_bayes/mdp.h"

namespace minimax_bayes {

inline constexpr std::uint64_t kDefaultPolicyCap = 1ULL << 16;
inline constexpr double kDefaultRestrictionTolerance = 1e-7;

// Ordered, duplicate-free, nonempty list of memoryless deterministic policies
// sharing one state count. These are the experts of the weighted-majority
// solvers.
class PolicySet {
 public:
  explicit PolicySet(std::vector<DeterministicPolicy> policies);

  int size() const { return static_cast<int>(policies_.size()); }
  int num_states() const { return policies_.front().num_states(); }
  const DeterministicPolicy& operator[](int i) const { return policies_[i]; }
  auto begin() const { return policies_.begin(); }
  auto end() const { return policies_.end(); }

  bool operator==(const PolicySet& other) const {
    return policies_ == other.policies_;
  }

 private:
  std::vector<DeterministicPolicy> policies_;
};

// All num_actions^num_states policies, lexicographic in the action map with
// state 0 most significant. Throws CapacityError if the count exceeds `cap`.
PolicySet EnumeratePolicies(int num_states, int num_actions,
                            std::uint64_t cap = kDefaultPolicyCap);

struct BayesOptimum {
  double value = 0.0;
  int index = 0;  // smallest maximizing policy index
};

// Best belief utility within the policy set.
BayesOptimum BayesOptimal(std::span<const Mdp> mdps, const Belief& belief,
                          const PolicySet& policies,
                          const StateDistribution& init);

struct OracleBound {
  double lower = 0.0;  // Bayes-optimal value
  double upper = 0.0;  // expected value when the MDP is revealed
};

OracleBound ComputeOracleBound(std::span<const Mdp> mdps, const Belief& belief,
                               const PolicySet& policies,
                               const StateDistribution& init);

// beta^T (V*_xi - V^pi_xi): regret against the belief's Bayes-optimal policy
// (optimal with respect to beta within the set).
double LossL1(std::span<const Mdp> mdps, const Belief& belief,
              int policy_index, const PolicySet& policies,
              const StateDistribution& beta);

// beta^T E_xi(V*_mu - V^pi_mu): regret against the per-MDP best policy.
double LossL2(std::span<const Mdp> mdps, const Belief& belief,
              int policy_index, const PolicySet& policies,
              const StateDistribution& beta);

// Discounted occupancy (I - gamma P)^{-1} of the policy's chain, as a matrix.
Eigen::MatrixXd OccupancyMatrix(const Mdp& mdp,
                                const DeterministicPolicy& policy);

// Row-major flattening of OccupancyMatrix (k = |S|^2).
Eigen::VectorXd StatisticPhi(const Mdp& mdp, const DeterministicPolicy& policy);

// beta^T OccupancyMatrix (k = |S|), the compact form of the statistic.
Eigen::VectorXd StatisticPhiProjected(const Mdp& mdp,
                                      const DeterministicPolicy& policy,
                                      const StateDistribution& beta);

// Per-MDP best policy index within the set, ranked by utility under `init`.
std::vector<int> PerMdpOptimalPolicies(std::span<const Mdp> mdps,
                                       const PolicySet& policies,
                                       const StateDistribution& init);

// Priors whose expected statistic is within `tolerance` (sup norm) of the
// observed target.
class RestrictedPriorSet {
 public:
  // statistic_values is M x k; row m is the statistic of MDP m.
  RestrictedPriorSet(Eigen::MatrixXd statistic_values, Eigen::VectorXd target,
                     double tolerance = kDefaultRestrictionTolerance);

  // Builds rows from StatisticPhi (or StatisticPhiProjected when `beta` is
  // given) with policy_of_mdp[m] evaluated on MDP m.
  static RestrictedPriorSet FromOccupancy(
      std::span<const Mdp> mdps, const PolicySet& policies,
      const std::vector<int>& policy_of_mdp, Eigen::VectorXd target,
      double tolerance = kDefaultRestrictionTolerance,
      const std::optional<StateDistribution>& beta = std::nullopt);

  const Eigen::MatrixXd& statistic_values() const { return statistic_values_; }
  const Eigen::VectorXd& target() const { return target_; }
  double tolerance() const { return tolerance_; }
  int num_mdps() const { return static_cast<int>(statistic_values_.rows()); }
  int dimension() const { return static_cast<int>(statistic_values_.cols()); }

  // statistic_values^T belief.
  Eigen::VectorXd ExpectedStatistic(const Belief& belief) const;

 private:
  Eigen::MatrixXd statistic_values_;
  Eigen::VectorXd target_;
  double tolerance_;
};

bool RestrictedMembership(const RestrictedPriorSet& set, const Belief& belief);

// Root-mean-square residual of the least-squares affine fit
// losses[m] ~ a0 + a^T statistic_values.row(m). Zero means the losses are an
// affine function of the statistic.
double LinearityResidual(const Eigen::VectorXd& losses,
                         const Eigen::MatrixXd& statistic_values);

}  // namespace minimax_bayes

#endif  // MINIMAX_BAYES_POLICY_SPACE_H_
