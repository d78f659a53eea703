#include "minimax_bayes/policy_space.h"

#include <cmath>
#include <set>
#include <sstream>
#include <string>

namespace minimax_bayes {
namespace {

void CheckBeliefLength(std::span<const Mdp> mdps, const Belief& belief) {
  if (belief.size() != static_cast<int>(mdps.size())) {
    throw InvalidInputError("belief", "length " + std::to_string(belief.size()) +
                                          " does not match " +
                                          std::to_string(mdps.size()) +
                                          " MDPs");
  }
}

// values[m](:, i) = V of policy i on MDP m.
std::vector<Eigen::MatrixXd> AllValues(std::span<const Mdp> mdps,
                                       const PolicySet& policies) {
  std::vector<Eigen::MatrixXd> values;
  values.reserve(mdps.size());
  for (const Mdp& mdp : mdps) {
    Eigen::MatrixXd v(mdp.num_states(), policies.size());
    for (int i = 0; i < policies.size(); ++i) {
      v.col(i) = PolicyValue(mdp, policies[i]);
    }
    values.push_back(std::move(v));
  }
  return values;
}

// Entry (i, m) = utility of policy i on MDP m under `init`.
Eigen::MatrixXd UtilityTable(std::span<const Mdp> mdps,
                             const PolicySet& policies,
                             const StateDistribution& init) {
  Eigen::MatrixXd table(policies.size(), static_cast<Eigen::Index>(mdps.size()));
  for (std::size_t m = 0; m < mdps.size(); ++m) {
    for (int i = 0; i < policies.size(); ++i) {
      table(i, static_cast<Eigen::Index>(m)) =
          Utility(mdps[m], policies[i], init);
    }
  }
  return table;
}

void CheckBeta(std::span<const Mdp> mdps, const StateDistribution& beta) {
  if (!mdps.empty() && beta.size() != mdps.front().num_states()) {
    throw InvalidInputError("beta", "length does not match the state count");
  }
}

}  // namespace

PolicySet::PolicySet(std::vector<DeterministicPolicy> policies)
    : policies_(std::move(policies)) {
  if (policies_.empty()) throw InvalidInputError("policies", "policy set is empty");
  std::set<std::vector<int>> seen;
  for (std::size_t i = 0; i < policies_.size(); ++i) {
    const std::string path = "policies[" + std::to_string(i) + "]";
    if (policies_[i].num_states() != policies_.front().num_states()) {
      throw InvalidInputError(path, "state count differs from policy 0");
    }
    if (!seen.insert(policies_[i].actions()).second) {
      throw InvalidInputError(path, "duplicate action map");
    }
  }
}

PolicySet EnumeratePolicies(int num_states, int num_actions,
                            std::uint64_t cap) {
  if (num_states < 1 || num_actions < 1) {
    throw InvalidInputError("", "state and action counts must be positive");
  }
  std::uint64_t count = 1;
  bool over = false;
  for (int s = 0; s < num_states; ++s) {
    if (count > cap / static_cast<std::uint64_t>(num_actions)) {
      over = true;
      break;
    }
    count *= static_cast<std::uint64_t>(num_actions);
  }
  if (over) {
    const double total = std::pow(static_cast<double>(num_actions), num_states);
    std::ostringstream msg;
    msg << "policy count " << num_actions << "^" << num_states << " = ";
    if (total < 1e18) {
      msg << static_cast<unsigned long long>(total);
    } else {
      msg << total;
    }
    msg << " > " << cap << " (policy cap)";
    throw CapacityError(msg.str());
  }
  std::vector<DeterministicPolicy> policies;
  policies.reserve(count);
  std::vector<int> actions(num_states, 0);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    std::uint64_t rest = idx;
    for (int s = num_states - 1; s >= 0; --s) {
      actions[s] = static_cast<int>(rest % num_actions);
      rest /= num_actions;
    }
    policies.emplace_back(actions);
  }
  return PolicySet(std::move(policies));
}

BayesOptimum BayesOptimal(std::span<const Mdp> mdps, const Belief& belief,
                          const PolicySet& policies,
                          const StateDistribution& init) {
  CheckBeliefLength(mdps, belief);
  const Eigen::VectorXd scores =
      UtilityTable(mdps, policies, init) * belief.probs();
  const int best = ArgMaxFirst(scores);
  return {scores.maxCoeff(), best};
}

OracleBound ComputeOracleBound(std::span<const Mdp> mdps, const Belief& belief,
                               const PolicySet& policies,
                               const StateDistribution& init) {
  CheckBeliefLength(mdps, belief);
  const Eigen::MatrixXd table = UtilityTable(mdps, policies, init);
  OracleBound bound;
  bound.lower = (table * belief.probs()).maxCoeff();
  bound.upper = table.colwise().maxCoeff().dot(belief.probs().transpose());
  return bound;
}

double LossL1(std::span<const Mdp> mdps, const Belief& belief,
              int policy_index, const PolicySet& policies,
              const StateDistribution& beta) {
  CheckBeliefLength(mdps, belief);
  CheckBeta(mdps, beta);
  const auto values = AllValues(mdps, policies);
  Eigen::MatrixXd mixed = Eigen::MatrixXd::Zero(values.front().rows(),
                                                values.front().cols());
  for (std::size_t m = 0; m < values.size(); ++m) {
    mixed += belief[static_cast<int>(m)] * values[m];
  }
  const Eigen::VectorXd scores = mixed.transpose() * beta.weights();
  const int best = ArgMaxFirst(scores);
  return beta.weights().dot(mixed.col(best) - mixed.col(policy_index));
}

double LossL2(std::span<const Mdp> mdps, const Belief& belief,
              int policy_index, const PolicySet& policies,
              const StateDistribution& beta) {
  CheckBeliefLength(mdps, belief);
  CheckBeta(mdps, beta);
  const auto values = AllValues(mdps, policies);
  double loss = 0.0;
  for (std::size_t m = 0; m < values.size(); ++m) {
    const Eigen::VectorXd scores = values[m].transpose() * beta.weights();
    const int best = ArgMaxFirst(scores);
    loss += belief[static_cast<int>(m)] *
            beta.weights().dot(values[m].col(best) - values[m].col(policy_index));
  }
  return loss;
}

Eigen::MatrixXd OccupancyMatrix(const Mdp& mdp,
                                const DeterministicPolicy& policy) {
  const int n = mdp.num_states();
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(n, n) - mdp.discount() * InducedChain(mdp, policy);
  return system.partialPivLu().inverse();
}

Eigen::VectorXd StatisticPhi(const Mdp& mdp,
                             const DeterministicPolicy& policy) {
  const Eigen::MatrixXd occupancy = OccupancyMatrix(mdp, policy);
  const Eigen::Index n = occupancy.rows();
  Eigen::VectorXd flat(n * n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) flat[r * n + c] = occupancy(r, c);
  }
  return flat;
}

Eigen::VectorXd StatisticPhiProjected(const Mdp& mdp,
                                      const DeterministicPolicy& policy,
                                      const StateDistribution& beta) {
  if (beta.size() != mdp.num_states()) {
    throw InvalidInputError("beta", "length does not match the state count");
  }
  return OccupancyMatrix(mdp, policy).transpose() * beta.weights();
}

std::vector<int> PerMdpOptimalPolicies(std::span<const Mdp> mdps,
                                       const PolicySet& policies,
                                       const StateDistribution& init) {
  const Eigen::MatrixXd table = UtilityTable(mdps, policies, init);
  std::vector<int> best(mdps.size());
  for (std::size_t m = 0; m < mdps.size(); ++m) {
    best[m] = ArgMaxFirst(table.col(static_cast<Eigen::Index>(m)));
  }
  return best;
}

RestrictedPriorSet::RestrictedPriorSet(Eigen::MatrixXd statistic_values,
                                       Eigen::VectorXd target, double tolerance)
    : statistic_values_(std::move(statistic_values)),
      target_(std::move(target)),
      tolerance_(tolerance) {
  if (statistic_values_.rows() < 1) {
    throw InvalidInputError("statistic_values", "no MDP rows");
  }
  if (statistic_values_.cols() < 1) {
    throw InvalidInputError("statistic_values", "statistic dimension k < 1");
  }
  if (target_.size() != statistic_values_.cols()) {
    throw InvalidInputError("target", "length " + std::to_string(target_.size()) +
                                          " does not match k = " +
                                          std::to_string(statistic_values_.cols()));
  }
  if (!(tolerance_ >= 0.0)) {
    throw InvalidInputError("tolerance", "must be nonnegative");
  }
  if (!statistic_values_.allFinite() || !target_.allFinite()) {
    throw InvalidInputError("statistic_values", "entries must be finite");
  }
}

RestrictedPriorSet RestrictedPriorSet::FromOccupancy(
    std::span<const Mdp> mdps, const PolicySet& policies,
    const std::vector<int>& policy_of_mdp, Eigen::VectorXd target,
    double tolerance, const std::optional<StateDistribution>& beta) {
  if (policy_of_mdp.size() != mdps.size()) {
    throw InvalidInputError("policy", "need one policy index per MDP");
  }
  Eigen::MatrixXd rows;
  for (std::size_t m = 0; m < mdps.size(); ++m) {
    const int idx = policy_of_mdp[m];
    if (idx < 0 || idx >= policies.size()) {
      throw InvalidInputError("policy[" + std::to_string(m) + "]",
                              "policy index out of range");
    }
    const Eigen::VectorXd row =
        beta ? StatisticPhiProjected(mdps[m], policies[idx], *beta)
             : StatisticPhi(mdps[m], policies[idx]);
    if (m == 0) rows.resize(static_cast<Eigen::Index>(mdps.size()), row.size());
    rows.row(static_cast<Eigen::Index>(m)) = row.transpose();
  }
  return RestrictedPriorSet(std::move(rows), std::move(target), tolerance);
}

Eigen::VectorXd RestrictedPriorSet::ExpectedStatistic(
    const Belief& belief) const {
  if (belief.size() != num_mdps()) {
    throw InvalidInputError("belief", "length does not match the restriction");
  }
  return statistic_values_.transpose() * belief.probs();
}

bool RestrictedMembership(const RestrictedPriorSet& set, const Belief& belief) {
  const Eigen::VectorXd diff = set.ExpectedStatistic(belief) - set.target();
  return diff.cwiseAbs().maxCoeff() <= set.tolerance();
}

double LinearityResidual(const Eigen::VectorXd& losses,
                         const Eigen::MatrixXd& statistic_values) {
  const Eigen::Index m = losses.size();
  if (m < 1) throw InvalidInputError("losses", "need at least one MDP");
  if (statistic_values.rows() != m) {
    throw InvalidInputError("statistic_values",
                            "row count does not match the losses");
  }
  Eigen::MatrixXd design(m, statistic_values.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(statistic_values.cols()) = statistic_values;
  const Eigen::VectorXd coef =
      design.completeOrthogonalDecomposition().solve(losses);
  const Eigen::VectorXd residual = losses - design * coef;
  return std::sqrt(residual.squaredNorm() / static_cast<double>(m));
}

}  // namespace minimax_bayes
