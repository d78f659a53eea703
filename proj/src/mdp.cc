#include "minimax_bayes/mdp.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace minimax_bayes {
namespace {

std::string Index2(int s, int a) {
  return "transitions[" + std::to_string(s) + "][" + std::to_string(a) + "]";
}

}  // namespace

Mdp::Mdp(std::vector<Eigen::MatrixXd> kernels, Eigen::VectorXd rewards,
         double discount)
    : kernels_(std::move(kernels)),
      rewards_(std::move(rewards)),
      discount_(discount) {
  if (!(discount_ > 0.0 && discount_ < 1.0)) {
    std::ostringstream msg;
    msg << "discount " << discount_ << " outside (0, 1)";
    throw InvalidInputError("gamma", msg.str());
  }
  const int s_count = num_states();
  if (s_count == 0) throw InvalidInputError("rewards", "no states");
  if (kernels_.empty()) throw InvalidInputError("transitions", "no actions");
  for (int s = 0; s < s_count; ++s) {
    if (!std::isfinite(rewards_[s])) {
      throw InvalidInputError("rewards[" + std::to_string(s) + "]",
                              "reward is not finite");
    }
  }
  for (int a = 0; a < num_actions(); ++a) {
    const Eigen::MatrixXd& k = kernels_[a];
    if (k.rows() != s_count || k.cols() != s_count) {
      throw InvalidInputError("transitions",
                              "kernel of action " + std::to_string(a) +
                                  " has the wrong shape");
    }
    for (int s = 0; s < s_count; ++s) {
      ValidateProbabilityVector(k.row(s).transpose(), Index2(s, a));
    }
  }
}

Mdp Mdp::FromNested(
    const std::vector<std::vector<std::vector<double>>>& transitions,
    const std::vector<double>& rewards, double discount) {
  const int s_count = static_cast<int>(rewards.size());
  if (static_cast<int>(transitions.size()) != s_count) {
    throw InvalidInputError("transitions",
                            "expected " + std::to_string(s_count) + " states");
  }
  if (s_count == 0) throw InvalidInputError("rewards", "no states");
  const int a_count = static_cast<int>(transitions[0].size());
  std::vector<Eigen::MatrixXd> kernels(a_count,
                                       Eigen::MatrixXd(s_count, s_count));
  for (int s = 0; s < s_count; ++s) {
    if (static_cast<int>(transitions[s].size()) != a_count) {
      throw InvalidInputError(
          "transitions[" + std::to_string(s) + "]",
          "expected " + std::to_string(a_count) + " actions");
    }
    for (int a = 0; a < a_count; ++a) {
      if (static_cast<int>(transitions[s][a].size()) != s_count) {
        throw InvalidInputError(
            Index2(s, a), "expected " + std::to_string(s_count) + " entries");
      }
      for (int t = 0; t < s_count; ++t) kernels[a](s, t) = transitions[s][a][t];
    }
  }
  return Mdp(std::move(kernels),
             Eigen::Map<const Eigen::VectorXd>(rewards.data(), s_count),
             discount);
}

Mdp Mdp::WithRewards(Eigen::VectorXd rewards) const {
  return Mdp(kernels_, std::move(rewards), discount_);
}

bool Mdp::operator==(const Mdp& other) const {
  if (discount_ != other.discount_ || rewards_ != other.rewards_ ||
      kernels_.size() != other.kernels_.size()) {
    return false;
  }
  for (std::size_t a = 0; a < kernels_.size(); ++a) {
    if (kernels_[a] != other.kernels_[a]) return false;
  }
  return true;
}

DeterministicPolicy::DeterministicPolicy(std::vector<int> action_of)
    : action_of_(std::move(action_of)) {
  if (action_of_.empty()) {
    throw InvalidInputError("policy", "policy maps no states");
  }
  for (std::size_t s = 0; s < action_of_.size(); ++s) {
    if (action_of_[s] < 0) {
      throw InvalidInputError("policy[" + std::to_string(s) + "]",
                              "negative action index");
    }
  }
}

void DeterministicPolicy::CheckCompatible(const Mdp& mdp) const {
  if (num_states() != mdp.num_states()) {
    throw InvalidInputError("policy", "policy covers " +
                                          std::to_string(num_states()) +
                                          " states, MDP has " +
                                          std::to_string(mdp.num_states()));
  }
  for (int s = 0; s < num_states(); ++s) {
    if (action_of_[s] >= mdp.num_actions()) {
      throw InvalidInputError("policy[" + std::to_string(s) + "]",
                              "action " + std::to_string(action_of_[s]) +
                                  " >= num_actions " +
                                  std::to_string(mdp.num_actions()));
    }
  }
}

Eigen::MatrixXd InducedChain(const Mdp& mdp,
                             const DeterministicPolicy& policy) {
  policy.CheckCompatible(mdp);
  const int n = mdp.num_states();
  Eigen::MatrixXd chain(n, n);
  for (int s = 0; s < n; ++s) chain.row(s) = mdp.kernel(policy.action(s)).row(s);
  return chain;
}

Eigen::VectorXd PolicyValue(const Mdp& mdp,
                            const DeterministicPolicy& policy) {
  const Eigen::MatrixXd chain = InducedChain(mdp, policy);
  const int n = mdp.num_states();
  const Eigen::MatrixXd system =
      Eigen::MatrixXd::Identity(n, n) - mdp.discount() * chain;
  return system.partialPivLu().solve(mdp.rewards());
}

double Utility(const Mdp& mdp, const DeterministicPolicy& policy,
               const StateDistribution& init) {
  if (init.size() != mdp.num_states()) {
    throw InvalidInputError("init", "length " + std::to_string(init.size()) +
                                        " does not match " +
                                        std::to_string(mdp.num_states()) +
                                        " states");
  }
  return init.weights().dot(PolicyValue(mdp, policy));
}

double BeliefUtility(std::span<const Mdp> mdps, const Belief& belief,
                     const DeterministicPolicy& policy,
                     const StateDistribution& init) {
  if (belief.size() != static_cast<int>(mdps.size())) {
    throw InvalidInputError("belief", "length " + std::to_string(belief.size()) +
                                          " does not match " +
                                          std::to_string(mdps.size()) +
                                          " MDPs");
  }
  double total = 0.0;
  for (std::size_t m = 0; m < mdps.size(); ++m) {
    if (belief[static_cast<int>(m)] == 0.0) continue;
    total += belief[static_cast<int>(m)] * Utility(mdps[m], policy, init);
  }
  return total;
}

int TruncationHorizon(double gamma, double epsilon) {
  const double horizon =
      std::ceil(std::log(epsilon * (1.0 - gamma)) / std::log(gamma));
  return std::max(1, static_cast<int>(horizon));
}

RolloutSampler::RolloutSampler(const Mdp& mdp,
                               const DeterministicPolicy& policy,
                               const StateDistribution& init)
    : num_states_(mdp.num_states()),
      discount_(mdp.discount()),
      horizon_(TruncationHorizon(mdp.discount())),
      rewards_(mdp.rewards().data(),
               mdp.rewards().data() + mdp.num_states()),
      init_cdf_(mdp.num_states()),
      next_cdf_(static_cast<std::size_t>(mdp.num_states()) * mdp.num_states()) {
  if (init.size() != num_states_) {
    throw InvalidInputError("init", "length does not match the MDP");
  }
  const Eigen::MatrixXd chain = InducedChain(mdp, policy);
  double acc = 0.0;
  for (int s = 0; s < num_states_; ++s) init_cdf_[s] = (acc += init[s]);
  init_cdf_.back() = 1.0;
  for (int s = 0; s < num_states_; ++s) {
    double* row = next_cdf_.data() + static_cast<std::size_t>(s) * num_states_;
    acc = 0.0;
    for (int t = 0; t < num_states_; ++t) row[t] = (acc += chain(s, t));
    row[num_states_ - 1] = 1.0;
  }
}

int RolloutSampler::SampleRow(const double* cdf, SplitMix64& rng) const {
  const double u = rng.Uniform();
  int s = 0;
  while (s + 1 < num_states_ && u >= cdf[s]) ++s;
  return s;
}

RolloutSample RolloutSampler::Sample(RolloutMode mode, SplitMix64& rng) const {
  RolloutSample out;
  int state = SampleRow(init_cdf_.data(), rng);
  if (mode == RolloutMode::kGeometric) {
    double total = 0.0;
    int t = 0;
    while (true) {
      total += rewards_[state];
      ++t;
      if (rng.Uniform() >= discount_) break;
      state = SampleRow(
          next_cdf_.data() + static_cast<std::size_t>(state) * num_states_, rng);
    }
    out.total_reward = total;
    out.horizon_used = t;
    out.truncated = false;
    return out;
  }
  double total = 0.0;
  double weight = 1.0;
  for (int t = 1;; ++t) {
    total += weight * rewards_[state];
    if (t == horizon_) break;
    weight *= discount_;
    state = SampleRow(
        next_cdf_.data() + static_cast<std::size_t>(state) * num_states_, rng);
  }
  out.total_reward = total;
  out.horizon_used = horizon_;
  out.truncated = true;
  return out;
}

RolloutSample Rollout(const Mdp& mdp, const DeterministicPolicy& policy,
                      const StateDistribution& init, RolloutMode mode,
                      std::uint64_t seed) {
  RolloutSampler sampler(mdp, policy, init);
  SplitMix64 rng(seed);
  return sampler.Sample(mode, rng);
}

double DiscretizationBound(double epsilon, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw InvalidInputError("gamma", "discount outside (0, 1)");
  }
  if (!(epsilon >= 0.0)) {
    throw InvalidInputError("epsilon", "perturbation must be nonnegative");
  }
  return epsilon / ((1.0 - gamma) * (1.0 - gamma));
}

double RewardScale(std::span<const Mdp> mdps) {
  if (mdps.empty()) return 1.0;
  double largest = 0.0;
  for (const Mdp& mdp : mdps) {
    largest = std::max(largest, mdp.rewards().cwiseAbs().maxCoeff());
  }
  return (1.0 - mdps.front().discount()) / std::max(1.0, largest);
}

double NormalizeRewards(std::vector<Mdp>& mdps) {
  const double scale = RewardScale(mdps);
  for (Mdp& mdp : mdps) mdp = mdp.WithRewards(mdp.rewards() * scale);
  return scale;
}

}  // namespace minimax_bayes
