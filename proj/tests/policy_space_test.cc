#include "minimax_bayes/policy_space.h"

#include <random>
#include <set>

#include <gtest/gtest.h>

#include "test_instances.h"

namespace minimax_bayes {
namespace {

using testing::ChainMdp;
using testing::RandomMdpSet;
using testing::RandomSimplexPoint;

Eigen::VectorXd Vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Start state 0 moves to state 1 (action 0) or state 2 (action 1); both are
// absorbing. Rewards decide which action is better.
Mdp Fork(double left, double right) {
  Eigen::MatrixXd go_left = Eigen::MatrixXd::Zero(3, 3);
  Eigen::MatrixXd go_right = Eigen::MatrixXd::Zero(3, 3);
  go_left(0, 1) = go_right(0, 2) = 1.0;
  go_left(1, 1) = go_right(1, 1) = 1.0;
  go_left(2, 2) = go_right(2, 2) = 1.0;
  return Mdp({go_left, go_right}, Vec({0.0, left, right}), 0.5);
}

TEST(EnumeratePoliciesTest, Counts) {
  EXPECT_EQ(EnumeratePolicies(1, 3).size(), 3);
  const PolicySet eight = EnumeratePolicies(3, 2);
  EXPECT_EQ(eight.size(), 8);
  std::set<std::vector<int>> distinct;
  for (const DeterministicPolicy& p : eight) distinct.insert(p.actions());
  EXPECT_EQ(distinct.size(), 8u);
}

TEST(EnumeratePoliciesTest, LexicographicOrder) {
  const PolicySet set = EnumeratePolicies(2, 2);
  ASSERT_EQ(set.size(), 4);
  EXPECT_EQ(set[0].actions(), (std::vector<int>{0, 0}));
  EXPECT_EQ(set[1].actions(), (std::vector<int>{0, 1}));
  EXPECT_EQ(set[2].actions(), (std::vector<int>{1, 0}));
  EXPECT_EQ(set[3].actions(), (std::vector<int>{1, 1}));
}

TEST(EnumeratePoliciesTest, CapErrorNamesCount) {
  try {
    EnumeratePolicies(4, 4, 100);
    FAIL() << "expected CapacityError";
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("256 > 100"), std::string::npos)
        << e.what();
  }
  EXPECT_EQ(EnumeratePolicies(4, 4, 256).size(), 256);
  EXPECT_THROW(EnumeratePolicies(40, 4), CapacityError);
}

TEST(PolicySetTest, Validation) {
  EXPECT_THROW(PolicySet({}), InvalidInputError);
  EXPECT_THROW(PolicySet({DeterministicPolicy({0, 1}), DeterministicPolicy({0, 1})}),
               InvalidInputError);
  try {
    PolicySet({DeterministicPolicy({0, 1}), DeterministicPolicy({0})});
    FAIL();
  } catch (const InvalidInputError& e) {
    EXPECT_EQ(e.path(), "policies[1]");
  }
}

TEST(BayesOptimalTest, PointMassMatchesBestUtility) {
  const std::vector<Mdp> mdps = RandomMdpSet(2, 3, 2, 0.9, 5);
  const PolicySet policies = EnumeratePolicies(3, 2);
  const StateDistribution init = StateDistribution::Uniform(3);
  double best = -1e300;
  for (const DeterministicPolicy& p : policies) {
    best = std::max(best, Utility(mdps[1], p, init));
  }
  EXPECT_NEAR(BayesOptimal(mdps, Belief::PointMass(2, 1), policies, init).value,
              best, 1e-12);
}

TEST(BayesOptimalTest, TiesGoToIndexZero) {
  // One state, two actions with the same self-loop: every policy is equal.
  const Eigen::MatrixXd loop = Eigen::MatrixXd::Ones(1, 1);
  const std::vector<Mdp> mdps = {Mdp({loop, loop}, Vec({0.3}), 0.8)};
  const BayesOptimum opt =
      BayesOptimal(mdps, Belief::Uniform(1), EnumeratePolicies(1, 2),
                   StateDistribution::Uniform(1));
  EXPECT_EQ(opt.index, 0);
}

TEST(BayesOptimalTest, MatchesExplicitScores) {
  const std::vector<Mdp> mdps = RandomMdpSet(2, 2, 2, 0.8, 77);
  const PolicySet policies = EnumeratePolicies(2, 2);
  const StateDistribution init(Vec({0.4, 0.6}));
  const Belief belief(Vec({0.3, 0.7}));
  Eigen::VectorXd scores(4);
  for (int i = 0; i < 4; ++i) {
    scores[i] = 0.3 * PolicyValue(mdps[0], policies[i]).dot(init.weights()) +
                0.7 * PolicyValue(mdps[1], policies[i]).dot(init.weights());
  }
  Eigen::Index arg;
  const double best = scores.maxCoeff(&arg);
  const BayesOptimum opt = BayesOptimal(mdps, belief, policies, init);
  EXPECT_NEAR(opt.value, best, 1e-12);
  EXPECT_EQ(opt.index, static_cast<int>(arg));
}

TEST(OracleBoundTest, SingleMdpHasNoGap) {
  const std::vector<Mdp> mdps = RandomMdpSet(1, 3, 2, 0.9, 3);
  const OracleBound b = ComputeOracleBound(mdps, Belief::Uniform(1),
                                          EnumeratePolicies(3, 2),
                                          StateDistribution::Uniform(3));
  EXPECT_DOUBLE_EQ(b.lower, b.upper);
}

TEST(OracleBoundTest, DisjointOptimaOpenAGap) {
  const std::vector<Mdp> mdps = {Fork(1.0, 0.0), Fork(0.0, 1.0)};
  const OracleBound b = ComputeOracleBound(mdps, Belief::Uniform(2),
                                          EnumeratePolicies(3, 2),
                                          StateDistribution::PointMass(3, 0));
  // Going either way earns 1 / (1 - 0.5) * 0.5 = 1 in one MDP only.
  EXPECT_NEAR(b.lower, 0.5, 1e-12);
  EXPECT_NEAR(b.upper, 1.0, 1e-12);
}

TEST(OracleBoundTest, SandwichOnRandomBeliefs) {
  std::mt19937_64 rng(19);
  const std::vector<Mdp> mdps = RandomMdpSet(3, 3, 2, 0.9, 19);
  const PolicySet policies = EnumeratePolicies(3, 2);
  const StateDistribution init = StateDistribution::Uniform(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Belief belief(RandomSimplexPoint(3, rng));
    const OracleBound b = ComputeOracleBound(mdps, belief, policies, init);
    EXPECT_LE(b.lower, b.upper + 1e-12);
    for (const DeterministicPolicy& p : policies) {
      EXPECT_LE(BeliefUtility(mdps, belief, p, init), b.lower + 1e-12);
    }
  }
}

TEST(BayesOptimalTest, ConvexInBelief) {
  std::mt19937_64 rng(23);
  const std::vector<Mdp> mdps = RandomMdpSet(3, 3, 2, 0.85, 23);
  const PolicySet policies = EnumeratePolicies(3, 2);
  const StateDistribution init = StateDistribution::Uniform(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd a = RandomSimplexPoint(3, rng);
    const Eigen::VectorXd b = RandomSimplexPoint(3, rng);
    const double va = BayesOptimal(mdps, Belief(a), policies, init).value;
    const double vb = BayesOptimal(mdps, Belief(b), policies, init).value;
    for (double lambda : {0.25, 0.5, 0.75}) {
      const Belief mix(lambda * a + (1 - lambda) * b);
      EXPECT_LE(BayesOptimal(mdps, mix, policies, init).value,
                lambda * va + (1 - lambda) * vb + 1e-9);
    }
  }
}

TEST(LossTest, SelfRegretIsZero) {
  const std::vector<Mdp> mdps = RandomMdpSet(2, 3, 2, 0.9, 29);
  const PolicySet policies = EnumeratePolicies(3, 2);
  const StateDistribution beta(Vec({0.5, 0.25, 0.25}));
  const Belief belief(Vec({0.6, 0.4}));
  const int bayes = BayesOptimal(mdps, belief, policies, beta).index;
  EXPECT_NEAR(LossL1(mdps, belief, bayes, policies, beta), 0.0, 1e-12);

  const std::vector<Mdp> one = {mdps[0]};
  const int best = BayesOptimal(one, Belief::Uniform(1), policies, beta).index;
  EXPECT_NEAR(LossL2(one, Belief::Uniform(1), best, policies, beta), 0.0, 1e-12);
}

TEST(LossTest, MatchesBruteForceFormulas) {
  std::mt19937_64 rng(31);
  const std::vector<Mdp> mdps = RandomMdpSet(3, 2, 2, 0.8, 31);
  const PolicySet policies = EnumeratePolicies(2, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const Belief belief(RandomSimplexPoint(3, rng));
    const StateDistribution beta(RandomSimplexPoint(2, rng));
    // V_xi^pi for every policy, state-wise.
    std::vector<Eigen::VectorXd> mixed(4, Eigen::VectorXd::Zero(2));
    for (int i = 0; i < 4; ++i) {
      for (int m = 0; m < 3; ++m) {
        mixed[i] += belief[m] * PolicyValue(mdps[m], policies[i]);
      }
    }
    int star = 0;
    for (int i = 1; i < 4; ++i) {
      if (beta.weights().dot(mixed[i]) > beta.weights().dot(mixed[star])) star = i;
    }
    for (int i = 0; i < 4; ++i) {
      const double l1 = beta.weights().dot(mixed[star] - mixed[i]);
      double l2 = 0.0;
      for (int m = 0; m < 3; ++m) {
        double best = -1e300;
        for (int j = 0; j < 4; ++j) {
          best = std::max(best, beta.weights().dot(PolicyValue(mdps[m], policies[j])));
        }
        l2 += belief[m] * (best - beta.weights().dot(PolicyValue(mdps[m], policies[i])));
      }
      const double got1 = LossL1(mdps, belief, i, policies, beta);
      const double got2 = LossL2(mdps, belief, i, policies, beta);
      EXPECT_NEAR(got1, l1, 1e-12);
      EXPECT_NEAR(got2, l2, 1e-12);
      EXPECT_GE(got1, -1e-12);
      EXPECT_GE(got2, got1 - 1e-12);
    }
  }
}

TEST(StatisticPhiTest, ClosedForms) {
  const Mdp single = ChainMdp({0}, Vec({1.0}), 0.5);
  const Eigen::VectorXd phi1 = StatisticPhi(single, DeterministicPolicy({0}));
  ASSERT_EQ(phi1.size(), 1);
  EXPECT_NEAR(phi1[0], 2.0, 1e-12);

  const Mdp identity = ChainMdp({0, 1, 2}, Vec({0, 0, 0}), 0.9);
  const Eigen::VectorXd phi = StatisticPhi(identity, DeterministicPolicy({0, 0, 0}));
  Eigen::MatrixXd expected = 10.0 * Eigen::MatrixXd::Identity(3, 3);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(phi[r * 3 + c], expected(r, c), 1e-9);
  }
}

TEST(StatisticPhiTest, RowSumsAndRowMajorLayout) {
  const std::vector<Mdp> mdps = RandomMdpSet(4, 4, 2, 0.9, 37);
  for (const Mdp& mdp : mdps) {
    for (const DeterministicPolicy& p : EnumeratePolicies(4, 2)) {
      const Eigen::MatrixXd occ = OccupancyMatrix(mdp, p);
      const Eigen::VectorXd flat = StatisticPhi(mdp, p);
      for (int r = 0; r < 4; ++r) {
        EXPECT_NEAR(occ.row(r).sum(), 10.0, 1e-9);
        for (int c = 0; c < 4; ++c) EXPECT_EQ(flat[r * 4 + c], occ(r, c));
      }
    }
  }
}

TEST(StatisticPhiTest, MixedOptimalValueIsExpectedStatisticTimesReward) {
  std::mt19937_64 rng(41);
  const std::vector<Mdp> mdps = RandomMdpSet(3, 3, 2, 0.9, 41);
  const PolicySet policies = EnumeratePolicies(3, 2);
  const StateDistribution init = StateDistribution::Uniform(3);
  const std::vector<int> best = PerMdpOptimalPolicies(mdps, policies, init);
  const Belief belief(RandomSimplexPoint(3, rng));
  Eigen::VectorXd via_phi = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd via_value = Eigen::VectorXd::Zero(3);
  for (int m = 0; m < 3; ++m) {
    via_phi += belief[m] * OccupancyMatrix(mdps[m], policies[best[m]]) *
               mdps[m].rewards();
    via_value += belief[m] * PolicyValue(mdps[m], policies[best[m]]);
  }
  EXPECT_LE((via_phi - via_value).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StatisticPhiTest, ProjectedIsBetaTimesOccupancy) {
  const std::vector<Mdp> mdps = RandomMdpSet(1, 3, 2, 0.7, 43);
  const StateDistribution beta(Vec({0.2, 0.3, 0.5}));
  const DeterministicPolicy p({1, 0, 1});
  const Eigen::VectorXd projected = StatisticPhiProjected(mdps[0], p, beta);
  const Eigen::VectorXd direct =
      (beta.weights().transpose() * OccupancyMatrix(mdps[0], p)).transpose();
  EXPECT_LE((projected - direct).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(RestrictedMembershipTest, PointMassOnOwnStatistic) {
  const std::vector<Mdp> mdps = RandomMdpSet(2, 2, 2, 0.9, 47);
  const PolicySet policies = EnumeratePolicies(2, 2);
  const Eigen::VectorXd target = StatisticPhi(mdps[1], policies[2]);
  const RestrictedPriorSet set =
      RestrictedPriorSet::FromOccupancy(mdps, policies, {2, 2}, target);
  EXPECT_TRUE(RestrictedMembership(set, Belief::PointMass(2, 1)));
}

TEST(RestrictedMembershipTest, UnreachableTargetExcludesVertices) {
  Eigen::MatrixXd stats(2, 1);
  stats << 1.0, 2.0;
  const RestrictedPriorSet set(stats, Vec({5.0}), 1e-7);
  EXPECT_FALSE(RestrictedMembership(set, Belief::PointMass(2, 0)));
  EXPECT_FALSE(RestrictedMembership(set, Belief::PointMass(2, 1)));
  const RestrictedPriorSet loose(stats, Vec({5.0}), 1e9);
  EXPECT_TRUE(RestrictedMembership(loose, Belief::Uniform(2)));
}

TEST(RestrictedPriorSetTest, Validation) {
  EXPECT_THROW(RestrictedPriorSet(Eigen::MatrixXd(2, 0), Eigen::VectorXd(0)),
               InvalidInputError);
  EXPECT_THROW(RestrictedPriorSet(Eigen::MatrixXd::Ones(2, 2), Vec({1.0})),
               InvalidInputError);
  EXPECT_THROW(RestrictedPriorSet(Eigen::MatrixXd::Ones(2, 1), Vec({1.0}), -1.0),
               InvalidInputError);
}

TEST(LinearityResidualTest, ConstantPlantedAndSingleton) {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd stats(6, 3);
  for (Eigen::Index i = 0; i < stats.size(); ++i) stats.data()[i] = normal(rng);
  EXPECT_NEAR(LinearityResidual(Eigen::VectorXd::Constant(6, 0.7), stats), 0.0,
              1e-12);
  const Eigen::VectorXd w = Vec({0.5, -1.5, 2.0});
  EXPECT_LE(LinearityResidual(stats * w, stats), 1e-9);
  EXPECT_NEAR(LinearityResidual(Vec({3.0}), Eigen::MatrixXd::Ones(1, 4)), 0.0, 1e-12);
  // Losses that are not affine in the statistic leave a residual.
  Eigen::VectorXd bent = (stats * w).array().square();
  EXPECT_GT(LinearityResidual(bent, stats), 1e-3);
}

}  // namespace
}  // namespace minimax_bayes
