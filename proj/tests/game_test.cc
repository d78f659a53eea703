#include "minimax_bayes/game.h"

#include <functional>
#include <random>

#include <gtest/gtest.h>

#include "test_instances.h"

namespace minimax_bayes {
namespace {

using testing::RandomMdpSet;
using testing::RandomSimplexPoint;
using testing::SimplexGrid;

Eigen::MatrixXd RandomPayoff(int n, int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Eigen::MatrixXd u(n, m);
  for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = unit(rng);
  return u;
}

// max over the policy-simplex grid (step 1 / steps) of min_m (q^T U)_m.
double PolicyGridValue(const Eigen::MatrixXd& u, int steps) {
  const int n = static_cast<int>(u.rows());
  double best = -1e300;
  Eigen::VectorXd partial = Eigen::VectorXd::Zero(u.cols());
  std::function<void(int, int)> walk = [&](int row, int remaining) {
    if (row == n - 1) {
      const Eigen::VectorXd cols =
          partial + u.row(row).transpose() * (static_cast<double>(remaining) / steps);
      best = std::max(best, cols.minCoeff());
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      walk(row + 1, remaining - c);
      partial += u.row(row).transpose() / steps;
    }
    partial -= u.row(row).transpose() * (static_cast<double>(remaining + 1) / steps);
  };
  walk(0, steps);
  return best;
}

TEST(PayoffMatrixTest, RejectsOutOfRangeEntry) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(2, 2);
  u(1, 0) = 1.5;
  try {
    PayoffMatrix{u};
    FAIL();
  } catch (const InvalidInputError& e) {
    EXPECT_EQ(e.path(), "payoff[1][0]");
  }
}

TEST(BuildPayoffMatrixTest, IdenticalMdpsGiveIdenticalColumns) {
  std::vector<Mdp> mdps = RandomMdpSet(1, 3, 2, 0.9, 1);
  mdps.push_back(mdps[0]);
  const PayoffMatrix u = BuildPayoffMatrix(mdps, EnumeratePolicies(3, 2),
                                           StateDistribution::Uniform(3));
  EXPECT_EQ(u.values().col(0), u.values().col(1));
}

TEST(BuildPayoffMatrixTest, SingleEntryIsUtility) {
  const std::vector<Mdp> mdps = RandomMdpSet(1, 2, 1, 0.9, 2);
  const PolicySet one({DeterministicPolicy({0, 0})});
  const PayoffMatrix u =
      BuildPayoffMatrix(mdps, one, StateDistribution::Uniform(2));
  ASSERT_EQ(u.num_policies(), 1);
  EXPECT_EQ(u(0, 0), Utility(mdps[0], one[0], StateDistribution::Uniform(2)));
}

TEST(BuildPayoffMatrixTest, MatchesValueRecomputationAndIgnoresThreads) {
  const std::vector<Mdp> mdps = RandomMdpSet(3, 2, 2, 0.9, 3);
  const PolicySet policies = EnumeratePolicies(2, 2);
  const StateDistribution init(Eigen::Vector2d(0.3, 0.7));
  const PayoffMatrix serial = BuildPayoffMatrix(mdps, policies, init, 1);
  const PayoffMatrix threaded = BuildPayoffMatrix(mdps, policies, init, 3);
  EXPECT_EQ(serial.values(), threaded.values());
  for (int i = 0; i < 4; ++i) {
    for (int m = 0; m < 3; ++m) {
      EXPECT_NEAR(serial(i, m),
                  init.weights().dot(PolicyValue(mdps[m], policies[i])), 1e-12);
    }
  }
}

TEST(NatureBestResponseTest, SingleMdp) {
  const PayoffMatrix u(Eigen::MatrixXd::Constant(3, 1, 0.2));
  EXPECT_EQ(NatureBestResponse(Eigen::VectorXd::Constant(3, 1.0 / 3), u).Mode(), 0);
}

TEST(NatureBestResponseTest, DominatedColumnIsChosen) {
  Eigen::MatrixXd u(2, 3);
  u << 0.5, 0.1, 0.4, 0.3, -0.2, 0.9;
  const Belief b = NatureBestResponse(Eigen::Vector2d(0.7, 0.3), PayoffMatrix(u));
  EXPECT_EQ(b.probs(), Eigen::Vector3d(0, 1, 0));
}

TEST(NatureBestResponseTest, MatchesColumnScan) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd u = RandomPayoff(5, 4, rng);
    const Eigen::VectorXd q = RandomSimplexPoint(5, rng);
    int best = 0;
    for (int m = 1; m < 4; ++m) {
      if (q.dot(u.col(m)) < q.dot(u.col(best))) best = m;
    }
    EXPECT_EQ(NatureBestResponse(q, PayoffMatrix(u)).Mode(), best);
  }
}

TEST(NatureBestResponseTest, TiesGoToSmallestIndex) {
  const PayoffMatrix u(Eigen::MatrixXd::Constant(2, 3, 0.1));
  EXPECT_EQ(NatureBestResponse(Eigen::Vector2d(0.5, 0.5), u).Mode(), 0);
}

TEST(NatureBestResponseTest, VertexMinimumEqualsSimplexMinimum) {
  std::mt19937_64 rng(6);
  const std::vector<Eigen::VectorXd> grid = SimplexGrid(3, 50);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd u = RandomPayoff(4, 3, rng);
    const Eigen::VectorXd q = RandomSimplexPoint(4, rng);
    const Eigen::VectorXd cols = u.transpose() * q;
    double grid_min = 1e300;
    for (const Eigen::VectorXd& xi : grid) grid_min = std::min(grid_min, cols.dot(xi));
    const Belief b = NatureBestResponse(q, PayoffMatrix(u));
    EXPECT_NEAR(cols.dot(b.probs()), grid_min, 1e-12);
  }
}

TEST(ConstrainedBestResponseTest, VacuousConstraintMatchesVertex) {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd u = RandomPayoff(3, 4, rng);
  Eigen::MatrixXd stats(4, 2);
  stats << 1, 0, 0, 1, 1, 1, 0.5, 0.2;
  const RestrictedPriorSet loose(stats, Eigen::Vector2d(0.5, 0.5), 100.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd q = RandomSimplexPoint(3, rng);
    const Belief free = NatureBestResponse(q, PayoffMatrix(u));
    const Belief constrained =
        NatureBestResponseConstrained(q, PayoffMatrix(u), loose);
    EXPECT_NEAR((u.transpose() * q).dot(constrained.probs()),
                (u.transpose() * q).dot(free.probs()), 1e-12);
  }
}

TEST(ConstrainedBestResponseTest, SingletonFeasibleSet) {
  // Two equations pin xi = (0.2, 0.3, 0.5).
  Eigen::MatrixXd stats(3, 2);
  stats << 1, 0, 0, 1, 0, 0;
  const RestrictedPriorSet pinned(stats, Eigen::Vector2d(0.2, 0.3), 0.0);
  Eigen::MatrixXd u(2, 3);
  u << 0.9, -0.4, 0.1, -0.5, 0.3, 0.2;
  const Belief b = NatureBestResponseConstrained(Eigen::Vector2d(0.5, 0.5),
                                                 PayoffMatrix(u), pinned);
  EXPECT_NEAR(b[0], 0.2, 1e-9);
  EXPECT_NEAR(b[1], 0.3, 1e-9);
  EXPECT_NEAR(b[2], 0.5, 1e-9);
}

TEST(ConstrainedBestResponseTest, MatchesFineGridOnTwoSimplex) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<Eigen::VectorXd> grid = SimplexGrid(3, 1000);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd u = RandomPayoff(4, 3, rng);
    const Eigen::VectorXd q = RandomSimplexPoint(4, rng);
    Eigen::MatrixXd stats(3, 1);
    stats << unit(rng), unit(rng), unit(rng);
    const Eigen::VectorXd center = RandomSimplexPoint(3, rng);
    const double tol = 0.02;
    const RestrictedPriorSet set(stats, stats.transpose() * center, tol);
    const Eigen::VectorXd cols = u.transpose() * q;
    double grid_min = 1e300;
    for (const Eigen::VectorXd& xi : grid) {
      if (std::abs(stats.col(0).dot(xi) - set.target()[0]) <= tol) {
        grid_min = std::min(grid_min, cols.dot(xi));
      }
    }
    const Belief b = NatureBestResponseConstrained(q, PayoffMatrix(u), set);
    EXPECT_TRUE(RestrictedMembership(
        RestrictedPriorSet(stats, set.target(), tol + 1e-9), b));
    EXPECT_LE(cols.dot(b.probs()), grid_min + 1e-12);
    EXPECT_NEAR(cols.dot(b.probs()), grid_min, 1e-3);
  }
}

TEST(ConstrainedBestResponseTest, InfeasibleThrows) {
  Eigen::MatrixXd stats(2, 1);
  stats << 0.0, 1.0;
  const RestrictedPriorSet set(stats, Eigen::VectorXd::Constant(1, 3.0), 0.1);
  EXPECT_THROW(NatureBestResponseConstrained(Eigen::Vector2d(0.5, 0.5),
                                             PayoffMatrix(Eigen::Matrix2d::Zero()),
                                             set),
               InfeasibleRestrictionError);
}

TEST(ExactGameValueTest, PureSaddle) {
  Eigen::MatrixXd u(3, 3);
  u << 0.1, 0.2, 0.3,  //
      0.4, 0.5, 0.6,   //
      -0.1, 0.0, 0.9;
  const GameSolution s = ExactGameValue(PayoffMatrix(u));
  EXPECT_NEAR(s.value, 0.4, 1e-9);
  EXPECT_LE(s.duality_gap, kDualityTolerance);
}

TEST(ExactGameValueTest, MatchingPennies) {
  Eigen::Matrix2d u;
  u << 1, -1, -1, 1;
  const GameSolution s = ExactGameValue(PayoffMatrix(u));
  EXPECT_NEAR(s.value, 0.0, 1e-9);
  EXPECT_NEAR(s.policy_distribution[0], 0.5, 1e-9);
  EXPECT_NEAR(s.belief[0], 0.5, 1e-9);
  EXPECT_EQ(s.method, "exact");
}

TEST(ExactGameValueTest, AllEqualIsUniform) {
  const GameSolution s = ExactGameValue(PayoffMatrix(Eigen::MatrixXd::Constant(3, 2, -0.3)));
  EXPECT_EQ(s.value, -0.3);
  EXPECT_EQ(s.policy_distribution, Eigen::VectorXd::Constant(3, 1.0 / 3));
  EXPECT_EQ(s.belief.probs(), Eigen::VectorXd::Constant(2, 0.5));
}

TEST(ExactGameValueTest, PolicyGridOracle) {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd u = RandomPayoff(6, 4, rng);
  const GameSolution s = ExactGameValue(PayoffMatrix(u));
  const double grid = PolicyGridValue(u, 100);
  EXPECT_LE(grid, s.value + 1e-9);
  EXPECT_NEAR(s.value, grid, 1e-2);
}

TEST(ExactGameValueTest, DualityAndExchangeOnRandomGames) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 9, m = 1 + (trial / 9) % 5;
    const Eigen::MatrixXd u = RandomPayoff(n, m, rng);
    const GameSolution s = ExactGameValue(PayoffMatrix(u));
    const double maximin = (u.transpose() * s.policy_distribution).minCoeff();
    const double minimax = (u * s.belief.probs()).maxCoeff();
    EXPECT_NEAR(maximin, minimax, kDualityTolerance);
    EXPECT_GE(maximin, minimax - 1e-9 - kDualityTolerance);
    EXPECT_NEAR(s.value, maximin, kDualityTolerance);
    EXPECT_NEAR(s.policy_distribution.sum(), 1.0, 1e-12);
    EXPECT_GE(s.policy_distribution.minCoeff(), 0.0);
  }
}

TEST(ExactGameValueTest, RestrictedAgreesWithUnrestrictedWhenVacuous) {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd u = RandomPayoff(5, 3, rng);
  const RestrictedPriorSet loose(Eigen::MatrixXd::Identity(3, 3),
                                 Eigen::Vector3d(0.3, 0.3, 0.3), 10.0);
  const GameSolution free = ExactGameValue(PayoffMatrix(u));
  const GameSolution restricted = ExactGameValue(PayoffMatrix(u), loose);
  EXPECT_NEAR(free.value, restricted.value, 1e-9);
  EXPECT_EQ(restricted.method, "exact-restricted");
}

TEST(ExactGameValueTest, RestrictedValueMatchesGridOverFeasibleBeliefs) {
  std::mt19937_64 rng(12);
  const std::vector<Eigen::VectorXd> grid = SimplexGrid(3, 200);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd u = RandomPayoff(4, 3, rng);
    Eigen::MatrixXd stats(3, 1);
    stats << 0.0, 0.5, 1.0;
    const RestrictedPriorSet set(stats, Eigen::VectorXd::Constant(1, 0.6), 0.05);
    const GameSolution s = ExactGameValue(PayoffMatrix(u), set);
    // min over feasible xi of max_i (U xi)_i.
    double grid_value = 1e300;
    for (const Eigen::VectorXd& xi : grid) {
      if (std::abs(stats.col(0).dot(xi) - 0.6) <= 0.05) {
        grid_value = std::min(grid_value, (u * xi).maxCoeff());
      }
    }
    EXPECT_LE(s.value, grid_value + 1e-9);
    EXPECT_NEAR(s.value, grid_value, 1e-2);
    EXPECT_LE(std::abs(s.duality_gap), kDualityTolerance);
  }
}

TEST(FictitiousPlayTest, PureSaddleInOneRound) {
  Eigen::MatrixXd u(2, 2);
  u << 0.5, 0.7, 0.1, 0.6;
  const FictitiousPlayResult r = FictitiousPlay(PayoffMatrix(u), 1);
  EXPECT_EQ(r.policy_choices[0], 0);
  EXPECT_EQ(r.mdp_choices[0], 0);
  EXPECT_EQ(r.gap_history[0], 0.0);
  EXPECT_EQ(r.solution.value, 0.5);
}

TEST(FictitiousPlayTest, MatchingPenniesMixtures) {
  Eigen::Matrix2d u;
  u << 1, -1, -1, 1;
  const FictitiousPlayResult r = FictitiousPlay(PayoffMatrix(u), 10000);
  EXPECT_NEAR(r.solution.policy_distribution[0], 0.5, 0.05);
  EXPECT_NEAR(r.solution.belief[0], 0.5, 0.05);
  const GameSolution exact = ExactGameValue(PayoffMatrix(u));
  EXPECT_LE(r.lower, exact.value + 1e-12);
  EXPECT_GE(r.upper, exact.value - 1e-12);
}

TEST(FictitiousPlayTest, BracketsExactValueEveryPrefix) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd u = RandomPayoff(4, 3, rng);
    const double value = ExactGameValue(PayoffMatrix(u)).value;
    for (int rounds : {1, 2, 5, 17, 200}) {
      const FictitiousPlayResult r = FictitiousPlay(PayoffMatrix(u), rounds);
      EXPECT_LE(r.lower, value + 1e-9);
      EXPECT_GE(r.upper, value - 1e-9);
      EXPECT_NEAR(r.gap_history.back(), r.upper - r.lower, 1e-12);
    }
  }
}

TEST(FictitiousPlayTest, GapShrinksWithConvergingEstimates) {
  std::mt19937_64 rng(14);
  // Rock-paper-scissors has no saddle point, so the gap stays positive.
  Eigen::MatrixXd u(3, 3);
  u << 0, -0.8, 0.8, 0.8, 0, -0.8, -0.8, 0.8, 0;
  const PayoffMatrix exact(u);
  std::normal_distribution<double> normal(0.0, 0.1);
  const PayoffEstimateStream stream = [&](int t) {
    Eigen::MatrixXd noisy = u;
    for (Eigen::Index i = 0; i < noisy.size(); ++i) {
      noisy.data()[i] += normal(rng) / std::sqrt(static_cast<double>(t));
    }
    return noisy;
  };
  const FictitiousPlayResult r = FictitiousPlay(stream, 5000, exact);
  EXPECT_LT(r.gap_history.back(), r.gap_history[99]);
  const double value = ExactGameValue(exact).value;
  EXPECT_LE(r.lower, value + 1e-9);
  EXPECT_GE(r.upper, value - 1e-9);
}

}  // namespace
}  // namespace minimax_bayes
