#include "minimax_bayes/linear_program.h"

#include <random>

#include <gtest/gtest.h>

namespace minimax_bayes {
namespace {

using Sense = ConstraintSense;

LinearProgram Make(Eigen::VectorXd c, Eigen::MatrixXd a, Eigen::VectorXd b,
                   std::vector<Sense> senses) {
  return {std::move(c), std::move(a), std::move(b), std::move(senses)};
}

TEST(SimplexTest, TextbookMaximum) {
  // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
  Eigen::MatrixXd a(3, 2);
  a << 1, 0, 0, 2, 3, 2;
  const LpResult r = SolveLinearProgram(
      Make(Eigen::Vector2d(3, 5), a, Eigen::Vector3d(4, 12, 18),
           {Sense::kLessEqual, Sense::kLessEqual, Sense::kLessEqual}));
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, 36.0, 1e-9);
  EXPECT_NEAR(r.x[0], 2.0, 1e-9);
  EXPECT_NEAR(r.x[1], 6.0, 1e-9);
}

TEST(SimplexTest, EqualityAndGreaterEqual) {
  // max -x - y, x + y = 2, x >= 0.5 (as -x <= -0.5 in >= form: x >= 0.5).
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 1, 0;
  const LpResult r = SolveLinearProgram(
      Make(Eigen::Vector2d(-1, -1), a, Eigen::Vector2d(2, 0.5),
           {Sense::kEqual, Sense::kGreaterEqual}));
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, -2.0, 1e-9);
  EXPECT_GE(r.x[0], 0.5 - 1e-9);
}

TEST(SimplexTest, NegativeRightHandSide) {
  // x - y <= -1 means y >= x + 1; max -y -> y = 1, x = 0.
  Eigen::MatrixXd a(1, 2);
  a << 1, -1;
  const LpResult r = SolveLinearProgram(
      Make(Eigen::Vector2d(0, -1), a, Eigen::VectorXd::Constant(1, -1.0),
           {Sense::kLessEqual}));
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, -1.0, 1e-9);
}

TEST(SimplexTest, Infeasible) {
  Eigen::MatrixXd a(2, 1);
  a << 1, 1;
  const LpResult r = SolveLinearProgram(
      Make(Eigen::VectorXd::Ones(1), a, Eigen::Vector2d(1, 2),
           {Sense::kLessEqual, Sense::kGreaterEqual}));
  EXPECT_EQ(r.status, LpStatus::kInfeasible);
  EXPECT_GT(r.infeasibility, 0.0);
}

TEST(SimplexTest, Unbounded) {
  Eigen::MatrixXd a(1, 2);
  a << 1, -1;
  const LpResult r = SolveLinearProgram(
      Make(Eigen::Vector2d(1, 0), a, Eigen::VectorXd::Constant(1, 1.0),
           {Sense::kLessEqual}));
  EXPECT_EQ(r.status, LpStatus::kUnbounded);
}

TEST(SimplexTest, BealeCyclingExampleTerminates) {
  // Cycles under the textbook largest-coefficient rule.
  Eigen::MatrixXd a(3, 4);
  a << 0.25, -60, -1.0 / 25, 9, 0.5, -90, -1.0 / 50, 3, 0, 0, 1, 0;
  Eigen::VectorXd c(4);
  c << 0.75, -150, 1.0 / 50, -6;
  const LpResult r = SolveLinearProgram(
      Make(c, a, Eigen::Vector3d(0, 0, 1),
           {Sense::kLessEqual, Sense::kLessEqual, Sense::kLessEqual}));
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.objective, 0.05, 1e-9);
}

TEST(SimplexTest, IterationLimitIsReported) {
  Eigen::MatrixXd a(3, 2);
  a << 1, 0, 0, 2, 3, 2;
  SimplexOptions options;
  options.max_iterations = 1;
  const LpResult r = SolveLinearProgram(
      Make(Eigen::Vector2d(3, 5), a, Eigen::Vector3d(4, 12, 18),
           {Sense::kLessEqual, Sense::kLessEqual, Sense::kLessEqual}),
      options);
  EXPECT_EQ(r.status, LpStatus::kIterationLimit);
  EXPECT_EQ(ToString(r.status), "iteration limit");
}

// Vertex enumeration for max c^T x, A x <= b, x >= 0 in two dimensions.
double BruteForce2d(const Eigen::Vector2d& c, const Eigen::MatrixXd& a,
                    const Eigen::VectorXd& b) {
  std::vector<Eigen::Vector3d> lines;  // p x + q y = r
  for (Eigen::Index i = 0; i < a.rows(); ++i) lines.emplace_back(a(i, 0), a(i, 1), b[i]);
  lines.emplace_back(1, 0, 0);
  lines.emplace_back(0, 1, 0);
  double best = -1e300;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      Eigen::Matrix2d m;
      m << lines[i][0], lines[i][1], lines[j][0], lines[j][1];
      if (std::abs(m.determinant()) < 1e-12) continue;
      const Eigen::Vector2d x = m.inverse() * Eigen::Vector2d(lines[i][2], lines[j][2]);
      if (x.minCoeff() < -1e-9) continue;
      if (((a * x) - b).maxCoeff() > 1e-9) continue;
      best = std::max(best, c.dot(x));
    }
  }
  return best;
}

TEST(SimplexTest, RandomTwoDimensionalAgainstVertexEnumeration) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int rows = 2 + trial % 5;
    Eigen::MatrixXd a(rows, 2);
    Eigen::VectorXd b(rows);
    for (int i = 0; i < rows; ++i) {
      a(i, 0) = unit(rng);
      a(i, 1) = unit(rng);
      b[i] = 0.1 + std::abs(unit(rng));
    }
    // Box keeps the problem bounded.
    a.conservativeResize(rows + 1, 2);
    b.conservativeResize(rows + 1);
    a.row(rows) << 1, 1;
    b[rows] = 3;
    const Eigen::Vector2d c(unit(rng), unit(rng));
    const LpResult r = SolveLinearProgram(
        Make(c, a, b, std::vector<Sense>(rows + 1, Sense::kLessEqual)));
    ASSERT_EQ(r.status, LpStatus::kOptimal) << "trial " << trial;
    EXPECT_NEAR(r.objective, BruteForce2d(c, a, b), 1e-9) << "trial " << trial;
  }
}

TEST(SimplexTest, StrongDualityOnRandomPrograms) {
  // Primal max c^T x, A x <= b, x >= 0; dual min b^T y, A^T y >= c, y >= 0.
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + trial % 6, n = 2 + (trial / 6) % 6;
    Eigen::MatrixXd a(m, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = 0.1 + unit(rng);
    Eigen::VectorXd b(m), c(n);
    for (int i = 0; i < m; ++i) b[i] = 0.5 + unit(rng);
    for (int j = 0; j < n; ++j) c[j] = unit(rng) - 0.2;
    const LpResult primal = SolveLinearProgram(
        Make(c, a, b, std::vector<Sense>(m, Sense::kLessEqual)));
    const LpResult dual = SolveLinearProgram(
        Make(-b, a.transpose(), c, std::vector<Sense>(n, Sense::kGreaterEqual)));
    ASSERT_EQ(primal.status, LpStatus::kOptimal);
    ASSERT_EQ(dual.status, LpStatus::kOptimal);
    EXPECT_NEAR(primal.objective, -dual.objective, 1e-9);
    EXPECT_LE((a * primal.x - b).maxCoeff(), 1e-9);
    EXPECT_GE(primal.x.minCoeff(), -1e-12);
  }
}

}  // namespace
}  // namespace minimax_bayes
