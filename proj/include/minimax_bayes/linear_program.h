#ifndef MINIMAX_BAYES_LINEAR_PROGRAM_H_
#define MINIMAX_BAYES_LINEAR_PROGRAM_H_

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace minimax_bayes {

enum class ConstraintSense { kLessEqual, kEqual, kGreaterEqual };

// maximize objective^T x  subject to  row_i(constraints) x (sense_i) rhs_i,
// x >= 0.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd constraints;
  Eigen::VectorXd rhs;
  std::vector<ConstraintSense> senses;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

std::string ToString(LpStatus status);

struct SimplexOptions {
  double pivot_tolerance = 1e-11;
  double feasibility_tolerance = 1e-9;
  // 0 picks 50 * (rows + columns) + 1000.
  int max_iterations = 0;
};

struct LpResult {
  LpStatus status = LpStatus::kIterationLimit;
  Eigen::VectorXd x;
  double objective = 0.0;
  int phase1_iterations = 0;
  int phase2_iterations = 0;
  // Sum of artificial variables left after phase one; > 0 means infeasible.
  double infeasibility = 0.0;
};

// Two-phase dense tableau simplex with Bland's rule for both the entering and
// leaving choice, so it terminates on degenerate problems and its pivots are
// reproducible.
LpResult SolveLinearProgram(const LinearProgram& lp,
                            const SimplexOptions& options = {});

}  // namespace minimax_bayes

#endif  // MINIMAX_BAYES_LINEAR_PROGRAM_H_
