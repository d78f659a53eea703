#include "minimax_bayes/linear_program.h"

#include <cmath>
#include <limits>

#include "minimax_bayes/common.h"

namespace minimax_bayes {
namespace {

class Tableau {
 public:
  Tableau(int rows, int cols) : t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)) {}

  int rows() const { return static_cast<int>(t_.rows()) - 1; }
  int cols() const { return static_cast<int>(t_.cols()) - 1; }
  double& at(int r, int c) { return t_(r, c); }
  double at(int r, int c) const { return t_(r, c); }
  double& rhs(int r) { return t_(r, cols()); }
  double rhs(int r) const { return t_(r, cols()); }
  double& cost(int c) { return t_(rows(), c); }
  double cost(int c) const { return t_(rows(), c); }
  double objective_value() const { return t_(rows(), cols()); }
  Eigen::MatrixXd::RowXpr row(int r) { return t_.row(r); }
  Eigen::MatrixXd::RowXpr objective_row() { return t_.row(rows()); }

  void Pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i <= rows(); ++i) {
      if (i == r) continue;
      const double factor = t_(i, c);
      if (factor != 0.0) t_.row(i) -= factor * t_.row(r);
    }
  }

 private:
  Eigen::MatrixXd t_;
};

enum class PhaseOutcome { kOptimal, kUnbounded, kIterationLimit };

// Bland's rule on the current objective row. Columns with allowed[c] == false
// never enter.
PhaseOutcome RunPhase(Tableau& tab, std::vector<int>& basis,
                      const std::vector<bool>& allowed,
                      const SimplexOptions& options, int max_iterations,
                      int* iterations) {
  const double tol = options.pivot_tolerance;
  while (true) {
    int entering = -1;
    for (int c = 0; c < tab.cols(); ++c) {
      if (allowed[c] && tab.cost(c) < -tol) {
        entering = c;
        break;
      }
    }
    if (entering < 0) return PhaseOutcome::kOptimal;
    if (*iterations >= max_iterations) return PhaseOutcome::kIterationLimit;

    // Minimum ratio, then the smallest basic index among near-ties.
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < tab.rows(); ++r) {
      const double a = tab.at(r, entering);
      if (a > tol) best_ratio = std::min(best_ratio, tab.rhs(r) / a);
    }
    int leaving = -1;
    if (std::isfinite(best_ratio)) {
      const double slack = 1e-12 * std::max(1.0, std::abs(best_ratio));
      for (int r = 0; r < tab.rows(); ++r) {
        const double a = tab.at(r, entering);
        if (a <= tol || tab.rhs(r) / a > best_ratio + slack) continue;
        if (leaving < 0 || basis[r] < basis[leaving]) leaving = r;
      }
    }
    if (leaving < 0) return PhaseOutcome::kUnbounded;
    tab.Pivot(leaving, entering);
    basis[leaving] = entering;
    ++*iterations;
  }
}

}  // namespace

std::string ToString(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
    case LpStatus::kIterationLimit:
      return "iteration limit";
  }
  return "unknown";
}

LpResult SolveLinearProgram(const LinearProgram& lp,
                            const SimplexOptions& options) {
  const int m = static_cast<int>(lp.constraints.rows());
  const int n = static_cast<int>(lp.objective.size());
  if (lp.constraints.cols() != n || lp.rhs.size() != m ||
      static_cast<int>(lp.senses.size()) != m) {
    throw InvalidInputError("linear_program", "inconsistent dimensions");
  }

  // Normalize to nonnegative right-hand sides.
  Eigen::MatrixXd a = lp.constraints;
  Eigen::VectorXd b = lp.rhs;
  std::vector<ConstraintSense> senses = lp.senses;
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      a.row(i) *= -1.0;
      b[i] = -b[i];
      if (senses[i] == ConstraintSense::kLessEqual) {
        senses[i] = ConstraintSense::kGreaterEqual;
      } else if (senses[i] == ConstraintSense::kGreaterEqual) {
        senses[i] = ConstraintSense::kLessEqual;
      }
    }
  }

  int slack_count = 0;
  int artificial_count = 0;
  for (ConstraintSense s : senses) {
    if (s != ConstraintSense::kEqual) ++slack_count;
    if (s != ConstraintSense::kLessEqual) ++artificial_count;
  }
  const int total = n + slack_count + artificial_count;
  const int first_artificial = n + slack_count;

  Tableau tab(m, total);
  std::vector<int> basis(m, -1);
  int next_slack = n;
  int next_artificial = first_artificial;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) tab.at(i, j) = a(i, j);
    tab.rhs(i) = b[i];
    switch (senses[i]) {
      case ConstraintSense::kLessEqual:
        tab.at(i, next_slack) = 1.0;
        basis[i] = next_slack++;
        break;
      case ConstraintSense::kGreaterEqual:
        tab.at(i, next_slack++) = -1.0;
        tab.at(i, next_artificial) = 1.0;
        basis[i] = next_artificial++;
        break;
      case ConstraintSense::kEqual:
        tab.at(i, next_artificial) = 1.0;
        basis[i] = next_artificial++;
        break;
    }
  }

  const int max_iterations =
      options.max_iterations > 0 ? options.max_iterations
                                 : 50 * (m + total) + 1000;
  LpResult result;

  // Phase one: maximize -(sum of artificials).
  std::vector<bool> allowed(total, true);
  if (artificial_count > 0) {
    for (int c = first_artificial; c < total; ++c) tab.cost(c) = 1.0;
    for (int i = 0; i < m; ++i) {
      if (basis[i] >= first_artificial) tab.objective_row() -= tab.row(i);
    }
    const PhaseOutcome outcome = RunPhase(tab, basis, allowed, options,
                                          max_iterations,
                                          &result.phase1_iterations);
    if (outcome == PhaseOutcome::kIterationLimit) {
      result.status = LpStatus::kIterationLimit;
      return result;
    }
    result.infeasibility = -tab.objective_value();
    if (result.infeasibility > options.feasibility_tolerance) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    // Drive zero-valued artificials out of the basis where possible; rows
    // with no eligible pivot are redundant and keep their artificial at 0.
    for (int i = 0; i < m; ++i) {
      if (basis[i] < first_artificial) continue;
      for (int c = 0; c < first_artificial; ++c) {
        if (std::abs(tab.at(i, c)) > options.pivot_tolerance) {
          tab.Pivot(i, c);
          basis[i] = c;
          break;
        }
      }
    }
    for (int c = first_artificial; c < total; ++c) allowed[c] = false;
  }

  // Phase two.
  tab.objective_row().setZero();
  for (int j = 0; j < n; ++j) tab.cost(j) = -lp.objective[j];
  for (int i = 0; i < m; ++i) {
    const int col = basis[i];
    if (col < n && lp.objective[col] != 0.0) {
      tab.objective_row() += lp.objective[col] * tab.row(i);
    }
  }
  const PhaseOutcome outcome = RunPhase(tab, basis, allowed, options,
                                        max_iterations - result.phase1_iterations,
                                        &result.phase2_iterations);
  if (outcome == PhaseOutcome::kUnbounded) {
    result.status = LpStatus::kUnbounded;
    return result;
  }
  if (outcome == PhaseOutcome::kIterationLimit) {
    result.status = LpStatus::kIterationLimit;
    return result;
  }

  result.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) result.x[basis[i]] = std::max(0.0, tab.rhs(i));
  }
  result.objective = lp.objective.dot(result.x);
  result.status = LpStatus::kOptimal;
  return result;
}

}  // namespace minimax_bayes
