#include "minimax_bayes/game.h"

#include <cmath>
#include <sstream>

namespace minimax_bayes {
namespace {

void CheckDistributionLength(const Eigen::VectorXd& q, int n) {
  if (q.size() != n) {
    throw InvalidInputError("q", "length " + std::to_string(q.size()) +
                                     " does not match " + std::to_string(n) +
                                     " policies");
  }
}

std::string Diagnostics(const LpResult& r) {
  std::ostringstream msg;
  msg << "status=" << ToString(r.status)
      << " phase1_iterations=" << r.phase1_iterations
      << " phase2_iterations=" << r.phase2_iterations
      << " infeasibility=" << r.infeasibility;
  return msg.str();
}

// Appends the two-sided band |Phi^T xi - target| <= tol on the columns
// [offset, offset + M) of `rows`, starting at row `first_row`.
void AddRestrictionRows(const RestrictedPriorSet& restriction, int offset,
                        int first_row, LinearProgram& lp) {
  const int k = restriction.dimension();
  const int m_count = restriction.num_mdps();
  for (int j = 0; j < k; ++j) {
    for (int m = 0; m < m_count; ++m) {
      const double phi = restriction.statistic_values()(m, j);
      lp.constraints(first_row + 2 * j, offset + m) = phi;
      lp.constraints(first_row + 2 * j + 1, offset + m) = phi;
    }
    lp.rhs[first_row + 2 * j] = restriction.target()[j] + restriction.tolerance();
    lp.senses[first_row + 2 * j] = ConstraintSense::kLessEqual;
    lp.rhs[first_row + 2 * j + 1] =
        restriction.target()[j] - restriction.tolerance();
    lp.senses[first_row + 2 * j + 1] = ConstraintSense::kGreaterEqual;
  }
}

bool AllEqual(const Eigen::MatrixXd& values) {
  return values.maxCoeff() - values.minCoeff() <= 0.0;
}

// Nature side: min w s.t. U xi <= w 1, xi in the simplex (and restriction).
// Payoffs are shifted so w stays nonnegative.
LpResult SolveNatureProgram(const Eigen::MatrixXd& values, double shift,
                            const RestrictedPriorSet* restriction) {
  const int n = static_cast<int>(values.rows());
  const int m = static_cast<int>(values.cols());
  const int k = restriction ? restriction->dimension() : 0;
  LinearProgram lp;
  lp.objective = Eigen::VectorXd::Zero(m + 1);
  lp.objective[m] = -1.0;
  lp.constraints = Eigen::MatrixXd::Zero(n + 1 + 2 * k, m + 1);
  lp.rhs = Eigen::VectorXd::Zero(n + 1 + 2 * k);
  lp.senses.assign(n + 1 + 2 * k, ConstraintSense::kLessEqual);
  for (int i = 0; i < n; ++i) {
    lp.constraints.row(i).head(m) = values.row(i).array() + shift;
    lp.constraints(i, m) = -1.0;
  }
  lp.constraints.row(n).head(m).setOnes();
  lp.rhs[n] = 1.0;
  lp.senses[n] = ConstraintSense::kEqual;
  if (restriction) AddRestrictionRows(*restriction, 0, n + 1, lp);
  return SolveLinearProgram(lp);
}

}  // namespace

PayoffMatrix::PayoffMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw InvalidInputError("payoff", "payoff matrix is empty");
  }
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    for (Eigen::Index m = 0; m < values_.cols(); ++m) {
      const double v = values_(i, m);
      if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "payoff " << v
            << " outside [-1, 1]; rewards must be normalized first";
        throw InvalidInputError("payoff[" + std::to_string(i) + "][" +
                                    std::to_string(m) + "]",
                                msg.str());
      }
    }
  }
}

Eigen::VectorXd PayoffMatrix::PolicyPayoffs(const Belief& belief) const {
  if (belief.size() != num_mdps()) {
    throw InvalidInputError("belief", "length does not match the payoff matrix");
  }
  return values_ * belief.probs();
}

Eigen::VectorXd PayoffMatrix::MdpPayoffs(const Eigen::VectorXd& q) const {
  CheckDistributionLength(q, num_policies());
  return values_.transpose() * q;
}

PayoffMatrix BuildPayoffMatrix(std::span<const Mdp> mdps,
                               const PolicySet& policies,
                               const StateDistribution& init, int threads) {
  const int n = policies.size();
  const int m = static_cast<int>(mdps.size());
  if (m == 0) throw InvalidInputError("mdps", "no MDPs");
  Eigen::MatrixXd values(n, m);
  ParallelFor(
      static_cast<std::size_t>(n) * m,
      [&](std::size_t idx) {
        const int i = static_cast<int>(idx / m);
        const int j = static_cast<int>(idx % m);
        values(i, j) = Utility(mdps[j], policies[i], init);
      },
      threads);
  return PayoffMatrix(std::move(values));
}

double StrategyGap(const Eigen::MatrixXd& values, const Eigen::VectorXd& q,
                   const Eigen::VectorXd& xi) {
  return (values * xi).maxCoeff() - (values.transpose() * q).minCoeff();
}

Belief NatureBestResponse(const Eigen::VectorXd& q,
                          const Eigen::MatrixXd& values) {
  CheckDistributionLength(q, static_cast<int>(values.rows()));
  const Eigen::VectorXd column_payoffs = values.transpose() * q;
  return Belief::PointMass(static_cast<int>(values.cols()),
                           ArgMinFirst(column_payoffs));
}

Belief NatureBestResponse(const Eigen::VectorXd& q, const PayoffMatrix& payoff) {
  return NatureBestResponse(q, payoff.values());
}

Belief NatureBestResponseConstrained(const Eigen::VectorXd& q,
                                     const Eigen::MatrixXd& values,
                                     const RestrictedPriorSet& restriction) {
  CheckDistributionLength(q, static_cast<int>(values.rows()));
  const int m = static_cast<int>(values.cols());
  if (restriction.num_mdps() != m) {
    throw InvalidInputError("restriction",
                            "statistic rows do not match the MDP count");
  }
  const int k = restriction.dimension();
  LinearProgram lp;
  lp.objective = -(values.transpose() * q);
  lp.constraints = Eigen::MatrixXd::Zero(1 + 2 * k, m);
  lp.rhs = Eigen::VectorXd::Zero(1 + 2 * k);
  lp.senses.assign(1 + 2 * k, ConstraintSense::kLessEqual);
  lp.constraints.row(0).setOnes();
  lp.rhs[0] = 1.0;
  lp.senses[0] = ConstraintSense::kEqual;
  AddRestrictionRows(restriction, 0, 1, lp);
  const LpResult result = SolveLinearProgram(lp);
  if (result.status == LpStatus::kInfeasible) {
    std::ostringstream msg;
    msg << "restricted prior set is empty (infeasibility "
        << result.infeasibility << ", tolerance " << restriction.tolerance()
        << ")";
    throw InfeasibleRestrictionError(msg.str());
  }
  if (result.status != LpStatus::kOptimal) {
    throw SolverError("constrained best response failed: " +
                      Diagnostics(result));
  }
  return Belief(CleanSimplexPoint(result.x));
}

Belief NatureBestResponseConstrained(const Eigen::VectorXd& q,
                                     const PayoffMatrix& payoff,
                                     const RestrictedPriorSet& restriction) {
  return NatureBestResponseConstrained(q, payoff.values(), restriction);
}

GameSolution ExactGameValue(const PayoffMatrix& payoff) {
  const Eigen::MatrixXd& values = payoff.values();
  const int n = payoff.num_policies();
  const int m = payoff.num_mdps();
  GameSolution solution;
  solution.method = "exact";
  if (AllEqual(values)) {
    solution.value = values(0, 0);
    solution.policy_distribution = Eigen::VectorXd::Constant(n, 1.0 / n);
    solution.belief = Belief::Uniform(m);
    solution.duality_gap = 0.0;
    return solution;
  }
  const double shift = 1.0 - values.minCoeff();

  // Decision maker: max v s.t. v - sum_i q_i (U_im + shift) <= 0, sum q = 1.
  LinearProgram primal;
  primal.objective = Eigen::VectorXd::Zero(n + 1);
  primal.objective[n] = 1.0;
  primal.constraints = Eigen::MatrixXd::Zero(m + 1, n + 1);
  primal.rhs = Eigen::VectorXd::Zero(m + 1);
  primal.senses.assign(m + 1, ConstraintSense::kLessEqual);
  for (int j = 0; j < m; ++j) {
    primal.constraints.row(j).head(n) = -(values.col(j).array() + shift);
    primal.constraints(j, n) = 1.0;
  }
  primal.constraints.row(m).head(n).setOnes();
  primal.rhs[m] = 1.0;
  primal.senses[m] = ConstraintSense::kEqual;
  const LpResult primal_result = SolveLinearProgram(primal);
  if (primal_result.status != LpStatus::kOptimal) {
    throw SolverError("decision-maker program failed: " +
                      Diagnostics(primal_result));
  }
  const LpResult dual_result = SolveNatureProgram(values, shift, nullptr);
  if (dual_result.status != LpStatus::kOptimal) {
    throw SolverError("nature program failed: " + Diagnostics(dual_result));
  }

  solution.policy_distribution = CleanSimplexPoint(primal_result.x.head(n));
  solution.belief = Belief(CleanSimplexPoint(dual_result.x.head(m)));
  solution.value = primal_result.x[n] - shift;
  solution.iterations = primal_result.phase1_iterations +
                        primal_result.phase2_iterations +
                        dual_result.phase1_iterations +
                        dual_result.phase2_iterations;
  solution.duality_gap = StrategyGap(values, solution.policy_distribution,
                                     solution.belief.probs());
  const double nature_value = dual_result.x[m] - shift;
  if (std::abs(solution.duality_gap) > kDualityTolerance ||
      std::abs(nature_value - solution.value) > kDualityTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "duality check failed: primal " << solution.value << ", dual "
        << nature_value << ", strategy gap " << solution.duality_gap << " ("
        << Diagnostics(primal_result) << "; " << Diagnostics(dual_result)
        << ")";
    throw SolverError(msg.str());
  }
  return solution;
}

GameSolution ExactGameValue(const PayoffMatrix& payoff,
                            const RestrictedPriorSet& restriction) {
  const Eigen::MatrixXd& values = payoff.values();
  const int n = payoff.num_policies();
  const int m = payoff.num_mdps();
  if (restriction.num_mdps() != m) {
    throw InvalidInputError("restriction",
                            "statistic rows do not match the MDP count");
  }
  const int k = restriction.dimension();
  const double shift = 1.0 - values.minCoeff();
  const Eigen::MatrixXd& phi = restriction.statistic_values();
  const double tol = restriction.tolerance();

  // Decision maker: the inner minimum over the restricted set is replaced by
  // its LP dual. Variables: q (n), lambda+ , lambda-, alpha (k), beta (k).
  // max lambda - (target + tol)^T alpha + (target - tol)^T beta
  // s.t. lambda - (Phi alpha)_m + (Phi beta)_m - (U^T q)_m <= 0 for each m,
  //      sum q = 1.
  const int cols = n + 2 + 2 * k;
  LinearProgram primal;
  primal.objective = Eigen::VectorXd::Zero(cols);
  primal.objective[n] = 1.0;
  primal.objective[n + 1] = -1.0;
  for (int j = 0; j < k; ++j) {
    primal.objective[n + 2 + j] = -(restriction.target()[j] + tol);
    primal.objective[n + 2 + k + j] = restriction.target()[j] - tol;
  }
  primal.constraints = Eigen::MatrixXd::Zero(m + 1, cols);
  primal.rhs = Eigen::VectorXd::Zero(m + 1);
  primal.senses.assign(m + 1, ConstraintSense::kLessEqual);
  for (int j = 0; j < m; ++j) {
    primal.constraints.row(j).head(n) = -(values.col(j).array() + shift);
    primal.constraints(j, n) = 1.0;
    primal.constraints(j, n + 1) = -1.0;
    for (int s = 0; s < k; ++s) {
      primal.constraints(j, n + 2 + s) = -phi(j, s);
      primal.constraints(j, n + 2 + k + s) = phi(j, s);
    }
  }
  primal.constraints.row(m).head(n).setOnes();
  primal.rhs[m] = 1.0;
  primal.senses[m] = ConstraintSense::kEqual;

  const LpResult dual_result = SolveNatureProgram(values, shift, &restriction);
  if (dual_result.status == LpStatus::kInfeasible) {
    throw InfeasibleRestrictionError("restricted prior set is empty");
  }
  if (dual_result.status != LpStatus::kOptimal) {
    throw SolverError("nature program failed: " + Diagnostics(dual_result));
  }
  const LpResult primal_result = SolveLinearProgram(primal);
  if (primal_result.status != LpStatus::kOptimal) {
    throw SolverError("decision-maker program failed: " +
                      Diagnostics(primal_result));
  }

  GameSolution solution;
  solution.method = "exact-restricted";
  solution.policy_distribution = CleanSimplexPoint(primal_result.x.head(n));
  solution.belief = Belief(CleanSimplexPoint(dual_result.x.head(m)));
  solution.value = dual_result.x[m] - shift;
  solution.iterations = primal_result.phase1_iterations +
                        primal_result.phase2_iterations +
                        dual_result.phase1_iterations +
                        dual_result.phase2_iterations;
  const Belief worst = NatureBestResponseConstrained(
      solution.policy_distribution, values, restriction);
  const double guaranteed =
      solution.policy_distribution.dot(values * worst.probs());
  solution.duality_gap =
      (values * solution.belief.probs()).maxCoeff() - guaranteed;
  if (std::abs(solution.duality_gap) > kDualityTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "restricted duality check failed: nature value " << solution.value
        << ", guaranteed " << guaranteed << " ("
        << Diagnostics(primal_result) << "; " << Diagnostics(dual_result)
        << ")";
    throw SolverError(msg.str());
  }
  return solution;
}

namespace {

FictitiousPlayResult RunFictitiousPlay(
    const std::function<const Eigen::MatrixXd&(int)>& estimate, int rounds,
    const Eigen::MatrixXd& evaluation) {
  if (rounds < 1) throw InvalidInputError("rounds", "need at least one round");
  const int n = static_cast<int>(evaluation.rows());
  const int m = static_cast<int>(evaluation.cols());
  Eigen::VectorXd policy_counts = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd mdp_counts = Eigen::VectorXd::Zero(m);
  // Running U * mdp_counts and U^T * policy_counts on the evaluation matrix.
  Eigen::VectorXd eval_row_sums = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd eval_col_sums = Eigen::VectorXd::Zero(m);

  FictitiousPlayResult result;
  result.gap_history.reserve(rounds);
  result.policy_choices.reserve(rounds);
  result.mdp_choices.reserve(rounds);
  for (int t = 1; t <= rounds; ++t) {
    const Eigen::MatrixXd& u = estimate(t);
    if (u.rows() != n || u.cols() != m) {
      throw InvalidInputError("estimate", "estimate has the wrong shape");
    }
    const Eigen::VectorXd nature_mix =
        t == 1 ? Eigen::VectorXd::Constant(m, 1.0 / m)
               : Eigen::VectorXd(mdp_counts / (t - 1));
    const Eigen::VectorXd policy_mix =
        t == 1 ? Eigen::VectorXd::Constant(n, 1.0 / n)
               : Eigen::VectorXd(policy_counts / (t - 1));
    const int i = ArgMaxFirst(u * nature_mix);
    const int j = ArgMinFirst(u.transpose() * policy_mix);
    policy_counts[i] += 1.0;
    mdp_counts[j] += 1.0;
    eval_row_sums += evaluation.col(j);
    eval_col_sums += evaluation.row(i).transpose();
    result.policy_choices.push_back(i);
    result.mdp_choices.push_back(j);
    result.gap_history.push_back((eval_row_sums.maxCoeff() -
                                  eval_col_sums.minCoeff()) /
                                 t);
  }
  result.lower = eval_col_sums.minCoeff() / rounds;
  result.upper = eval_row_sums.maxCoeff() / rounds;
  result.solution.method = "fictitious";
  result.solution.policy_distribution = policy_counts / rounds;
  result.solution.belief = Belief(CleanSimplexPoint(mdp_counts / rounds));
  result.solution.value = 0.5 * (result.lower + result.upper);
  result.solution.duality_gap = result.upper - result.lower;
  result.solution.iterations = rounds;
  return result;
}

}  // namespace

FictitiousPlayResult FictitiousPlay(const PayoffMatrix& payoff, int rounds) {
  return RunFictitiousPlay(
      [&](int) -> const Eigen::MatrixXd& { return payoff.values(); }, rounds,
      payoff.values());
}

FictitiousPlayResult FictitiousPlay(const PayoffEstimateStream& stream,
                                    int rounds,
                                    const PayoffMatrix& evaluation) {
  Eigen::MatrixXd current;
  return RunFictitiousPlay(
      [&](int t) -> const Eigen::MatrixXd& {
        current = stream(t);
        return current;
      },
      rounds, evaluation.values());
}

}  // namespace minimax_bayes
