#ifndef MINIMAX_BAYES_GAME_H_
#define MINIMAX_BAYES_GAME_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "minimax_bayes/common.h"
#include "minimax_bayes/linear_program.h"
#include "minimax_bayes/mdp.h"
#include "minimax_bayes/policy_space.h"

namespace minimax_bayes {

// Primal and dual game values of an exact solution must agree to this.
inline constexpr double kDualityTolerance = 1e-7;

// N x M table of utilities: entry (i, m) = U(mu_m, pi_i). The decision maker
// picks rows and maximizes, nature picks columns and minimizes. Entries are
// finite and in [-1, 1].
class PayoffMatrix {
 public:
  explicit PayoffMatrix(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const { return values_; }
  int num_policies() const { return static_cast<int>(values_.rows()); }
  int num_mdps() const { return static_cast<int>(values_.cols()); }
  double operator()(int i, int m) const { return values_(i, m); }

  // u_xi: expected payoff of every policy under `belief`.
  Eigen::VectorXd PolicyPayoffs(const Belief& belief) const;
  // q^T U: expected payoff of the mixture `q` on every MDP.
  Eigen::VectorXd MdpPayoffs(const Eigen::VectorXd& q) const;

 private:
  Eigen::MatrixXd values_;
};

// Entry (i, m) = Utility(mdps[m], policies[i], init). Entries are evaluated in
// parallel; the result does not depend on the thread count.
PayoffMatrix BuildPayoffMatrix(std::span<const Mdp> mdps,
                               const PolicySet& policies,
                               const StateDistribution& init, int threads = 0);

struct GameSolution {
  double value = 0.0;
  Eigen::VectorXd policy_distribution;  // maximin mixture over policies
  Belief belief = Belief::PointMass(1, 0);  // minimax prior
  std::string method;
  // max_i (U xi)_i - min_m (q^T U)_m for the returned pair.
  double duality_gap = 0.0;
  int iterations = 0;
};

// Duality gap of an arbitrary strategy pair.
double StrategyGap(const Eigen::MatrixXd& values, const Eigen::VectorXd& q,
                   const Eigen::VectorXd& xi);

// Point mass on argmin_m (q^T U)_m, smallest index on ties.
Belief NatureBestResponse(const Eigen::VectorXd& q, const PayoffMatrix& payoff);
Belief NatureBestResponse(const Eigen::VectorXd& q,
                          const Eigen::MatrixXd& values);

// Minimizes q^T U xi over beliefs in the restricted set by linear programming.
// Throws InfeasibleRestrictionError if the set is empty.
Belief NatureBestResponseConstrained(const Eigen::VectorXd& q,
                                     const PayoffMatrix& payoff,
                                     const RestrictedPriorSet& restriction);
Belief NatureBestResponseConstrained(const Eigen::VectorXd& q,
                                     const Eigen::MatrixXd& values,
                                     const RestrictedPriorSet& restriction);

// Solves max_q min_m q^T U e_m and the nature-side program
// min_xi max_i e_i^T U xi separately, then certifies that the two values agree
// within kDualityTolerance. Throws SolverError otherwise.
GameSolution ExactGameValue(const PayoffMatrix& payoff);

// Same, with nature restricted to `restriction`. The nature-side program is
// the restricted one, so this is the value of the restricted game.
GameSolution ExactGameValue(const PayoffMatrix& payoff,
                            const RestrictedPriorSet& restriction);

struct FictitiousPlayResult {
  GameSolution solution;  // value is the bracket midpoint
  double lower = 0.0;     // min_m (q_bar^T U)_m
  double upper = 0.0;     // max_i (U xi_bar)_i
  std::vector<double> gap_history;  // upper - lower after each round
  std::vector<int> policy_choices;
  std::vector<int> mdp_choices;
};

// Payoff estimate used by both players in round `round` (1-based).
using PayoffEstimateStream = std::function<Eigen::MatrixXd(int round)>;

// Simultaneous fictitious play: each round both players best-respond to the
// opponent's empirical mixture (uniform before the first round), ties to the
// smallest index.
FictitiousPlayResult FictitiousPlay(const PayoffMatrix& payoff, int rounds);

// Fictitious play on a stream of estimates. Bounds and the gap history are
// evaluated on `evaluation` (typically the exact matrix).
FictitiousPlayResult FictitiousPlay(const PayoffEstimateStream& stream,
                                    int rounds, const PayoffMatrix& evaluation);

}  // namespace minimax_bayes

#endif  // MINIMAX_BAYES_GAME_H_
