#ifndef MINIMAX_BAYES_COMMON_H_
#define MINIMAX_BAYES_COMMON_H_

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace minimax_bayes {

// Probability vectors must sum to one within this tolerance.
inline constexpr double kSimplexTolerance = 1e-9;

// Two scores closer than this are treated as tied; ties go to the smallest
// index.
inline constexpr double kTieTolerance = 1e-12;

// Malformed or inconsistent input. `path()` names the offending location, e.g.
// "$.mdps[1].transitions[0][1]" for file input or "transitions[0][1]" for
// in-memory construction.
class InvalidInputError : public std::invalid_argument {
 public:
  InvalidInputError(std::string path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// A requested object would exceed a configured size cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// A restricted prior set admits no belief.
class InfeasibleRestrictionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical solver failed to reach a certified answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws InvalidInputError unless `values` is nonnegative and sums to one.
void ValidateProbabilityVector(const Eigen::VectorXd& values,
                               const std::string& path);

// Probability vector over the states of an MDP (start distribution or the
// state weighting of a loss).
class StateDistribution {
 public:
  explicit StateDistribution(Eigen::VectorXd weights);
  static StateDistribution PointMass(int num_states, int state);
  static StateDistribution Uniform(int num_states);

  const Eigen::VectorXd& weights() const { return weights_; }
  int size() const { return static_cast<int>(weights_.size()); }
  double operator[](int s) const { return weights_[s]; }
  bool operator==(const StateDistribution& other) const {
    return weights_ == other.weights_;
  }

 private:
  Eigen::VectorXd weights_;
};

// Prior over a finite set of MDPs (nature's move).
class Belief {
 public:
  explicit Belief(Eigen::VectorXd probs);
  static Belief PointMass(int num_mdps, int index);
  static Belief Uniform(int num_mdps);

  const Eigen::VectorXd& probs() const { return probs_; }
  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int m) const { return probs_[m]; }

  // Index of the largest mass, smallest index on ties.
  int Mode() const;

 private:
  Eigen::VectorXd probs_;
};

// Clips entries within kSimplexTolerance of zero and rescales to sum one.
Eigen::VectorXd CleanSimplexPoint(const Eigen::VectorXd& values);

// Smallest index whose value is within kTieTolerance of the maximum.
int ArgMaxFirst(const Eigen::VectorXd& values);
// Smallest index whose value is within kTieTolerance of the minimum.
int ArgMinFirst(const Eigen::VectorXd& values);

// Worker count from MINIMAX_BAYES_THREADS; 0 or unset means hardware
// concurrency.
int ConfiguredThreadCount();

// Runs body(i) for i in [0, count) on up to `threads` workers (0 = configured
// default). Each index is visited exactly once; callers must write only to
// per-index state.
void ParallelFor(std::size_t count, const std::function<void(std::size_t)>& body,
                 int threads = 0);

}  // namespace minimax_bayes

#endif  // MINIMAX_BAYES_COMMON_H_
