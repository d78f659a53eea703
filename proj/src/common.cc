#include "minimax_bayes/common.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace minimax_bayes {

InvalidInputError::InvalidInputError(std::string path,
                                     const std::string& message)
    : std::invalid_argument(path.empty() ? message : path + ": " + message),
      path_(std::move(path)) {}

void ValidateProbabilityVector(const Eigen::VectorXd& values,
                               const std::string& path) {
  if (values.size() == 0) {
    throw InvalidInputError(path, "probability vector is empty");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      std::ostringstream msg;
      msg << "entry " << i << " is " << values[i]
          << ", expected a finite nonnegative probability";
      throw InvalidInputError(path + "[" + std::to_string(i) + "]", msg.str());
    }
    total += values[i];
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "probabilities sum to " << total << ", expected 1";
    throw InvalidInputError(path, msg.str());
  }
}

StateDistribution::StateDistribution(Eigen::VectorXd weights)
    : weights_(std::move(weights)) {
  ValidateProbabilityVector(weights_, "init");
}

StateDistribution StateDistribution::PointMass(int num_states, int state) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(num_states);
  w[state] = 1.0;
  return StateDistribution(std::move(w));
}

StateDistribution StateDistribution::Uniform(int num_states) {
  return StateDistribution(
      Eigen::VectorXd::Constant(num_states, 1.0 / num_states));
}

Belief::Belief(Eigen::VectorXd probs) : probs_(std::move(probs)) {
  ValidateProbabilityVector(probs_, "belief");
}

Belief Belief::PointMass(int num_mdps, int index) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(num_mdps);
  p[index] = 1.0;
  return Belief(std::move(p));
}

Belief Belief::Uniform(int num_mdps) {
  return Belief(Eigen::VectorXd::Constant(num_mdps, 1.0 / num_mdps));
}

int Belief::Mode() const {
  int best = 0;
  for (int m = 1; m < size(); ++m) {
    if (probs_[m] > probs_[best]) best = m;
  }
  return best;
}

Eigen::VectorXd CleanSimplexPoint(const Eigen::VectorXd& values) {
  Eigen::VectorXd out = values;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0) out[i] = 0.0;
  }
  const double total = out.sum();
  if (total > 0.0) out /= total;
  return out;
}

int ArgMaxFirst(const Eigen::VectorXd& values) {
  const double best = values.maxCoeff();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] >= best - kTieTolerance) return static_cast<int>(i);
  }
  return 0;
}

int ArgMinFirst(const Eigen::VectorXd& values) {
  const double best = values.minCoeff();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] <= best + kTieTolerance) return static_cast<int>(i);
  }
  return 0;
}

int ConfiguredThreadCount() {
  int threads = 0;
  if (const char* env = std::getenv("MINIMAX_BAYES_THREADS")) {
    threads = std::atoi(env);
  }
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
  }
  return std::max(threads, 1);
}

void ParallelFor(std::size_t count, const std::function<void(std::size_t)>& body,
                 int threads) {
  if (threads <= 0) threads = ConfiguredThreadCount();
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    try {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = count;
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace minimax_bayes
