#ifndef MINIMAX_BAYES_RNG_H_
#define MINIMAX_BAYES_RNG_H_

#include <cstdint>
#include <limits>

namespace minimax_bayes {

// SplitMix64 stream. Small state, cheap to seed, which matters because every
// rollout gets its own stream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

// Stream key for one rollout. Distinct (master, round, slot, sample) tuples
// give statistically independent streams, so results never depend on the order
// in which rollouts are executed.
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t round,
                         std::uint64_t slot, std::uint64_t sample);

}  // namespace minimax_bayes

#endif  // MINIMAX_BAYES_RNG_H_
