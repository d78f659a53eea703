#include "minimax_bayes/rng.h"

namespace minimax_bayes {
namespace {

std::uint64_t Mix(std::uint64_t z) {
  z = (z ^ (z >> 33)) * 0xFF51AFD7ED558CCDULL;
  z = (z ^ (z >> 33)) * 0xC4CEB9FE1A85EC53ULL;
  return z ^ (z >> 33);
}

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t round,
                         std::uint64_t slot, std::uint64_t sample) {
  std::uint64_t h = Mix(master ^ 0x6A09E667F3BCC909ULL);
  h = Mix(h ^ (round + 0xBB67AE8584CAA73BULL));
  h = Mix(h ^ (slot + 0x3C6EF372FE94F82BULL));
  h = Mix(h ^ (sample + 0xA54FF53A5F1D36F1ULL));
  return h;
}

}  // namespace minimax_bayes
