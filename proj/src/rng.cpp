#include "bayes/rng.hpp"

namespace bayes {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream RngStream::derive(std::uint64_t a, std::uint64_t b) const {
  return RngStream{mix_seed(mix_seed(seed_ ^ mix_seed(a)) + b)};
}

}  // namespace bayes
