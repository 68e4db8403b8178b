#ifndef BAYES_RNG_HPP
#define BAYES_RNG_HPP

#include <cstdint>
#include <random>

namespace bayes {

/// Owned, explicitly passed random stream. Every stochastic operation takes
/// one by reference; identical seeds reproduce identical draws.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : seed_{seed}, engine_{seed} {}

  std::uint64_t seed() const { return seed_; }

  /// Standard normal draw.
  double normal() { return normal_(engine_); }

  /// Uniform draw on [0, 1).
  double uniform() { return uniform_(engine_); }

  /// Uniform draw on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Independent stream keyed by (seed, a, b), e.g. (step, particle) or
  /// (restart index). Does not advance this stream.
  RngStream derive(std::uint64_t a, std::uint64_t b = 0) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// SplitMix64 finalizer, used for seed derivation.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace bayes

#endif  // BAYES_RNG_HPP
