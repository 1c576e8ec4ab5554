#pragma once

#include <cstdint>
#include <random>

namespace riskalloc {

/// Seeds with this bit set are reserved for evaluation streams, so a policy is
/// never scored on the fading path it was trained on.
inline constexpr std::uint64_t kEvaluationSeedBit = std::uint64_t{1} << 63;

inline constexpr std::uint64_t evaluation_seed(std::uint64_t seed) {
  return seed | kEvaluationSeedBit;
}

/// splitmix64 finalizer; used to derive independent worker streams.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed of the `index`-th substream of `base`. Independent of thread count.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Reproducible uniform stream. Draws are bit-identical across platforms
/// because the mapping from engine output to (0,1) is done here rather than by
/// std::uniform_real_distribution.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  /// Uniform on the open interval (0,1).
  double uniform() {
    constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
    return (static_cast<double>(engine_() >> 11) + 0.5) * kScale;
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace riskalloc
