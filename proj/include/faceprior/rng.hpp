#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace faceprior {

/// Seedable pseudo-random stream. Identical seeds give identical sequences.
///
/// Parallel code never shares an Rng: it draws one base value from the
/// caller's stream and gives work item `i` its own `Rng(derive_seed(base, i))`,
/// so results do not depend on scheduling or thread count.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }

  double normal() { return normal_(engine_); }

  bool bernoulli(double p) { return uniform() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  /// Independent child stream; advances this stream by one draw.
  Rng fork() { return Rng(derive_seed(next_u64(), 0)); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};

 public:
  /// SplitMix64 finalizer over (seed, stream).
  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

  /// Seed for a named pipeline stage, derived from a master seed.
  static std::uint64_t stage_seed(std::uint64_t master, std::string_view stage);
};

}  // namespace faceprior
