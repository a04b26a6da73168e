#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace biaslab {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent stream seed from a parent seed and an index:
/// splitmix64(parent ^ splitmix64(index)).
std::uint64_t mix_seed(std::uint64_t parent, std::uint64_t index);

/// Deterministic generator: mt19937_64 with 53-bit uniforms and Marsaglia
/// polar normals, so a seed reproduces the same stream on any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double normal();   // N(0, 1)
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace biaslab
