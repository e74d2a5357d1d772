#pragma once

#include <cstdint>
#include <vector>

namespace rdt {

/// splitmix64 step: advances the state by the golden gamma and finalizes.
/// The building block of both the generator and all seed derivation.
std::uint64_t splitmix64(std::uint64_t& state);

/// Mixes two 64-bit values into one well-distributed seed.
///
/// Replication streams are derived as mix64(master_seed, replication_index)
/// and phase substreams as mix64(replication_seed, phase_tag), so every
/// stream is a pure function of (master seed, indices) and independent of
/// execution order.
std::uint64_t mix64(std::uint64_t a, std::uint64_t b);

/// Deterministic splitmix64 random stream owned by exactly one replication.
///
/// Sampling is hand-rolled on the raw 64-bit output so sequences depend only
/// on the seed, never on standard-library distribution internals. The
/// one-word state makes substream creation essentially free, which matters
/// in resampling loops.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Independent stream derived from this stream's seed and a tag.
  RngStream substream(std::uint64_t tag) const { return RngStream(mix64(seed_, tag)); }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Box-Muller without caching; consumes exactly two uniforms per call.
  double normal(double mean, double sd);

  /// Uniform integer on [lo, hi], inclusive.
  int uniform_int(int lo, int hi);

  /// Index sampled from level probabilities (assumed to sum to one).
  std::size_t categorical(const std::vector<double>& probabilities);

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

}  // namespace rdt
