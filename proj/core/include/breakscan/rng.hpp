#pragma once

#include <cstdint>

namespace breakscan {

// Seeded random stream (xoshiro256++ state, seeded through splitmix64).
// Streams are derived from a (master seed, index pair) key rather than
// from evolving generator state, so replicate r of an experiment can be
// regenerated in isolation and parallel workers never share a stream.
class RngStream {
 public:
  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed) : RngStream(seed, 0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t id0, std::uint64_t id1);

  std::uint64_t next_u64();

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01();

  // Standard normal via Box-Muller; consumes uniforms in pairs and
  // caches the second variate.
  double gaussian();

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream for replicate/work-item `index` under `master_seed`.
RngStream derive_stream(std::uint64_t master_seed, std::uint64_t index, std::uint64_t index2 = 0);

// 64-bit entropy from the OS, for CLI runs without an explicit seed.
std::uint64_t entropy_seed();

}  // namespace breakscan
