#pragma once

#include <cstdint>
#include <random>

namespace fgaug::numkit {

// Seeded generator with portable conversions. The standard distributions
// are implementation-defined, so real and integer draws are derived from
// the raw 64-bit stream here instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  // Uniform on the closed integer range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p) { return uniform() < p; }

  // Independent sub-stream derived from (seed, stream).
  Rng fork(std::uint64_t stream) const;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace fgaug::numkit
