#pragma once

#include <cstdint>
#include <string_view>

namespace prosody {

// Deterministic xoshiro256** generator. All randomness in the pipeline flows
// from one master seed through named substreams (corpus, init, gumbel, action,
// eval, ...) so components can be re-seeded independently of each other.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0, n). n must be > 0.
  int uniform_int(int n);

  // Standard normal via Box-Muller (second value cached).
  double normal();

  // Standard Gumbel: -log(-log(U)) with U clamped away from {0,1}.
  double gumbel();

  Rng substream(std::string_view name) const;
  Rng substream(std::string_view name, uint64_t index) const;

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_ = 0;
  uint64_t state_[4] = {0, 0, 0, 0};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace prosody
