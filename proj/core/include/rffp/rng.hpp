#pragma once

#include <cstdint>
#include <random>

namespace rffp {

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic random stream. Every consumer in the library draws through
// this wrapper with a fixed algorithm (mt19937_64 + Box-Muller), so a given
// seed always reproduces the same sequence and derived streams stay
// independent of scheduling order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  // Independent stream keyed by up to two indices (device, frame, tree, ...).
  static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);

  // Standard normal deviate (Box-Muller).
  double gaussian();

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rffp
