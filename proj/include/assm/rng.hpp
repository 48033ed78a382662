#pragma once

#include <cstdint>
#include <random>

namespace assm {

// Deterministic random source.  The raw engine (mt19937_64) is fully
// specified by the standard; the float conversions below are done by hand so
// that identical seeds give identical streams on every platform and standard
// library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller; the spare deviate is cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Splitmix64-style mix, used to fan a root seed out into independent
// sub-streams (train/test splits, per-sequence generators, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace assm
