#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace vcband {

// One step of the splitmix64 mixer. Used only for seed derivation: it maps
// any 64-bit state to a well-distributed output, so nearby stream ids give
// unrelated seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic sub-seed for stream `stream` (replication index, individual
// index, ...) derived from a base seed. Distinct streams never share state.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
  return splitmix64(s);
}

// Deterministic generator: mt19937_64 (bit-exact sequence fixed by the
// standard) with explicit float conversions. std::uniform_real_distribution
// and std::normal_distribution are implementation-defined, which would break
// byte-identical reproducibility, so the conversions are done by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // U(0,1), strictly inside the open interval: the 53-bit mantissa is offset
  // by half an ulp so 0 and 1 are unreachable.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // N(0,1) via the Marsaglia polar method. Avoids trig calls; depends only on
  // sqrt/log, so results are reproducible on a fixed platform.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace vcband
