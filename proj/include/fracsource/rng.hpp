#pragma once

#include <cmath>
#include <cstdint>

namespace fracsource::rng {

// Per-stream RNG: xoshiro256++ seeded through SplitMix64 from (seed, stream).
// A stream's output depends only on (seed, stream), never on scheduling, so
// batch generation can be partitioned across workers with identical results.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Engine {
public:
  Engine(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sm = seed ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
    for (auto& word : s_) word = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on (0, 1]; never 0, so log() is safe.
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Standard normals by Box-Muller; one carried value per pair.
class GaussianStream {
public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}

  double next() {
    if (has_carry_) {
      has_carry_ = false;
      return carry_;
    }
    const double u1 = engine_.uniform01();
    const double u2 = engine_.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.28318530717958647692528676655900577 * u2;
    carry_ = r * std::sin(a);
    has_carry_ = true;
    return r * std::cos(a);
  }

private:
  Engine engine_;
  bool has_carry_ = false;
  double carry_ = 0.0;
};

} // namespace fracsource::rng
