#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace mgrt {

/// 64-bit FNV-1a. Used for naming rng sub-streams and for file digests
/// in run manifests.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Deterministic random source. All randomness in the toolkit flows from a
/// single root seed through named sub-streams, so multi-run averages are
/// reproducible and order-independent.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Sub-stream rng: same (seed, name) always yields the same stream.
  static Rng stream(std::uint64_t seed, std::string_view name) {
    return Rng(splitmix(seed ^ fnv1a64(name)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (cosine branch only; two uniforms per
  /// draw keeps the stream layout independent of call history).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    // u1 == 0 would take log(0); nudge onto (0, 1].
    u1 = 1.0 - u1;
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace mgrt
