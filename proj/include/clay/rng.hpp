#pragma once

#include <clay/types.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace clay {

/// Seeded generator with hand-rolled distributions so that identical seeds
/// give identical streams regardless of the standard library in use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), rejection sampled to avoid modulo bias.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= bound) x = engine_();
    return x % n;
  }

  /// Standard normal scaled by sigma (Box-Muller, no caching).
  double normal(double sigma) {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Vec3 normal3(double sigma) { return {normal(sigma), normal(sigma), normal(sigma)}; }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Splits one run seed into independent per-stage seeds by stage name.
inline std::uint64_t stage_seed(std::uint64_t run_seed, std::string_view stage) {
  std::uint64_t h = fnv1a64(stage) ^ (run_seed + 0x9e3779b97f4a7c15ull);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebull;
  h ^= h >> 31;
  return h;
}

/// Per-step variant of stage_seed for loops.
inline std::uint64_t stage_seed(std::uint64_t run_seed, std::string_view stage,
                                std::uint64_t index) {
  return stage_seed(run_seed + 0x632be59bd9b4e019ull * (index + 1), stage);
}

}  // namespace clay
