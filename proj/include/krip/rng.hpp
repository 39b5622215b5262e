#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace krip {

/// Stateless 64-bit finalizer (splitmix64 output function).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace streams {
// Registry of substream tags. Keys are derived by chaining mix64 over
// (seed, tag, coordinates...), so any two distinct paths give independent
// streams and parallel generation matches serial generation bit-for-bit.
inline constexpr std::uint64_t kColumn = 1;        // per-column entry draws
inline constexpr std::uint64_t kSupport = 2;       // random support sampling
inline constexpr std::uint64_t kAmplitude = 3;     // sparse coefficient draws
inline constexpr std::uint64_t kNoise = 4;         // observation noise
inline constexpr std::uint64_t kPowerIter = 5;     // power-iteration start vector
inline constexpr std::uint64_t kMarginal = 6;      // tail marginal sampling
inline constexpr std::uint64_t kKappaPoint = 7;    // kappa-table rows
inline constexpr std::uint64_t kRipPoint = 8;      // rip-sweep rows
inline constexpr std::uint64_t kPhasePoint = 9;    // phase-transition grid points
inline constexpr std::uint64_t kConcPoint = 10;    // concentration rows
inline constexpr std::uint64_t kTailsPoint = 11;   // tail-report rows
inline constexpr std::uint64_t kTrial = 12;        // per-trial substream
inline constexpr std::uint64_t kSourceMatrix = 13; // source matrix draws
inline constexpr std::uint64_t kUnitVector = 14;   // random unit directions
}  // namespace streams

/// Splittable counter-based random stream (splitmix64 core).
///
/// A stream is identified by a key; derive() builds keys from a master seed
/// and a path of integers, so sampling is a pure function of
/// (seed, path, draw index). Box-Muller normals keep one cached spare.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {}

  static std::uint64_t derive_key(std::uint64_t seed,
                                  std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ull);
    for (std::uint64_t id : path) h = mix64(h ^ (id + 0x9E3779B97F4A7C15ull));
    return h;
  }

  static RngStream derive(std::uint64_t seed,
                          std::initializer_list<std::uint64_t> path) {
    return RngStream(derive_key(seed, path));
  }

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  /// Uniform on (0, 1].
  double uniform01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  /// -1 or +1 with equal probability.
  double rademacher() { return (next_u64() >> 63) ? -1.0 : 1.0; }

  /// Uniform integer in [0, bound) by rejection; bound >= 1.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace krip
