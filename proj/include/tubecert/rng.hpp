#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace tubecert {

/// Counter-based deterministic generator.
///
/// Draw i of a stream with key k is splitmix64(k + (i+1)*GOLDEN); there is no
/// hidden state beyond the counter, so any partitioning of the index range
/// across workers reproduces the sequential output. Sub-streams are derived
/// by hashing a label into the key, which keeps every consumer of randomness
/// on an independent, reproducible stream rooted at the one scenario seed.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static std::uint64_t hash_label(std::string_view label) {
    // FNV-1a, then one mixing round.
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : label) {
      h ^= c;
      h *= 0x100000001B3ull;
    }
    return mix(h);
  }

  std::uint64_t key() const { return key_; }

  /// Random access: the i-th draw of this stream.
  std::uint64_t at(std::uint64_t i) const { return mix(key_ + (i + 1) * kGolden); }

  std::uint64_t next() { return at(counter_++); }

  /// Uniform in [0, 1), 53-bit mantissa, identical across platforms.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  /// Box-Muller from two counter draws; avoids std::normal_distribution,
  /// whose output is implementation-defined.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  /// Independent sub-stream for a named purpose.
  CounterRng split(std::string_view label) const {
    return CounterRng(mix(key_ ^ hash_label(label)));
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  static constexpr double kPi = 3.14159265358979323846;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace tubecert
