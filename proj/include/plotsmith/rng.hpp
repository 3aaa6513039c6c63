#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace plotsmith {

/// Counter-based SplitMix64: draw i of stream `key` is mix64(key + (i+1)*gamma).
/// Pure integer arithmetic, so streams are reproducible across platforms and
/// languages. Uniforms use the top 53 bits; normals use Box-Muller.
class CounterRng {
public:
  static constexpr const char* kAlgorithm = "splitmix64-counter";
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  explicit CounterRng(std::uint64_t key) : key_(key) {}

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Draw number `counter` of stream `key`, without touching any state.
  static std::uint64_t at(std::uint64_t key, std::uint64_t counter) {
    return mix64(key + (counter + 1) * kGamma);
  }

  std::uint64_t next_u64() { return at(key_, counter_++); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    double u1 = 1.0 - uniform(); // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t counter() const { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

} // namespace plotsmith
