#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace biasbench {

std::uint64_t splitmix64(std::uint64_t x);

/// Stable 64-bit hash of a byte string (FNV-1a followed by a splitmix finalizer).
std::uint64_t stable_hash(std::string_view bytes);

/// Child seed for one (base_seed, id, index) triple. Identical on every
/// platform and independent of expansion order.
std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view id, std::uint64_t index);

/// Source of the two kinds of randomness template filling needs.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  /// Continuous draw from [lo, hi].
  virtual double uniform(double lo, double hi) = 0;
  /// Index in [0, n); n > 0.
  virtual std::size_t pick(std::size_t n) = 0;
};

/// mt19937_64-backed stream. Distributions are computed by hand so the
/// sequence does not depend on the standard library implementation.
class SeededRng final : public RandomSource {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) override;
  std::size_t pick(std::size_t n) override;

  /// Uniform double in [0, 1).
  double unit();
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace biasbench
