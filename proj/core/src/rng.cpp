#include "biasbench/rng.hpp"

namespace biasbench {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stable_hash(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view id, std::uint64_t index) {
  std::uint64_t h = splitmix64(base_seed);
  h = splitmix64(h ^ stable_hash(id));
  return splitmix64(h ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double SeededRng::unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double SeededRng::uniform(double lo, double hi) {
  if (lo == hi) return lo;
  double v = lo + (hi - lo) * unit();
  return v > hi ? hi : v;
}

std::size_t SeededRng::pick(std::size_t n) {
  // Rejection keeps the draw exactly uniform for any n.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

}  // namespace biasbench
