#include "pspin/rng.hpp"

#include <cmath>
#include <numbers>

namespace pspin {

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t key, std::uint64_t counter) {
  return mix(mix(key) ^ (counter * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL));
}

double CounterRng::uniform(std::uint64_t key, std::uint64_t counter) {
  // 53 random bits, shifted off zero
  return (static_cast<double>(bits(key, counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t key, std::uint64_t counter) {
  const double u1 = uniform(key, 2 * counter);
  const double u2 = uniform(key, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t key = CounterRng::mix(seed ^ 0x5851F42D4C957F2DULL);
  for (std::uint64_t tag : tags) key = CounterRng::mix(key ^ CounterRng::mix(tag + 0x2545F4914F6CDD1DULL));
  return key;
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // rejection to avoid modulo bias
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return r % n;
}

}  // namespace pspin
