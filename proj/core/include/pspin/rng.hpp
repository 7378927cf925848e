#pragma once

#include <cstdint>
#include <initializer_list>

namespace pspin {

/// Counter-based generator: every draw is a pure function of (key, counter),
/// so tensor entries can be sampled in any order or in parallel and still
/// reproduce bit-for-bit.
struct CounterRng {
  static std::uint64_t mix(std::uint64_t z);
  static std::uint64_t bits(std::uint64_t key, std::uint64_t counter);
  /// Uniform on the open interval (0,1).
  static double uniform(std::uint64_t key, std::uint64_t counter);
  /// Standard normal via Box-Muller on counters (2c, 2c+1).
  static double normal(std::uint64_t key, std::uint64_t counter);
};

/// Derives a stream key from a seed and a list of tags (degree, role, ...).
std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

/// Sequential view over a counter-based stream.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  double uniform() { return CounterRng::uniform(key_, counter_++); }
  double normal() { return CounterRng::normal(key_, counter_++); }
  std::uint64_t next_u64() { return CounterRng::bits(key_, counter_++); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pspin
