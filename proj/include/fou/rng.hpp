#pragma once

#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <random>

namespace fou {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of replication `replication` at horizon index `t_index`:
///   mix64(mix64(mix64(master) ^ t_index) ^ replication).
/// Pure integer arithmetic, identical on every platform.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t t_index,
                                    std::uint64_t replication) {
  return mix64(mix64(mix64(master) ^ t_index) ^ replication);
}

/// Standard normal variates from one seeded stream. std::mt19937_64 and the
/// Boost ziggurat are both fully specified, so draws are reproducible across
/// standard libraries.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double operator()() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fou
