#pragma once

#include <cstdint>
#include <random>

namespace pdmp {

/// Seeded random stream. Stream `r` of seed `s` is a std::mt19937_64 initialised
/// through std::seed_seq{lo(s), hi(s), lo(r), hi(r)}, so replicas never share
/// state and every draw is reproducible from (seed, stream).
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Uniform on the open interval (0, 1), 53 bits.
  double uniform();
  /// Exponential with the given rate; +inf when rate is 0.
  double exponential(double rate);
  bool bernoulli(double p) { return uniform() < p; }
  /// Shifted geometric on {1, 2, ...} with success probability p.
  std::uint64_t geometric(double p);
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace pdmp
