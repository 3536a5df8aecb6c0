#include "pdmp/rng.hpp"

#include <cmath>
#include <limits>

namespace pdmp {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(make_engine(seed, stream)) {}

double Rng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::exponential(double rate) {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(uniform()) / rate;
}

std::uint64_t Rng::geometric(double p) {
  if (p >= 1.0) return 1;
  // inversion: smallest k with 1 - (1-p)^k >= u
  const double k = std::ceil(std::log(uniform()) / std::log1p(-p));
  return k < 1.0 ? 1 : static_cast<std::uint64_t>(k);
}

}  // namespace pdmp
