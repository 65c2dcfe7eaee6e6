#pragma once

#include <cstdint>

namespace kolmo {

// splitmix64 output scrambler.
std::uint64_t mix64(std::uint64_t z);

// Stream seed for sample index m under master seed: hash(seed, m).
// Counter-based, so parallel Monte Carlo can hand each sample its own
// generator without coordination.
std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t m);

// Inverse standard normal CDF (Wichura's AS 241, double precision).
double normal_icdf(double p);

double normal_cdf(double x);
double normal_pdf(double x);

class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // Uniform on the open interval (0,1); never returns 0 or 1.
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_gaussian() { return normal_icdf(next_double()); }

private:
  std::uint64_t state_;
};

}  // namespace kolmo
