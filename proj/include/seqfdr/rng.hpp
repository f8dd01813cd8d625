#pragma once

#include <cstdint>
#include <random>

namespace seqfdr {

using Rng = std::mt19937_64;

/// Purposes keep the independent random streams of one experiment apart.
enum class StreamPurpose : std::uint64_t {
  Trials = 1,
  Calibration = 2,
  Validation = 3,
  Gamma = 4,
  FixedSample = 5,
  Confirmation = 6,
  Clusters = 7,
  Misc = 8,
};

/// Deterministic generator for (seed, purpose, index). The same triple always
/// yields the same sequence, independent of thread scheduling.
Rng make_rng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index);

/// SplitMix64 finalizer; used to derive sub-seeds.
std::uint64_t mix64(std::uint64_t x);

/// Uniform on the open interval (0, 1), on the 2^-53 grid offset by half a step.
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace seqfdr
