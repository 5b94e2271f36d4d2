#ifndef SMCCHEES_RNG_HPP
#define SMCCHEES_RNG_HPP

#include <cstdint>
#include <random>

#include "smcchees/types.hpp"

namespace smcchees {

using Engine = std::mt19937_64;

/// Purpose tags keep the substreams of different consumers disjoint.
enum class StreamPurpose : std::uint64_t {
  kPrior = 1,
  kProposal = 2,
  kResample = 3,
  kJitter = 4,
  kSplit = 5,
  kTarget = 6,
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Engine for the substream keyed by (seed, purpose, a, b). Distinct keys give
/// statistically independent streams, so per-particle work can run on any
/// number of threads and still reproduce bit-for-bit.
Engine substream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t a = 0,
                 std::uint64_t b = 0);

/// Uniform on [0, 1) with 53 random bits.
double uniform01(Engine& engine);

/// Uniform on (0, 1].
double uniform_open_closed(Engine& engine);

/// Uniform integer in [0, n) by rejection; n must be positive.
std::uint64_t uniform_index(Engine& engine, std::uint64_t n);

double standard_normal(Engine& engine);

Vector standard_normal_vector(Engine& engine, Index size);

}  // namespace smcchees

#endif
