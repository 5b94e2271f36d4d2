#include "smcchees/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace smcchees {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Engine substream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t a,
                 std::uint64_t b) {
  std::uint64_t key = mix64(seed);
  key = mix64(key ^ static_cast<std::uint64_t>(purpose));
  key = mix64(key ^ a);
  key = mix64(key ^ b);
  return Engine{key};
}

double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

double uniform_open_closed(Engine& engine) {
  return static_cast<double>((engine() >> 11) + 1) * 0x1.0p-53;
}

std::uint64_t uniform_index(Engine& engine, std::uint64_t n) {
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = engine();
  while (x >= limit) x = engine();
  return x % n;
}

double standard_normal(Engine& engine) {
  // Box-Muller, one output per call so the stream position stays simple.
  const double u1 = uniform_open_closed(engine);
  const double u2 = uniform01(engine);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

Vector standard_normal_vector(Engine& engine, Index size) {
  Vector v(size);
  for (Index i = 0; i < size; ++i) v[i] = standard_normal(engine);
  return v;
}

}  // namespace smcchees
