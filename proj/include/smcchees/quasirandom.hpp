#ifndef SMCCHEES_QUASIRANDOM_HPP
#define SMCCHEES_QUASIRANDOM_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "smcchees/types.hpp"

namespace smcchees {

/// Random and quasi-random sequences used to jitter ChEES trajectory lengths.
enum class JitterScheme {
  kNoJitter,
  kUniform1d,
  kHaltonNd,
  kInverseHaltonNd,
  kHalton1d,
  kPrimesNd,
  kInversePrimesNd,
  kGoldenRatio1d,
  kEquidistantNd,
  kOffsetEquidistantNd,
  kSobolNd,
  kInverseSobolNd,
  kSobol1d,
};

inline constexpr std::array<JitterScheme, 13> kAllJitterSchemes = {
    JitterScheme::kNoJitter,        JitterScheme::kUniform1d,
    JitterScheme::kHaltonNd,        JitterScheme::kInverseHaltonNd,
    JitterScheme::kHalton1d,        JitterScheme::kPrimesNd,
    JitterScheme::kInversePrimesNd, JitterScheme::kGoldenRatio1d,
    JitterScheme::kEquidistantNd,   JitterScheme::kOffsetEquidistantNd,
    JitterScheme::kSobolNd,         JitterScheme::kInverseSobolNd,
    JitterScheme::kSobol1d,
};

/// Command-line spelling, e.g. "1d-halton" or "nd-inverse-sobol".
std::string_view flag_name(JitterScheme scheme);

/// Table label, e.g. "1-d Halton".
std::string_view display_name(JitterScheme scheme);

/// Accepts the flag spelling; throws std::invalid_argument otherwise.
JitterScheme parse_jitter_scheme(std::string_view name);

class UnsupportedDimension : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Base-`base` digit reversal of `index` about the radix point.
double radical_inverse(std::uint64_t index, unsigned base);

/// The k-th prime, 1-based (1 -> 2).
std::uint64_t nth_prime(std::size_t k);

/// The first `count` primes in increasing order.
std::vector<std::uint64_t> first_primes(std::size_t count);

/// Unscrambled Sobol sequence in Gray-code order, built from Joe-Kuo
/// direction numbers. Dimension 1 is the van der Corput sequence; dimension
/// d >= 2 is line d of the Joe-Kuo table.
class SobolTable {
 public:
  static constexpr int kBits = 32;

  /// Table bundled with the library (1111 dimensions).
  static const SobolTable& builtin();

  /// Parses the Joe-Kuo text format: a header line, then
  /// `d s a m_1 ... m_s` per line.
  static SobolTable parse(std::istream& in);
  static SobolTable from_file(const std::string& path);

  std::size_t dimensions() const { return directions_.size(); }

  /// Point `index` (>= 1) of dimension `dimension` (1-based), in [0, 1).
  double point(std::uint64_t index, std::size_t dimension) const;

 private:
  using Directions = std::array<std::uint32_t, kBits>;
  std::vector<Directions> directions_;
};

double sobol_point(std::uint64_t index, std::size_t dimension);

/// J x K matrix of jitter factors in (0, 1]; row j is particle j, column k is
/// SMC iteration k (both 0-based in storage).
struct JitterMatrix {
  Matrix values;
  JitterScheme scheme = JitterScheme::kNoJitter;
  std::uint64_t seed = 0;

  Index particles() const { return values.rows(); }
  Index iterations() const { return values.cols(); }
  double operator()(Index particle, Index iteration) const {
    return values(particle, iteration);
  }
};

/// Fills the matrix for `scheme`. N-d schemes use the iteration as the
/// dimension and the particle as the point index; 1-d schemes read one stream
/// of length J*K with index (j-1)*K + k. Inverse variants reverse the column
/// order of their forward scheme. Indices start at 1, so no scheme emits 0.
JitterMatrix generate_jitter(JitterScheme scheme, Index particles,
                             Index iterations, std::uint64_t seed);

}  // namespace smcchees

#endif
