#include "smcchees/quasirandom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "smcchees/rng.hpp"

namespace smcchees {

namespace detail {
extern const std::string_view kJoeKuoDirectionNumbers;
}

namespace {

struct SchemeNames {
  JitterScheme scheme;
  std::string_view flag;
  std::string_view display;
};

constexpr std::array<SchemeNames, 13> kSchemeNames = {{
    {JitterScheme::kNoJitter, "no-jitter", "No Jitter"},
    {JitterScheme::kUniform1d, "1d-uniform", "1-d Uniform"},
    {JitterScheme::kHaltonNd, "nd-halton", "N-d Halton"},
    {JitterScheme::kInverseHaltonNd, "nd-inverse-halton", "N-d Inverse Halton"},
    {JitterScheme::kHalton1d, "1d-halton", "1-d Halton"},
    {JitterScheme::kPrimesNd, "nd-primes", "N-d Primes"},
    {JitterScheme::kInversePrimesNd, "nd-inverse-primes", "N-d Inverse Primes"},
    {JitterScheme::kGoldenRatio1d, "1d-golden-ratio", "1-d Golden Ratio"},
    {JitterScheme::kEquidistantNd, "nd-equidistant", "N-d Equidistant"},
    {JitterScheme::kOffsetEquidistantNd, "nd-offset-equidistant",
     "N-d Offset Equidistant"},
    {JitterScheme::kSobolNd, "nd-sobol", "N-d Sobol"},
    {JitterScheme::kInverseSobolNd, "nd-inverse-sobol", "N-d Inverse Sobol"},
    {JitterScheme::kSobol1d, "1d-sobol", "1-d Sobol"},
}};

const SchemeNames& names_of(JitterScheme scheme) {
  for (const auto& entry : kSchemeNames) {
    if (entry.scheme == scheme) return entry;
  }
  throw std::invalid_argument("unknown jitter scheme");
}

double frac(double x) { return x - std::floor(x); }

// Reverse the column order in place: column k <- column K-1-k.
void reverse_columns(Matrix& m) {
  const Index k = m.cols();
  for (Index c = 0; c < k / 2; ++c) m.col(c).swap(m.col(k - 1 - c));
}

// Formula schemes may round to exactly 0; step to the next index when they do.
template <typename F>
double nonzero_at(std::uint64_t index, F&& value_at) {
  double v = value_at(index);
  while (v == 0.0) v = value_at(++index);
  return v;
}

void fill_equidistant(Matrix& m, std::uint64_t seed, bool offset) {
  const Index particles = m.rows();
  Engine engine = substream(seed, StreamPurpose::kJitter);
  std::vector<double> column(static_cast<std::size_t>(particles));
  for (Index k = 0; k < m.cols(); ++k) {
    for (Index j = 0; j < particles; ++j) {
      column[static_cast<std::size_t>(j)] =
          static_cast<double>(j + 1) / static_cast<double>(particles);
    }
    // Fisher-Yates.
    for (std::size_t i = column.size() - 1; i > 0; --i) {
      std::swap(column[i], column[uniform_index(engine, i + 1)]);
    }
    for (Index j = 0; j < particles; ++j) {
      double v = column[static_cast<std::size_t>(j)];
      if (offset) v = frac(v + 0.1 * uniform01(engine));
      m(j, k) = v;
    }
    if (offset) {
      // A perturbation landing exactly on 1 wraps to 0; use the smallest
      // positive factor of the column instead.
      double smallest = 1.0;
      for (Index j = 0; j < particles; ++j) {
        if (m(j, k) > 0.0) smallest = std::min(smallest, m(j, k));
      }
      for (Index j = 0; j < particles; ++j) {
        if (m(j, k) == 0.0) m(j, k) = smallest;
      }
    }
  }
}

}  // namespace

std::string_view flag_name(JitterScheme scheme) { return names_of(scheme).flag; }

std::string_view display_name(JitterScheme scheme) {
  return names_of(scheme).display;
}

JitterScheme parse_jitter_scheme(std::string_view name) {
  for (const auto& entry : kSchemeNames) {
    if (entry.flag == name) return entry.scheme;
  }
  throw std::invalid_argument("unknown jitter scheme '" + std::string(name) +
                              "'");
}

double radical_inverse(std::uint64_t index, unsigned base) {
  if (base < 2) throw std::invalid_argument("radical_inverse: base must be >= 2");
  if (index == 0) {
    throw std::invalid_argument("radical_inverse: index must be >= 1");
  }
  constexpr std::uint64_t kExact = std::uint64_t{1} << 53;
  // Reversed digits over base^digits, divided once so the result is the
  // correctly rounded rational whenever both integers are exact in a double.
  std::uint64_t reversed = 0;
  std::uint64_t denominator = 1;
  std::uint64_t n = index;
  while (n > 0 && denominator <= kExact / base) {
    reversed = reversed * base + n % base;
    denominator *= base;
    n /= base;
  }
  if (n == 0) {
    return static_cast<double>(reversed) / static_cast<double>(denominator);
  }
  // Very long expansions: accumulate the remaining digits in floating point.
  double result = static_cast<double>(reversed) / static_cast<double>(denominator);
  double scale = 1.0 / static_cast<double>(denominator);
  const double inv_base = 1.0 / base;
  while (n > 0) {
    scale *= inv_base;
    result += static_cast<double>(n % base) * scale;
    n /= base;
  }
  return result;
}

std::vector<std::uint64_t> first_primes(std::size_t count) {
  std::vector<std::uint64_t> primes;
  if (count == 0) return primes;
  // Rosser's bound p_n < n (ln n + ln ln n) for n >= 6.
  std::size_t limit = 15;
  if (count >= 6) {
    const double n = static_cast<double>(count);
    limit = static_cast<std::size_t>(n * (std::log(n) + std::log(std::log(n)))) + 1;
  }
  std::vector<bool> composite(limit + 1, false);
  primes.reserve(count);
  for (std::size_t i = 2; i <= limit && primes.size() < count; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (std::size_t m = i * i; m <= limit; m += i) composite[m] = true;
  }
  return primes;
}

std::uint64_t nth_prime(std::size_t k) {
  if (k == 0) throw std::invalid_argument("nth_prime: k must be >= 1");
  return first_primes(k).back();
}

SobolTable SobolTable::parse(std::istream& in) {
  SobolTable table;
  Directions first{};
  for (int i = 0; i < kBits; ++i) first[i] = std::uint32_t{1} << (kBits - 1 - i);
  table.directions_.push_back(first);

  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::istringstream fields(line);
    std::size_t dimension = 0;
    if (!(fields >> dimension)) continue;  // header or blank line
    int degree = 0;
    std::uint64_t coefficients = 0;
    if (!(fields >> degree >> coefficients) || degree < 1 || degree > kBits) {
      throw std::runtime_error("Sobol table: malformed line " +
                               std::to_string(line_number));
    }
    if (dimension != table.directions_.size() + 1) {
      throw std::runtime_error("Sobol table: dimensions out of order at line " +
                               std::to_string(line_number));
    }
    std::array<std::uint64_t, kBits + 1> m{};  // m[1..kBits]
    for (int i = 1; i <= degree; ++i) {
      if (!(fields >> m[i]) || m[i] % 2 == 0 || m[i] >= (std::uint64_t{1} << i)) {
        throw std::runtime_error("Sobol table: bad direction integer at line " +
                                 std::to_string(line_number));
      }
    }
    for (int i = degree + 1; i <= kBits; ++i) {
      std::uint64_t value = m[i - degree] ^ (m[i - degree] << degree);
      for (int k = 1; k < degree; ++k) {
        if ((coefficients >> (degree - 1 - k)) & 1U) value ^= m[i - k] << k;
      }
      m[i] = value;
    }
    Directions v{};
    for (int i = 1; i <= kBits; ++i) {
      v[i - 1] = static_cast<std::uint32_t>(m[i] << (kBits - i));
    }
    table.directions_.push_back(v);
  }
  return table;
}

SobolTable SobolTable::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open Sobol table '" + path + "'");
  return parse(in);
}

const SobolTable& SobolTable::builtin() {
  static const SobolTable table = [] {
    std::istringstream in{std::string(detail::kJoeKuoDirectionNumbers)};
    return parse(in);
  }();
  return table;
}

double SobolTable::point(std::uint64_t index, std::size_t dimension) const {
  if (index == 0) throw std::invalid_argument("sobol_point: index must be >= 1");
  if (index >> kBits) throw std::invalid_argument("sobol_point: index too large");
  if (dimension == 0) {
    throw std::invalid_argument("sobol_point: dimension must be >= 1");
  }
  if (dimension > directions_.size()) {
    throw UnsupportedDimension("sobol_point: dimension " +
                               std::to_string(dimension) + " exceeds table size " +
                               std::to_string(directions_.size()));
  }
  const Directions& v = directions_[dimension - 1];
  std::uint64_t gray = index ^ (index >> 1);
  std::uint32_t x = 0;
  for (int bit = 0; gray != 0; ++bit, gray >>= 1) {
    if (gray & 1U) x ^= v[bit];
  }
  return static_cast<double>(x) * 0x1.0p-32;
}

double sobol_point(std::uint64_t index, std::size_t dimension) {
  return SobolTable::builtin().point(index, dimension);
}

JitterMatrix generate_jitter(JitterScheme scheme, Index particles,
                             Index iterations, std::uint64_t seed) {
  if (particles < 1 || iterations < 1) {
    throw std::invalid_argument("generate_jitter: J and K must be >= 1");
  }
  JitterMatrix out;
  out.scheme = scheme;
  out.seed = seed;
  Matrix& h = out.values;
  h.resize(particles, iterations);

  const auto stream_index = [iterations](Index j, Index k) {
    return static_cast<std::uint64_t>(j) * static_cast<std::uint64_t>(iterations) +
           static_cast<std::uint64_t>(k) + 1;
  };

  switch (scheme) {
    case JitterScheme::kNoJitter:
      h.setOnes();
      break;
    case JitterScheme::kUniform1d: {
      Engine engine = substream(seed, StreamPurpose::kJitter);
      for (Index j = 0; j < particles; ++j) {
        for (Index k = 0; k < iterations; ++k) h(j, k) = uniform_open_closed(engine);
      }
      break;
    }
    case JitterScheme::kHaltonNd:
    case JitterScheme::kInverseHaltonNd: {
      const auto primes = first_primes(static_cast<std::size_t>(iterations));
      for (Index k = 0; k < iterations; ++k) {
        const auto base = static_cast<unsigned>(primes[static_cast<std::size_t>(k)]);
        for (Index j = 0; j < particles; ++j) {
          h(j, k) = radical_inverse(static_cast<std::uint64_t>(j + 1), base);
        }
      }
      if (scheme == JitterScheme::kInverseHaltonNd) reverse_columns(h);
      break;
    }
    case JitterScheme::kHalton1d:
      for (Index j = 0; j < particles; ++j) {
        for (Index k = 0; k < iterations; ++k) {
          h(j, k) = radical_inverse(stream_index(j, k), 2);
        }
      }
      break;
    case JitterScheme::kPrimesNd:
    case JitterScheme::kInversePrimesNd: {
      const auto primes = first_primes(static_cast<std::size_t>(iterations));
      for (Index k = 0; k < iterations; ++k) {
        const double root = std::sqrt(static_cast<double>(primes[static_cast<std::size_t>(k)]));
        for (Index j = 0; j < particles; ++j) {
          h(j, k) = nonzero_at(static_cast<std::uint64_t>(j + 1), [root](std::uint64_t n) {
            return frac(static_cast<double>(n) * root);
          });
        }
      }
      if (scheme == JitterScheme::kInversePrimesNd) reverse_columns(h);
      break;
    }
    case JitterScheme::kGoldenRatio1d: {
      const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
      for (Index j = 0; j < particles; ++j) {
        for (Index k = 0; k < iterations; ++k) {
          h(j, k) = nonzero_at(stream_index(j, k), [ratio](std::uint64_t n) {
            return frac(static_cast<double>(n) * ratio);
          });
        }
      }
      break;
    }
    case JitterScheme::kEquidistantNd:
      fill_equidistant(h, seed, false);
      break;
    case JitterScheme::kOffsetEquidistantNd:
      fill_equidistant(h, seed, true);
      break;
    case JitterScheme::kSobolNd:
    case JitterScheme::kInverseSobolNd: {
      const SobolTable& table = SobolTable::builtin();
      for (Index k = 0; k < iterations; ++k) {
        for (Index j = 0; j < particles; ++j) {
          h(j, k) = table.point(static_cast<std::uint64_t>(j + 1),
                                static_cast<std::size_t>(k + 1));
        }
      }
      if (scheme == JitterScheme::kInverseSobolNd) reverse_columns(h);
      break;
    }
    case JitterScheme::kSobol1d: {
      const SobolTable& table = SobolTable::builtin();
      for (Index j = 0; j < particles; ++j) {
        for (Index k = 0; k < iterations; ++k) h(j, k) = table.point(stream_index(j, k), 1);
      }
      break;
    }
  }
  return out;
}

}  // namespace smcchees
