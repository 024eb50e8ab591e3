#pragma once

// Random number generation. boost::random's mt19937_64 and its normal
// distribution are specified bit-for-bit by the library, so draws are
// identical across platforms and compilers (unlike std:: distributions).

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <cstdint>
#include <string_view>

#include "mmar/linalg.hpp"

namespace mmar {

using Rng = boost::random::mt19937_64;

inline constexpr std::string_view kRngName = "boost::random::mt19937_64/normal_distribution(ziggurat)";

// SplitMix64 finalizer: decorrelated sub-seed for stream `index` of `seed`.
constexpr std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline double std_normal(Rng& rng) {
  boost::random::normal_distribution<double> nd;
  return nd(rng);
}

inline double uniform01(Rng& rng) {
  boost::random::uniform_01<double> u;
  return u(rng);
}

inline Matrix normal_matrix(Index rows, Index cols, Rng& rng) {
  Matrix z(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) z(i, j) = std_normal(rng);
  return z;
}

}  // namespace mmar
