// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace assemblage {

// Seedable generator with a fully specified output stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The std distributions are not portable across standard library
// implementations, so every variate below is derived from raw engine output
// with an explicit algorithm:
//   uniform    (next() >> 11) * 2^-53, in [0, 1)
//   normal     Marsaglia polar method, second deviate discarded
//   gamma      Marsaglia-Tsang squeeze; shape < 1 via Gamma(a+1) * U^(1/a)
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  // Uniform integer in [0, n).
  std::size_t below(std::size_t n);
  double normal();
  double gamma(double shape);
  // log of a Gamma(shape, 1) variate; stays finite for very small shapes.
  double log_gamma_variate(double shape);
  std::vector<double> dirichlet(std::span<const double> alpha);

  // Index drawn proportionally to non-negative weights summing to `total`.
  std::size_t categorical(std::span<const double> weights, double total);
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent job seed from a root seed and a path of indices
// (fold, K, replicate, ...). Identical paths give identical seeds regardless
// of the order in which jobs execute.
std::uint64_t derive_seed(std::uint64_t root,
                          std::initializer_list<std::uint64_t> path);

}  // namespace assemblage
