// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <vector>

#include "assemblage/corpus.hpp"
#include "assemblage/matrix.hpp"

namespace assemblage {

struct CountRange {
  std::size_t min = 1;
  std::size_t max = 1;
};

enum class RoomTypeRule {
  cycle,    // room j of a house takes room_types[j % n]
  uniform,  // uniformly at random from room_types
};

// Parameters of the generative process
//   theta_r ~ Dirichlet(alpha for the room's type), z_i ~ theta_r,
//   x_i ~ phi[z_i].
struct SynthSpec {
  Matrix<double> phi;    // K x |A|, rows sum to 1
  Matrix<double> alpha;  // one row (global) or one row per entry of room_types
  std::vector<int> room_types{1};
  RoomTypeRule rule = RoomTypeRule::cycle;
  std::size_t n_houses = 10;
  CountRange rooms_per_house{5, 5};
  CountRange tokens_per_room{20, 20};
  std::uint64_t seed = 1;

  std::size_t k() const { return phi.rows(); }
  std::size_t vocab_size() const { return phi.cols(); }
  // Throws ConfigError describing the first violated constraint.
  void validate() const;
};

struct GroundTruth {
  Matrix<double> phi;
  Matrix<double> alpha;
  std::vector<int> room_types;
  // Rows follow corpus room order (house order, then room order).
  Matrix<double> theta;
  std::vector<std::vector<int>> z;
};

struct SynthResult {
  Corpus corpus;
  GroundTruth truth;
};

// Vocabulary labels are a000, a001, ... in id order, all present even when a
// type is never emitted.
SynthResult generate(const SynthSpec& spec);

// Group k puts `mass` on type k and spreads the rest uniformly over the other
// types. Requires k <= vocab.
Matrix<double> dominant_phi(std::size_t k, std::size_t vocab, double mass);

// Types are split into K contiguous blocks; group k puts `mass` uniformly on
// its block and the rest uniformly elsewhere.
Matrix<double> block_phi(std::size_t k, std::size_t vocab, double mass);

}  // namespace assemblage
