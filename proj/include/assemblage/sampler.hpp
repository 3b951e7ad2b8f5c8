// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "assemblage/corpus.hpp"
#include "assemblage/matrix.hpp"
#include "assemblage/random.hpp"

namespace assemblage {

// Asymmetric room-group prior alpha_1..alpha_K and the symmetric group-type
// smoother beta.
class Hyperparams {
 public:
  Hyperparams(std::vector<double> alpha, double beta);
  static Hyperparams symmetric(std::size_t k, double alpha_each, double beta);

  std::size_t k() const { return alpha_.size(); }
  const std::vector<double>& alpha() const { return alpha_; }
  double alpha_sum() const { return alpha_sum_; }
  double beta() const { return beta_; }

  void set_alpha(std::vector<double> alpha);
  void set_beta(double beta);

  bool operator==(const Hyperparams&) const = default;

 private:
  std::vector<double> alpha_;
  double alpha_sum_ = 0.0;
  double beta_ = 0.0;
};

// Token sequences and room types of the training rooms, copied out of a
// corpus view so a chain owns everything it reads.
struct TrainingData {
  std::vector<std::vector<TypeId>> docs;
  std::vector<int> room_types;
  std::size_t vocab_size = 0;

  static std::shared_ptr<const TrainingData> from(const CorpusView& train);
  std::size_t token_count() const;
};

// Per-token group assignments plus the three count structures they imply:
// N_{k|r} (rooms x K), N_{a|k} (K x |A|) and N_{.|k}.
class GibbsState {
 public:
  GibbsState(std::shared_ptr<const TrainingData> data, std::size_t k,
             std::vector<std::vector<int>> z, std::uint64_t seed,
             std::uint64_t iteration = 0);

  const TrainingData& data() const { return *data_; }
  std::shared_ptr<const TrainingData> shared_data() const { return data_; }
  std::size_t k() const { return k_; }
  const std::vector<std::vector<int>>& z() const { return z_; }
  const Matrix<int>& room_group_counts() const { return room_group_; }
  const Matrix<int>& group_type_counts() const { return group_type_; }
  const std::vector<int>& group_totals() const { return group_totals_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t iteration() const { return iteration_; }

  // Recounts from z and compares with the incrementally maintained counts.
  bool counts_consistent() const;

 private:
  friend void sweep(GibbsState& state, const Hyperparams& hyper);

  std::shared_ptr<const TrainingData> data_;
  std::size_t k_;
  std::vector<std::vector<int>> z_;
  Matrix<int> room_group_;
  Matrix<int> group_type_;
  std::vector<int> group_totals_;
  std::uint64_t seed_;
  std::uint64_t iteration_;
  Rng rng_;
};

// Uniform random initial assignments drawn from Rng(seed).
GibbsState init_state(std::shared_ptr<const TrainingData> data,
                      const Hyperparams& hyper, std::uint64_t seed);

// Collapsed conditional for the token at (room, position), with that token's
// own assignment removed from the counts:
//   p(z = k) ∝ (N_{k|r} + alpha_k) (N_{x|k} + beta) / (N_{.|k} + |A| beta)
std::vector<double> full_conditional(const GibbsState& state,
                                     const Hyperparams& hyper,
                                     std::size_t room, std::size_t position);

// Resamples every token once, rooms in order then tokens in order.
void sweep(GibbsState& state, const Hyperparams& hyper);

// Frozen copy of a chain at one iteration.
struct Snapshot {
  std::uint64_t iteration = 0;
  Hyperparams hyper{{1.0}, 1.0};
  std::vector<std::vector<int>> z;
  Matrix<int> room_group;
  Matrix<int> group_type;
  std::vector<int> group_totals;

  std::size_t k() const { return hyper.k(); }
};

Snapshot take_snapshot(const GibbsState& state, const Hyperparams& hyper);

// Rebuilds the count structures from assignments. Throws DataError when z
// does not match the training data's shape or holds out-of-range groups.
Snapshot snapshot_from_assignments(const TrainingData& data,
                                   std::vector<std::vector<int>> z,
                                   const Hyperparams& hyper,
                                   std::uint64_t iteration);

struct ChainConfig {
  std::size_t k = 10;
  std::uint64_t seed = 1;
  std::size_t iterations = 2000;
  std::size_t save_every = 100;
  std::size_t burn_in = 500;
  // 0 disables hyperparameter optimization.
  std::size_t optimize_every = 50;
  // Initial alpha_k = alpha_total / K.
  double alpha_total = 50.0;
  double beta = 0.01;
  // Fixed-point passes per optimization call.
  std::size_t optimize_passes = 20;

  // Throws ConfigError for contradictory schedules.
  void validate() const;
};

// Iterations at which snapshots are saved: multiples of save_every strictly
// after burn_in, up to and including `iterations`.
std::vector<std::size_t> snapshot_iterations(const ChainConfig& config);

struct ChainResult {
  std::vector<Snapshot> snapshots;
  Hyperparams final_hyper{{1.0}, 1.0};
};

// Runs one chain: init, then `iterations` sweeps. After burn_in, alpha and
// beta are re-optimized every optimize_every iterations (before any snapshot
// at the same iteration).
ChainResult run_chain(std::shared_ptr<const TrainingData> data,
                      const ChainConfig& config);
ChainResult run_chain(const CorpusView& train, const ChainConfig& config);

}  // namespace assemblage
