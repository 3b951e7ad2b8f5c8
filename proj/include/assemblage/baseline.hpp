// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "assemblage/corpus.hpp"
#include "assemblage/matrix.hpp"

namespace assemblage {

inline constexpr double kDefaultEta = 0.1;

// Dirichlet-smoothed unigram over artifact types:
//   P(a) = (N_a + eta) / (sum_a N_a + |A| eta)
// Counts are fixed at fit time; scoring a room never updates them.
class SimpleModel {
 public:
  SimpleModel(std::vector<std::int64_t> counts, double eta);

  double prob(TypeId a) const;
  double log_prob(std::span<const TypeId> tokens) const;

  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t total() const { return total_; }
  double eta() const { return eta_; }
  std::size_t vocab_size() const { return counts_.size(); }

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
  double eta_;
};

// One smoothed unigram per room type. Rows of types absent from training are
// pure-eta uniform.
class CondSimpleModel {
 public:
  CondSimpleModel(Matrix<std::int64_t> counts_by_type, double eta);

  double prob(int room_type, TypeId a) const;
  double log_prob(int room_type, std::span<const TypeId> tokens) const;

  const Matrix<std::int64_t>& counts_by_type() const { return counts_; }
  const std::vector<std::int64_t>& row_totals() const { return totals_; }
  double eta() const { return eta_; }
  std::size_t vocab_size() const { return counts_.cols(); }

 private:
  Matrix<std::int64_t> counts_;
  std::vector<std::int64_t> totals_;
  double eta_;
};

SimpleModel fit_simple(const CorpusView& train, double eta = kDefaultEta);
CondSimpleModel fit_cond(const CorpusView& train, double eta = kDefaultEta);

double logprob_simple(const SimpleModel& model, const Room& room);
double logprob_cond(const CondSimpleModel& model, const Room& room);

}  // namespace assemblage
