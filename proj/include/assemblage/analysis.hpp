// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "assemblage/corpus.hpp"
#include "assemblage/matrix.hpp"
#include "assemblage/sampler.hpp"

namespace assemblage {

struct AnalysisOptions {
  // Smooth P(a|k) with each snapshot's beta instead of using raw averaged
  // counts.
  bool smooth = false;
};

// Group and group-type probabilities derived from the mean counts over a set
// of snapshots of one chain:
//   P(k)   proportional to mean N_{.|k}
//   P(a|k) proportional to mean N_{a|k}
struct GroupDistributions {
  std::vector<double> group_prob;  // K
  Matrix<double> type_given_group;  // K x |A|; rows of empty groups are 0
  std::vector<double> type_mass;    // mean count of each type over groups
};

GroupDistributions group_distributions(std::span<const Snapshot> snapshots,
                                       const AnalysisOptions& options = {});

struct Cooccurrence {
  double probability = 0.0;
  bool zero_support = false;
};

// P(a1, a2) = sum_k P(k) P(a1|k) P(a2|k).
Cooccurrence cooccurrence(std::span<const Snapshot> snapshots, TypeId a1,
                          TypeId a2, const AnalysisOptions& options = {});

struct RankedType {
  TypeId type = 0;
  double probability = 0.0;
};

struct CooccurrenceRanking {
  std::vector<RankedType> items;
  bool zero_support = false;
};

// Every other type ranked by joint probability with the anchor, descending,
// ties by type id. The anchor itself is excluded.
CooccurrenceRanking cooccurrence_ranking(std::span<const Snapshot> snapshots,
                                         TypeId anchor, std::size_t top_n,
                                         const AnalysisOptions& options = {});

std::vector<RankedType> top_types(std::span<const Snapshot> snapshots,
                                  std::size_t k, std::size_t n,
                                  const AnalysisOptions& options = {});

struct GroupSummary {
  std::size_t group = 0;
  double probability = 0.0;
  std::vector<RankedType> top;
};

std::vector<GroupSummary> group_summaries(std::span<const Snapshot> snapshots,
                                          std::size_t n,
                                          const AnalysisOptions& options = {});

// Mean over snapshots of the share of type-t room tokens assigned to each
// group. Throws DataError when no training room of type t has tokens.
std::vector<double> room_type_profile(std::span<const Snapshot> snapshots,
                                      const CorpusView& train, int room_type);

double total_variation(std::span<const double> p, std::span<const double> q);

// Greedy one-to-one matching of estimated rows to reference rows by smallest
// total variation: result[i] is the estimate row matched to reference row i.
// Intended for synthetic-data checks where a reference exists.
std::vector<std::size_t> greedy_align(const Matrix<double>& reference,
                                      const Matrix<double>& estimate);

// Relabels groups: new group i is old group perm[i].
Snapshot permute_groups(const Snapshot& snapshot,
                        std::span<const std::size_t> perm);

}  // namespace assemblage
