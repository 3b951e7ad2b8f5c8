// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "assemblage/baseline.hpp"
#include "assemblage/corpus.hpp"
#include "assemblage/heldout.hpp"
#include "assemblage/sampler.hpp"

namespace assemblage {

inline constexpr int kFormatVersion = 1;

// Which snapshot supplies phi at test time.
enum class PhiMode { last, average };
std::string_view phi_mode_name(PhiMode mode);
std::optional<PhiMode> parse_phi_mode(std::string_view name);

struct EvalConfig {
  std::vector<Family> families{Family::simple, Family::cond_simple, Family::fg,
                               Family::cfg};
  std::vector<std::size_t> k_grid{10};
  std::size_t seeds = 1;
  std::uint64_t root_seed = 1;
  double eta = kDefaultEta;
  // Schedule for every chain; k and seed are filled in per job.
  ChainConfig chain;
  std::size_t particles = 20;
  bool prefer_exact = false;
  PhiMode phi_mode = PhiMode::last;
  std::size_t workers = 1;

  void validate() const;
  // Canonical key=value text of every parameter, used for the config hash.
  std::string canonical() const;
  bool wants(Family f) const;
};

struct EvalRecord {
  std::size_t fold = 0;
  std::string house_id;
  std::string room_id;
  int room_type = 0;
  Family family = Family::simple;
  std::size_t k = 0;     // 0 for the baselines
  std::size_t seed = 0;  // replicate index; 0 for the baselines
  std::size_t n_tokens = 0;
  double log_prob = 0.0;
  double perplexity = 0.0;
  EstimateMethod method = EstimateMethod::closed_form;
  std::size_t particles = 0;
  std::uint64_t estimator_seed = 0;
  PhiMode phi_mode = PhiMode::last;
};

struct EvalTable {
  std::vector<EvalRecord> records;
  std::uint64_t config_hash = 0;
  std::uint64_t corpus_hash = 0;
  // content_hash of each fold's training view, in fold order.
  std::vector<std::uint64_t> fold_train_hashes;
  std::size_t skipped_empty_rooms = 0;
};

// Leave-one-house-out protocol: per fold, fit the baselines, run one chain
// per (K, replicate), fit room-type priors from that chain's snapshots, and
// score every non-empty held-out room under each requested family. Jobs run
// on `workers` threads; the result does not depend on the worker count.
EvalTable run_loo(const Corpus& corpus, const EvalConfig& config);

enum class GroupBy { house, room_type, k };
// Per-room perplexity averaging (default) or log-prob averaging across K and
// replicates before grouping.
enum class KAveraging { perplexity, log_prob };

struct AggregateOptions {
  GroupBy by = GroupBy::house;
  // Restrict mixed-membership records to one K; nullopt averages over all.
  std::optional<std::size_t> k;
  KAveraging averaging = KAveraging::perplexity;
};

struct SummaryRow {
  std::string group;
  Family family = Family::simple;
  double mean = 0.0;
  std::size_t count = 0;
  double sd = 0.0;  // n-1 denominator; 0 when count < 2
};

// Unweighted mean of per-room perplexities within each group.
std::vector<SummaryRow> aggregate(const EvalTable& table,
                                  const AggregateOptions& options);

struct PairedTTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
  bool degenerate = false;
};

// Classic paired t-test on a - b.
PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b);

struct PairwiseTest {
  Family a;
  Family b;
  std::size_t n = 0;
  PairedTTest test;
};

// Paired tests between every pair of families on per-house means.
std::vector<PairwiseTest> pairwise_house_tests(const EvalTable& table,
                                               const AggregateOptions& options);

std::string eval_table_csv(const EvalTable& table);
std::string summary_csv(const std::vector<SummaryRow>& rows,
                        const EvalTable& provenance, std::string_view group_name);
std::string ttest_csv(const std::vector<PairwiseTest>& tests,
                      const EvalTable& provenance);

}  // namespace assemblage
