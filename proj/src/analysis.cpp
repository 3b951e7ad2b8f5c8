// Apache License, Version 2.0, refer to LICENSE.txt

#include "assemblage/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "assemblage/error.hpp"

namespace assemblage {

namespace {

void check_snapshots(std::span<const Snapshot> snapshots) {
  if (snapshots.empty()) throw ConfigError("analysis needs at least one snapshot");
  const auto& first = snapshots.front();
  for (const auto& s : snapshots)
    if (s.k() != first.k() || s.group_type.cols() != first.group_type.cols())
      throw DataError("snapshots disagree on K or vocabulary size");
}

void sort_ranked(std::vector<RankedType>& items) {
  std::stable_sort(items.begin(), items.end(),
                   [](const RankedType& a, const RankedType& b) {
                     if (a.probability != b.probability)
                       return a.probability > b.probability;
                     return a.type < b.type;
                   });
}

}  // namespace

GroupDistributions group_distributions(std::span<const Snapshot> snapshots,
                                       const AnalysisOptions& options) {
  check_snapshots(snapshots);
  const std::size_t k_count = snapshots.front().k();
  const std::size_t vocab = snapshots.front().group_type.cols();
  const double n_snap = static_cast<double>(snapshots.size());

  Matrix<double> mean_counts(k_count, vocab, 0.0);
  std::vector<double> mean_totals(k_count, 0.0);
  double mean_beta = 0.0;
  for (const auto& s : snapshots) {
    for (std::size_t k = 0; k < k_count; ++k) {
      mean_totals[k] += s.group_totals[k] / n_snap;
      for (std::size_t a = 0; a < vocab; ++a)
        mean_counts(k, a) += s.group_type(k, a) / n_snap;
    }
    mean_beta += s.hyper.beta() / n_snap;
  }

  GroupDistributions out;
  out.type_given_group = Matrix<double>(k_count, vocab, 0.0);
  out.type_mass.assign(vocab, 0.0);
  for (std::size_t k = 0; k < k_count; ++k)
    for (std::size_t a = 0; a < vocab; ++a)
      out.type_mass[a] += mean_counts(k, a);

  const double total =
      std::accumulate(mean_totals.begin(), mean_totals.end(), 0.0);
  out.group_prob.assign(k_count, 0.0);
  if (total > 0.0)
    for (std::size_t k = 0; k < k_count; ++k)
      out.group_prob[k] = mean_totals[k] / total;

  for (std::size_t k = 0; k < k_count; ++k) {
    if (options.smooth) {
      const double denom = mean_totals[k] + vocab * mean_beta;
      for (std::size_t a = 0; a < vocab; ++a)
        out.type_given_group(k, a) = (mean_counts(k, a) + mean_beta) / denom;
    } else if (mean_totals[k] > 0.0) {
      for (std::size_t a = 0; a < vocab; ++a)
        out.type_given_group(k, a) = mean_counts(k, a) / mean_totals[k];
    }
  }
  return out;
}

namespace {

double joint(const GroupDistributions& g, TypeId a1, TypeId a2) {
  double p = 0.0;
  for (std::size_t k = 0; k < g.group_prob.size(); ++k)
    p += g.group_prob[k] * (g.type_given_group(k, a1) * g.type_given_group(k, a2));
  return p;
}

void check_type(const GroupDistributions& g, TypeId a) {
  if (a < 0 || static_cast<std::size_t>(a) >= g.type_mass.size())
    throw ConfigError("artifact type id out of range");
}

}  // namespace

Cooccurrence cooccurrence(std::span<const Snapshot> snapshots, TypeId a1,
                          TypeId a2, const AnalysisOptions& options) {
  const auto g = group_distributions(snapshots, options);
  check_type(g, a1);
  check_type(g, a2);
  if (g.type_mass[a1] == 0.0 || g.type_mass[a2] == 0.0) return {0.0, true};
  return {joint(g, a1, a2), false};
}

CooccurrenceRanking cooccurrence_ranking(std::span<const Snapshot> snapshots,
                                         TypeId anchor, std::size_t top_n,
                                         const AnalysisOptions& options) {
  const auto g = group_distributions(snapshots, options);
  check_type(g, anchor);
  CooccurrenceRanking out;
  if (g.type_mass[anchor] == 0.0) {
    out.zero_support = true;
    return out;
  }
  for (std::size_t a = 0; a < g.type_mass.size(); ++a) {
    if (static_cast<TypeId>(a) == anchor) continue;
    out.items.push_back(
        {static_cast<TypeId>(a), joint(g, anchor, static_cast<TypeId>(a))});
  }
  sort_ranked(out.items);
  if (out.items.size() > top_n) out.items.resize(top_n);
  return out;
}

std::vector<RankedType> top_types(std::span<const Snapshot> snapshots,
                                  std::size_t k, std::size_t n,
                                  const AnalysisOptions& options) {
  const auto g = group_distributions(snapshots, options);
  if (k >= g.group_prob.size()) throw ConfigError("group index out of range");
  std::vector<RankedType> items;
  for (std::size_t a = 0; a < g.type_mass.size(); ++a)
    items.push_back({static_cast<TypeId>(a), g.type_given_group(k, a)});
  sort_ranked(items);
  if (items.size() > n) items.resize(n);
  return items;
}

std::vector<GroupSummary> group_summaries(std::span<const Snapshot> snapshots,
                                          std::size_t n,
                                          const AnalysisOptions& options) {
  const auto g = group_distributions(snapshots, options);
  std::vector<GroupSummary> out;
  for (std::size_t k = 0; k < g.group_prob.size(); ++k) {
    GroupSummary s{k, g.group_prob[k], {}};
    for (std::size_t a = 0; a < g.type_mass.size(); ++a)
      s.top.push_back({static_cast<TypeId>(a), g.type_given_group(k, a)});
    sort_ranked(s.top);
    if (s.top.size() > n) s.top.resize(n);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> room_type_profile(std::span<const Snapshot> snapshots,
                                      const CorpusView& train, int room_type) {
  check_snapshots(snapshots);
  if (!valid_room_type(room_type)) throw ConfigError("room type outside 0..22");
  const auto rooms = train.rooms();
  std::size_t tokens = 0;
  for (const Room* r : rooms)
    if (r->room_type == room_type) tokens += r->size();
  if (tokens == 0)
    throw DataError("no training tokens in rooms of type " +
                    std::to_string(room_type));

  const std::size_t k_count = snapshots.front().k();
  std::vector<double> profile(k_count, 0.0);
  for (const auto& s : snapshots) {
    if (s.room_group.rows() != rooms.size())
      throw DataError("snapshot does not match the training corpus");
    std::vector<double> sums(k_count, 0.0);
    for (std::size_t r = 0; r < rooms.size(); ++r)
      if (rooms[r]->room_type == room_type)
        for (std::size_t k = 0; k < k_count; ++k) sums[k] += s.room_group(r, k);
    for (std::size_t k = 0; k < k_count; ++k)
      profile[k] += sums[k] / static_cast<double>(tokens);
  }
  for (double& v : profile) v /= static_cast<double>(snapshots.size());
  return profile;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ConfigError("distributions differ in length");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) d += std::fabs(p[i] - q[i]);
  return 0.5 * d;
}

std::vector<std::size_t> greedy_align(const Matrix<double>& reference,
                                      const Matrix<double>& estimate) {
  if (reference.cols() != estimate.cols() ||
      reference.rows() > estimate.rows())
    throw ConfigError("cannot align matrices of incompatible shape");
  struct Pair {
    double tv;
    std::size_t ref;
    std::size_t est;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < reference.rows(); ++i)
    for (std::size_t j = 0; j < estimate.rows(); ++j)
      pairs.push_back({total_variation(reference.row(i), estimate.row(j)), i, j});
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Pair& a, const Pair& b) { return a.tv < b.tv; });
  std::vector<std::size_t> match(reference.rows(), estimate.rows());
  std::vector<char> used(estimate.rows(), 0);
  for (const auto& p : pairs) {
    if (match[p.ref] != estimate.rows() || used[p.est]) continue;
    match[p.ref] = p.est;
    used[p.est] = 1;
  }
  return match;
}

Snapshot permute_groups(const Snapshot& snapshot,
                        std::span<const std::size_t> perm) {
  const std::size_t k_count = snapshot.k();
  if (perm.size() != k_count) throw ConfigError("permutation length differs from K");
  std::vector<std::size_t> inverse(k_count, k_count);
  for (std::size_t i = 0; i < k_count; ++i) {
    if (perm[i] >= k_count || inverse[perm[i]] != k_count)
      throw ConfigError("not a permutation");
    inverse[perm[i]] = i;
  }
  Snapshot out = snapshot;
  std::vector<double> alpha(k_count);
  for (std::size_t i = 0; i < k_count; ++i) {
    alpha[i] = snapshot.hyper.alpha()[perm[i]];
    out.group_totals[i] = snapshot.group_totals[perm[i]];
    auto src = snapshot.group_type.row(perm[i]);
    std::copy(src.begin(), src.end(), out.group_type.row(i).begin());
    for (std::size_t r = 0; r < snapshot.room_group.rows(); ++r)
      out.room_group(r, i) = snapshot.room_group(r, perm[i]);
  }
  out.hyper.set_alpha(std::move(alpha));
  for (auto& zr : out.z)
    for (int& g : zr) g = static_cast<int>(inverse[g]);
  return out;
}

}  // namespace assemblage
