// Apache License, Version 2.0, refer to LICENSE.txt

#include "assemblage/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "assemblage/error.hpp"
#include "assemblage/hash.hpp"
#include "assemblage/priors.hpp"
#include "assemblage/special.hpp"
#include "csv.hpp"

namespace assemblage {

std::string_view phi_mode_name(PhiMode mode) {
  return mode == PhiMode::last ? "last" : "average";
}

std::optional<PhiMode> parse_phi_mode(std::string_view name) {
  if (name == "last") return PhiMode::last;
  if (name == "average") return PhiMode::average;
  return std::nullopt;
}

bool EvalConfig::wants(Family f) const {
  return std::find(families.begin(), families.end(), f) != families.end();
}

void EvalConfig::validate() const {
  if (families.empty()) throw ConfigError("no model families requested");
  if (wants(Family::fg) || wants(Family::cfg)) {
    if (k_grid.empty()) throw ConfigError("K grid is empty");
    for (auto k : k_grid)
      if (k < 1) throw ConfigError("every K must be at least 1");
    if (seeds < 1) throw ConfigError("seeds must be at least 1");
    if (particles < 1) throw ConfigError("particles must be at least 1");
    ChainConfig c = chain;
    c.k = k_grid.front();
    c.validate();
  }
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (workers < 1) throw ConfigError("workers must be at least 1");
}

std::string EvalConfig::canonical() const {
  std::ostringstream s;
  s << "families=";
  for (auto f : families) s << family_name(f) << ';';
  s << "\nk=";
  for (auto k : k_grid) s << k << ';';
  s << "\nseeds=" << seeds << "\nroot_seed=" << root_seed
    << "\neta=" << csv::format_double(eta)
    << "\niterations=" << chain.iterations << "\nsave_every=" << chain.save_every
    << "\nburn_in=" << chain.burn_in << "\noptimize_every=" << chain.optimize_every
    << "\nalpha_total=" << csv::format_double(chain.alpha_total)
    << "\nbeta=" << csv::format_double(chain.beta)
    << "\noptimize_passes=" << chain.optimize_passes
    << "\nparticles=" << particles << "\nprefer_exact=" << prefer_exact
    << "\nphi_mode=" << phi_mode_name(phi_mode) << '\n';
  return s.str();
}

namespace {

// Runs fn(0..n-1) on up to `workers` threads. The first exception (lowest
// job index) is rethrown after all threads finish.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(workers, n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(context + e.what());
  } catch (const DataError& e) {
    throw DataError(context + e.what());
  } catch (const NumericError& e) {
    throw NumericError(context + e.what());
  }
}

struct Job {
  std::size_t fold;
  bool baseline;
  std::size_t k = 0;
  std::size_t replicate = 0;
};

EvalRecord make_record(const LooSplit& split, const Room& room, Family family,
                       std::size_t k, std::size_t replicate,
                       const HeldOutEstimate& e, PhiMode mode) {
  EvalRecord r;
  r.fold = split.fold_index;
  r.house_id = room.house_id;
  r.room_id = room.room_id;
  r.room_type = room.room_type;
  r.family = family;
  r.k = k;
  r.seed = replicate;
  r.n_tokens = e.n_tokens;
  r.log_prob = e.log_prob;
  r.perplexity = perplexity(e);
  r.method = e.method;
  r.particles = e.particles;
  r.estimator_seed = e.seed;
  r.phi_mode = mode;
  return r;
}

std::vector<EvalRecord> run_baselines(const LooSplit& split,
                                      const EvalConfig& config) {
  std::vector<EvalRecord> out;
  std::vector<std::pair<Family, PredictiveModel>> models;
  if (config.wants(Family::simple))
    models.emplace_back(Family::simple, PredictiveModel::simple(
                                            fit_simple(split.train, config.eta)));
  if (config.wants(Family::cond_simple))
    models.emplace_back(
        Family::cond_simple,
        PredictiveModel::cond_simple(fit_cond(split.train, config.eta)));
  for (const Room* room : split.test.rooms()) {
    if (room->tokens.empty()) continue;
    for (const auto& [family, model] : models)
      out.push_back(make_record(split, *room, family, 0, 0,
                                room_log_prob(*room, model, {}),
                                config.phi_mode));
  }
  return out;
}

std::vector<EvalRecord> run_mixed(const LooSplit& split, const Job& job,
                                  const EvalConfig& config) {
  ChainConfig chain = config.chain;
  chain.k = job.k;
  chain.seed =
      derive_seed(config.root_seed, {split.fold_index, job.k, job.replicate});
  const ChainResult result = run_chain(split.train, chain);
  const auto& snapshots = result.snapshots;

  std::vector<PredictiveModel> fg_models;
  std::vector<PredictiveModel> cfg_models;
  const bool average = config.phi_mode == PhiMode::average;
  std::span<const Snapshot> used =
      average ? std::span<const Snapshot>(snapshots)
              : std::span<const Snapshot>(&snapshots.back(), 1);
  if (config.wants(Family::fg))
    for (const auto& s : used) fg_models.push_back(PredictiveModel::fg(s));
  if (config.wants(Family::cfg)) {
    RoomTypePriors priors = fit_room_type_priors(snapshots, split.train, job.k);
    for (const auto& s : used)
      cfg_models.push_back(PredictiveModel::cfg(s, priors));
  }

  std::vector<EvalRecord> out;
  const auto rooms = split.test.rooms();
  for (std::size_t j = 0; j < rooms.size(); ++j) {
    const Room& room = *rooms[j];
    if (room.tokens.empty()) continue;
    // fg and cfg share the estimator seed, so a cfg room whose type fell back
    // to the global prior scores identically to fg.
    EstimatorConfig est{config.particles, derive_seed(chain.seed, {j}),
                        config.prefer_exact};
    if (!fg_models.empty())
      out.push_back(make_record(split, room, Family::fg, job.k, job.replicate,
                                average_room_log_prob(room, fg_models, est),
                                config.phi_mode));
    if (!cfg_models.empty())
      out.push_back(make_record(split, room, Family::cfg, job.k, job.replicate,
                                average_room_log_prob(room, cfg_models, est),
                                config.phi_mode));
  }
  return out;
}

}  // namespace

EvalTable run_loo(const Corpus& corpus, const EvalConfig& config) {
  config.validate();
  const auto splits = loo_splits(corpus);

  EvalTable table;
  table.config_hash = fnv1a(config.canonical());
  table.corpus_hash = content_hash(corpus);
  for (const auto& s : splits) {
    if (s.train.contains_house(s.held_out_house))
      throw DataError("training view leaks held-out house " + s.held_out_house);
    table.fold_train_hashes.push_back(content_hash(s.train));
    for (const Room* r : s.test.rooms())
      if (r->tokens.empty()) ++table.skipped_empty_rooms;
  }

  const bool baselines =
      config.wants(Family::simple) || config.wants(Family::cond_simple);
  const bool mixed = config.wants(Family::fg) || config.wants(Family::cfg);
  std::vector<Job> jobs;
  for (std::size_t f = 0; f < splits.size(); ++f) {
    if (baselines) jobs.push_back({f, true});
    if (mixed)
      for (auto k : config.k_grid)
        for (std::size_t s = 0; s < config.seeds; ++s)
          jobs.push_back({f, false, k, s});
  }

  std::vector<std::vector<EvalRecord>> results(jobs.size());
  parallel_for(jobs.size(), config.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    const LooSplit& split = splits[job.fold];
    try {
      results[i] = job.baseline ? run_baselines(split, config)
                                : run_mixed(split, job, config);
    } catch (const Error&) {
      std::string context = "fold " + std::to_string(job.fold) + " (house " +
                            split.held_out_house + ")";
      if (!job.baseline)
        context += ", K=" + std::to_string(job.k) + ", replicate " +
                   std::to_string(job.replicate);
      rethrow_with_context(context + ": ");
    }
  });
  for (auto& r : results)
    table.records.insert(table.records.end(), r.begin(), r.end());
  return table;
}

namespace {

// Key identifying a scored room across K and replicates.
using RoomKey = std::tuple<std::size_t, std::string, std::string, Family>;

struct RoomValue {
  std::string house_id;
  int room_type = 0;
  double sum_perplexity = 0.0;
  double sum_log_prob = 0.0;
  std::size_t n_tokens = 0;
  std::size_t n = 0;
  std::size_t order = 0;
};

double room_perplexity(const RoomValue& v, KAveraging averaging) {
  if (averaging == KAveraging::perplexity)
    return v.sum_perplexity / static_cast<double>(v.n);
  return -(v.sum_log_prob / static_cast<double>(v.n)) /
         static_cast<double>(v.n_tokens);
}

bool selected(const EvalRecord& r, const AggregateOptions& options) {
  if (r.family == Family::simple || r.family == Family::cond_simple) return true;
  return !options.k || r.k == *options.k;
}

}  // namespace

std::vector<SummaryRow> aggregate(const EvalTable& table,
                                  const AggregateOptions& options) {
  if (table.records.empty()) throw DataError("cannot aggregate an empty table");

  // K grouping keeps K in the room key, so replicates are averaged per K.
  using Key = std::tuple<RoomKey, std::size_t>;
  std::map<Key, RoomValue> rooms;
  std::size_t order = 0;
  for (const auto& r : table.records) {
    if (!selected(r, options)) continue;
    std::size_t kk = options.by == GroupBy::k ? r.k : 0;
    Key key{RoomKey{r.fold, r.house_id, r.room_id, r.family}, kk};
    auto [it, inserted] = rooms.try_emplace(key);
    RoomValue& v = it->second;
    if (inserted) {
      v.house_id = r.house_id;
      v.room_type = r.room_type;
      v.n_tokens = r.n_tokens;
      v.order = order++;
    }
    v.sum_perplexity += r.perplexity;
    v.sum_log_prob += r.log_prob;
    ++v.n;
  }

  // Group key ordering: houses by first appearance, room types and K
  // numerically.
  struct Acc {
    std::vector<double> values;
    std::size_t order;
  };
  std::map<std::pair<std::string, Family>, Acc> groups;
  std::map<std::string, std::size_t> group_order;
  for (const auto& [key, v] : rooms) {
    const Family family = std::get<3>(std::get<0>(key));
    std::string g;
    std::size_t g_order = 0;
    switch (options.by) {
      case GroupBy::house:
        g = v.house_id;
        break;
      case GroupBy::room_type:
        g = std::to_string(v.room_type);
        g_order = static_cast<std::size_t>(v.room_type);
        break;
      case GroupBy::k:
        g = std::to_string(std::get<1>(key));
        g_order = std::get<1>(key);
        break;
    }
    if (options.by == GroupBy::house) {
      auto [it, inserted] = group_order.try_emplace(g, v.order);
      if (!inserted) it->second = std::min(it->second, v.order);
    } else {
      group_order.try_emplace(g, g_order);
    }
    groups[{g, family}].values.push_back(room_perplexity(v, options.averaging));
  }

  std::vector<SummaryRow> out;
  for (const auto& [key, acc] : groups) {
    const auto& vals = acc.values;
    SummaryRow row{key.first, key.second, 0.0, vals.size(), 0.0};
    for (double v : vals) row.mean += v;
    row.mean /= static_cast<double>(vals.size());
    if (vals.size() >= 2) {
      double ss = 0.0;
      for (double v : vals) ss += (v - row.mean) * (v - row.mean);
      row.sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
    }
    out.push_back(std::move(row));
  }
  std::stable_sort(out.begin(), out.end(),
                   [&](const SummaryRow& a, const SummaryRow& b) {
                     auto oa = group_order.at(a.group);
                     auto ob = group_order.at(b.group);
                     if (oa != ob) return oa < ob;
                     return a.family < b.family;
                   });
  return out;
}

PairedTTest paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ConfigError("paired t-test needs equal-length samples");
  if (a.size() < 2) throw ConfigError("paired t-test needs at least 2 pairs");
  const double n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  PairedTTest out;
  out.df = n - 1.0;
  const double sd = std::sqrt(ss / out.df);
  if (sd == 0.0) {
    if (mean == 0.0) return out;
    out.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
    out.p = 0.0;
    out.degenerate = true;
    return out;
  }
  out.t = mean / (sd / std::sqrt(n));
  out.p = student_t_two_sided(out.t, out.df);
  return out;
}

std::vector<PairwiseTest> pairwise_house_tests(const EvalTable& table,
                                               const AggregateOptions& options) {
  AggregateOptions by_house = options;
  by_house.by = GroupBy::house;
  auto rows = aggregate(table, by_house);
  std::map<Family, std::map<std::string, double>> means;
  for (const auto& r : rows) means[r.family][r.group] = r.mean;

  std::vector<PairwiseTest> out;
  for (auto ia = means.begin(); ia != means.end(); ++ia) {
    for (auto ib = std::next(ia); ib != means.end(); ++ib) {
      std::vector<double> a, b;
      for (const auto& [house, m] : ia->second) {
        auto hit = ib->second.find(house);
        if (hit == ib->second.end()) continue;
        a.push_back(m);
        b.push_back(hit->second);
      }
      if (a.size() < 2) continue;
      out.push_back({ia->first, ib->first, a.size(), paired_t_test(a, b)});
    }
  }
  return out;
}

namespace {

std::string provenance_line(const EvalTable& t) {
  return "# format_version=" + std::to_string(kFormatVersion) +
         " config_hash=" + to_hex(t.config_hash) +
         " corpus_hash=" + to_hex(t.corpus_hash) + "\n";
}

}  // namespace

std::string eval_table_csv(const EvalTable& table) {
  std::ostringstream out;
  out << provenance_line(table);
  out << "fold,house_id,room_id,room_type,family,k,seed,n_tokens,log_prob,"
         "perplexity,method,particles,estimator_seed,phi_mode\n";
  for (const auto& r : table.records) {
    out << r.fold << ',' << csv::escape(r.house_id) << ','
        << csv::escape(r.room_id) << ',' << r.room_type << ','
        << family_name(r.family) << ',' << r.k << ',' << r.seed << ','
        << r.n_tokens << ',' << csv::format_double(r.log_prob) << ','
        << csv::format_double(r.perplexity) << ',' << method_name(r.method)
        << ',' << r.particles << ',' << r.estimator_seed << ','
        << phi_mode_name(r.phi_mode) << '\n';
  }
  return out.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows,
                        const EvalTable& provenance,
                        std::string_view group_name) {
  std::ostringstream out;
  out << provenance_line(provenance);
  out << group_name << ",family,mean_perplexity,count,sd\n";
  for (const auto& r : rows)
    out << csv::escape(r.group) << ',' << family_name(r.family) << ','
        << csv::format_double(r.mean) << ',' << r.count << ','
        << csv::format_double(r.sd) << '\n';
  return out.str();
}

std::string ttest_csv(const std::vector<PairwiseTest>& tests,
                      const EvalTable& provenance) {
  std::ostringstream out;
  out << provenance_line(provenance);
  out << "family_a,family_b,n_houses,t,df,p,degenerate\n";
  for (const auto& t : tests)
    out << family_name(t.a) << ',' << family_name(t.b) << ',' << t.n << ','
        << csv::format_double(t.test.t) << ',' << csv::format_double(t.test.df)
        << ',' << csv::format_double(t.test.p) << ','
        << (t.test.degenerate ? 1 : 0) << '\n';
  return out.str();
}

}  // namespace assemblage
