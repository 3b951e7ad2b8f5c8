// Apache License, Version 2.0, refer to LICENSE.txt

#include "assemblage/sampler.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "assemblage/error.hpp"
#include "assemblage/priors.hpp"

namespace assemblage {

Hyperparams::Hyperparams(std::vector<double> alpha, double beta) {
  set_alpha(std::move(alpha));
  set_beta(beta);
}

Hyperparams Hyperparams::symmetric(std::size_t k, double alpha_each,
                                   double beta) {
  return Hyperparams(std::vector<double>(k, alpha_each), beta);
}

void Hyperparams::set_alpha(std::vector<double> alpha) {
  if (alpha.empty()) throw ConfigError("alpha must have at least one group");
  for (double a : alpha)
    if (!(a > 0.0) || !std::isfinite(a))
      throw ConfigError("alpha entries must be positive and finite");
  alpha_ = std::move(alpha);
  alpha_sum_ = std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
}

void Hyperparams::set_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw ConfigError("beta must be positive and finite");
  beta_ = beta;
}

std::shared_ptr<const TrainingData> TrainingData::from(
    const CorpusView& train) {
  auto data = std::make_shared<TrainingData>();
  data->vocab_size = train.vocab_size();
  for (const Room* r : train.rooms()) {
    data->docs.push_back(r->tokens);
    data->room_types.push_back(r->room_type);
  }
  return data;
}

std::size_t TrainingData::token_count() const {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.size();
  return n;
}

namespace {

struct Counts {
  Matrix<int> room_group;
  Matrix<int> group_type;
  std::vector<int> group_totals;
};

Counts recount(const TrainingData& data, std::size_t k,
               const std::vector<std::vector<int>>& z) {
  if (z.size() != data.docs.size())
    throw DataError("assignments cover " + std::to_string(z.size()) +
                    " rooms, training data has " +
                    std::to_string(data.docs.size()));
  Counts c{Matrix<int>(data.docs.size(), k, 0),
           Matrix<int>(k, data.vocab_size, 0), std::vector<int>(k, 0)};
  for (std::size_t r = 0; r < data.docs.size(); ++r) {
    const auto& doc = data.docs[r];
    if (z[r].size() != doc.size())
      throw DataError("room " + std::to_string(r) + " has " +
                      std::to_string(z[r].size()) + " assignments for " +
                      std::to_string(doc.size()) + " tokens");
    for (std::size_t i = 0; i < doc.size(); ++i) {
      int g = z[r][i];
      if (g < 0 || static_cast<std::size_t>(g) >= k)
        throw DataError("group assignment out of range");
      ++c.room_group(r, g);
      ++c.group_type(g, doc[i]);
      ++c.group_totals[g];
    }
  }
  return c;
}

}  // namespace

GibbsState::GibbsState(std::shared_ptr<const TrainingData> data, std::size_t k,
                       std::vector<std::vector<int>> z, std::uint64_t seed,
                       std::uint64_t iteration)
    : data_(std::move(data)),
      k_(k),
      z_(std::move(z)),
      seed_(seed),
      iteration_(iteration),
      rng_(seed) {
  if (k_ < 1) throw ConfigError("K must be at least 1");
  auto c = recount(*data_, k_, z_);
  room_group_ = std::move(c.room_group);
  group_type_ = std::move(c.group_type);
  group_totals_ = std::move(c.group_totals);
}

bool GibbsState::counts_consistent() const {
  auto c = recount(*data_, k_, z_);
  return c.room_group == room_group_ && c.group_type == group_type_ &&
         c.group_totals == group_totals_;
}

GibbsState init_state(std::shared_ptr<const TrainingData> data,
                      const Hyperparams& hyper, std::uint64_t seed) {
  const std::size_t k = hyper.k();
  if (k < 1) throw ConfigError("K must be at least 1");
  // Initial assignments use a stream separate from the sweep stream.
  Rng init_rng(derive_seed(seed, {0x1417}));
  std::vector<std::vector<int>> z;
  z.reserve(data->docs.size());
  for (const auto& doc : data->docs) {
    std::vector<int> zr(doc.size());
    for (auto& g : zr) g = static_cast<int>(init_rng.below(k));
    z.push_back(std::move(zr));
  }
  return GibbsState(std::move(data), k, std::move(z), seed);
}

std::vector<double> full_conditional(const GibbsState& state,
                                     const Hyperparams& hyper,
                                     std::size_t room, std::size_t position) {
  const auto& data = state.data();
  if (room >= data.docs.size() || position >= data.docs[room].size())
    throw ConfigError("token position out of range");
  if (hyper.k() != state.k())
    throw ConfigError("hyperparameters and state disagree on K");
  const TypeId x = data.docs[room][position];
  const int current = state.z()[room][position];
  const double beta = hyper.beta();
  const double vbeta = static_cast<double>(data.vocab_size) * beta;

  std::vector<double> p(state.k());
  double total = 0.0;
  for (std::size_t k = 0; k < state.k(); ++k) {
    const int own = static_cast<int>(k) == current ? 1 : 0;
    const double n_rk = state.room_group_counts()(room, k) - own;
    const double n_xk = state.group_type_counts()(k, x) - own;
    const double n_k = state.group_totals()[k] - own;
    p[k] = (n_rk + hyper.alpha()[k]) * (n_xk + beta) / (n_k + vbeta);
    total += p[k];
  }
  for (double& v : p) v /= total;
  return p;
}

void sweep(GibbsState& state, const Hyperparams& hyper) {
  if (hyper.k() != state.k())
    throw ConfigError("hyperparameters and state disagree on K");
  const auto& data = *state.data_;
  const std::size_t k_count = state.k_;
  const double beta = hyper.beta();
  const double vbeta = static_cast<double>(data.vocab_size) * beta;
  const auto& alpha = hyper.alpha();
  std::vector<double> weights(k_count);

  for (std::size_t r = 0; r < data.docs.size(); ++r) {
    const auto& doc = data.docs[r];
    auto room_counts = state.room_group_.row(r);
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const TypeId x = doc[i];
      int& g = state.z_[r][i];
      --room_counts[g];
      --state.group_type_(g, x);
      --state.group_totals_[g];

      double total = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        weights[k] = (room_counts[k] + alpha[k]) *
                     (state.group_type_(k, x) + beta) /
                     (state.group_totals_[k] + vbeta);
        total += weights[k];
      }
      g = static_cast<int>(state.rng_.categorical(weights, total));

      ++room_counts[g];
      ++state.group_type_(g, x);
      ++state.group_totals_[g];
    }
  }
  ++state.iteration_;
}

Snapshot take_snapshot(const GibbsState& state, const Hyperparams& hyper) {
  return Snapshot{state.iteration(),         hyper,
                  state.z(),                 state.room_group_counts(),
                  state.group_type_counts(), state.group_totals()};
}

Snapshot snapshot_from_assignments(const TrainingData& data,
                                   std::vector<std::vector<int>> z,
                                   const Hyperparams& hyper,
                                   std::uint64_t iteration) {
  auto c = recount(data, hyper.k(), z);
  return Snapshot{iteration,
                  hyper,
                  std::move(z),
                  std::move(c.room_group),
                  std::move(c.group_type),
                  std::move(c.group_totals)};
}

void ChainConfig::validate() const {
  if (k < 1) throw ConfigError("K must be at least 1");
  if (iterations < 1) throw ConfigError("iterations must be at least 1");
  if (save_every < 1) throw ConfigError("save_every must be at least 1");
  if (burn_in >= iterations)
    throw ConfigError("burn_in (" + std::to_string(burn_in) +
                      ") must be less than iterations (" +
                      std::to_string(iterations) + ")");
  if (!(alpha_total > 0.0) || !(beta > 0.0))
    throw ConfigError("initial alpha and beta must be positive");
  if (snapshot_iterations(*this).empty())
    throw ConfigError("no multiple of save_every (" +
                      std::to_string(save_every) + ") lies in (burn_in, " +
                      "iterations]; the chain would save no snapshots");
}

std::vector<std::size_t> snapshot_iterations(const ChainConfig& config) {
  std::vector<std::size_t> out;
  if (config.save_every == 0) return out;
  for (std::size_t it = config.save_every; it <= config.iterations;
       it += config.save_every)
    if (it > config.burn_in) out.push_back(it);
  return out;
}

ChainResult run_chain(std::shared_ptr<const TrainingData> data,
                      const ChainConfig& config) {
  config.validate();
  Hyperparams hyper = Hyperparams::symmetric(
      config.k, config.alpha_total / static_cast<double>(config.k),
      config.beta);
  GibbsState state = init_state(data, hyper, config.seed);

  std::size_t non_empty_rooms = 0;
  for (const auto& d : data->docs) non_empty_rooms += d.empty() ? 0 : 1;

  ChainResult result;
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    sweep(state, hyper);
    if (it > config.burn_in && config.optimize_every > 0 &&
        it % config.optimize_every == 0) {
      // Alpha needs two non-empty rooms to be identifiable.
      if (non_empty_rooms >= 2 && config.k > 1)
        hyper.set_alpha(optimize_alpha(state.room_group_counts(),
                                       hyper.alpha(), config.optimize_passes));
      hyper.set_beta(optimize_beta(state.group_type_counts(),
                                   state.group_totals(), hyper.beta(),
                                   config.optimize_passes));
    }
    if (it > config.burn_in && it % config.save_every == 0)
      result.snapshots.push_back(take_snapshot(state, hyper));
  }
  result.final_hyper = hyper;
  return result;
}

ChainResult run_chain(const CorpusView& train, const ChainConfig& config) {
  return run_chain(TrainingData::from(train), config);
}

}  // namespace assemblage
