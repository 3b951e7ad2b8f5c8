// Apache License, Version 2.0, refer to LICENSE.txt

#include "assemblage/heldout.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "assemblage/error.hpp"
#include "assemblage/random.hpp"

namespace assemblage {

std::string_view family_name(Family family) {
  switch (family) {
    case Family::simple: return "simple";
    case Family::cond_simple: return "cond_simple";
    case Family::fg: return "fg";
    case Family::cfg: return "cfg";
  }
  return "?";
}

std::optional<Family> parse_family(std::string_view name) {
  if (name == "simple") return Family::simple;
  if (name == "cond" || name == "cond_simple") return Family::cond_simple;
  if (name == "fg") return Family::fg;
  if (name == "cfg") return Family::cfg;
  return std::nullopt;
}

std::string_view method_name(EstimateMethod method) {
  switch (method) {
    case EstimateMethod::exact: return "exact";
    case EstimateMethod::left_to_right: return "left_to_right";
    case EstimateMethod::closed_form: return "closed_form";
  }
  return "?";
}

Matrix<double> smoothed_phi(const Matrix<int>& group_type,
                            std::span<const int> group_totals, double beta) {
  if (group_totals.size() != group_type.rows())
    throw ConfigError("group totals and group-type counts disagree on K");
  const double vbeta = static_cast<double>(group_type.cols()) * beta;
  Matrix<double> phi(group_type.rows(), group_type.cols());
  for (std::size_t k = 0; k < group_type.rows(); ++k) {
    const double denom = group_totals[k] + vbeta;
    for (std::size_t a = 0; a < group_type.cols(); ++a)
      phi(k, a) = (group_type(k, a) + beta) / denom;
  }
  return phi;
}

std::span<const double> TopicParams::alpha_for(int room_type) const {
  if (priors) return priors->alpha_for(room_type);
  return alpha;
}

namespace {

void check_phi(const Matrix<double>& phi) {
  if (phi.rows() == 0 || phi.cols() == 0)
    throw ConfigError("phi must be non-empty");
  for (std::size_t k = 0; k < phi.rows(); ++k) {
    double s = 0.0;
    for (double v : phi.row(k)) {
      if (!(v >= 0.0)) throw ConfigError("phi entries must be non-negative");
      s += v;
    }
    if (std::fabs(s - 1.0) > 1e-9)
      throw ConfigError("phi row " + std::to_string(k) + " does not sum to 1");
  }
}

void check_alpha(std::span<const double> alpha, std::size_t k) {
  if (alpha.size() != k) throw ConfigError("alpha length differs from K");
  for (double a : alpha)
    if (!(a > 0.0)) throw ConfigError("alpha entries must be positive");
}

}  // namespace

PredictiveModel PredictiveModel::simple(SimpleModel model) {
  return PredictiveModel(Family::simple, std::move(model));
}

PredictiveModel PredictiveModel::cond_simple(CondSimpleModel model) {
  return PredictiveModel(Family::cond_simple, std::move(model));
}

PredictiveModel PredictiveModel::fg(const Snapshot& snapshot) {
  return fg(smoothed_phi(snapshot.group_type, snapshot.group_totals,
                         snapshot.hyper.beta()),
            snapshot.hyper.alpha());
}

PredictiveModel PredictiveModel::cfg(const Snapshot& snapshot,
                                     RoomTypePriors priors) {
  return cfg(smoothed_phi(snapshot.group_type, snapshot.group_totals,
                          snapshot.hyper.beta()),
             std::move(priors));
}

PredictiveModel PredictiveModel::fg(Matrix<double> phi,
                                    std::vector<double> alpha) {
  check_phi(phi);
  check_alpha(alpha, phi.rows());
  return PredictiveModel(Family::fg,
                         TopicParams{std::move(phi), std::move(alpha), {}});
}

PredictiveModel PredictiveModel::cfg(Matrix<double> phi,
                                     RoomTypePriors priors) {
  check_phi(phi);
  if (priors.k() != phi.rows())
    throw ConfigError("room-type priors and phi disagree on K");
  check_alpha(priors.global_alpha, phi.rows());
  std::vector<double> global = priors.global_alpha;
  return PredictiveModel(
      Family::cfg,
      TopicParams{std::move(phi), std::move(global), std::move(priors)});
}

std::size_t PredictiveModel::vocab_size() const {
  switch (family_) {
    case Family::simple: return simple_model().vocab_size();
    case Family::cond_simple: return cond_model().vocab_size();
    default: return topics().phi.cols();
  }
}

const SimpleModel& PredictiveModel::simple_model() const {
  return std::get<SimpleModel>(params_);
}
const CondSimpleModel& PredictiveModel::cond_model() const {
  return std::get<CondSimpleModel>(params_);
}
const TopicParams& PredictiveModel::topics() const {
  return std::get<TopicParams>(params_);
}

bool exact_feasible(std::size_t k, std::size_t n_tokens) {
  double states = 1.0;
  for (std::size_t i = 0; i < n_tokens; ++i) {
    states *= static_cast<double>(k);
    if (states > kExactGuard) return false;
  }
  return true;
}

namespace {

const TopicParams& topic_params_of(const PredictiveModel& model) {
  if (model.family() != Family::fg && model.family() != Family::cfg)
    throw ConfigError("estimator requires an fg or cfg model");
  return model.topics();
}

void check_room_tokens(const Room& room, std::size_t vocab) {
  for (TypeId t : room.tokens)
    if (t < 0 || static_cast<std::size_t>(t) >= vocab)
      throw DataError("token id outside the model vocabulary");
}

}  // namespace

double exact_log_marginal(const Room& room, const PredictiveModel& model) {
  const TopicParams& tp = topic_params_of(model);
  const std::size_t k_count = tp.k();
  const std::size_t n = room.tokens.size();
  check_room_tokens(room, tp.phi.cols());
  if (!exact_feasible(k_count, n))
    throw ConfigError("exact enumeration needs K^N_r <= 1e7 (K=" +
                      std::to_string(k_count) + ", N_r=" + std::to_string(n) +
                      "); use left_to_right");
  if (n == 0) return 0.0;

  const auto alpha = tp.alpha_for(room.room_type);
  const double alpha0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  // lg[k][c] = log Gamma(alpha_k + c) - log Gamma(alpha_k)
  Matrix<double> lg(k_count, n + 1);
  for (std::size_t k = 0; k < k_count; ++k)
    for (std::size_t c = 0; c <= n; ++c)
      lg(k, c) = std::lgamma(alpha[k] + static_cast<double>(c)) -
                 std::lgamma(alpha[k]);
  const double norm =
      std::lgamma(alpha0) - std::lgamma(alpha0 + static_cast<double>(n));
  Matrix<double> log_phi(k_count, n);
  for (std::size_t k = 0; k < k_count; ++k)
    for (std::size_t i = 0; i < n; ++i)
      log_phi(k, i) = std::log(tp.phi(k, room.tokens[i]));

  // Odometer over z with counts maintained incrementally; the sum is
  // accumulated as a running (max, scaled sum) pair.
  std::vector<std::size_t> z(n, 0);
  std::vector<std::size_t> counts(k_count, 0);
  counts[0] = n;
  double emission = 0.0;
  for (std::size_t i = 0; i < n; ++i) emission += log_phi(0, i);

  double top = -std::numeric_limits<double>::infinity();
  double scaled = 0.0;
  for (;;) {
    double term = norm + emission;
    for (std::size_t k = 0; k < k_count; ++k) term += lg(k, counts[k]);
    if (term > top) {
      scaled = scaled * std::exp(top - term) + 1.0;
      top = term;
    } else {
      scaled += std::exp(term - top);
    }

    std::size_t pos = 0;
    while (pos < n) {
      const std::size_t old = z[pos];
      const std::size_t next = old + 1 == k_count ? 0 : old + 1;
      --counts[old];
      ++counts[next];
      emission += log_phi(next, pos) - log_phi(old, pos);
      z[pos] = next;
      if (next != 0) break;
      ++pos;
    }
    if (pos == n) break;
    // Re-anchor the running emission sum occasionally to bound drift.
    if (pos + 1 == n) {
      emission = 0.0;
      for (std::size_t i = 0; i < n; ++i) emission += log_phi(z[i], i);
    }
  }
  return top + std::log(scaled);
}

HeldOutEstimate left_to_right(const Room& room, const PredictiveModel& model,
                              std::size_t particles, std::uint64_t seed) {
  if (particles < 1) throw ConfigError("left_to_right needs at least 1 particle");
  const TopicParams& tp = topic_params_of(model);
  check_room_tokens(room, tp.phi.cols());
  const std::size_t k_count = tp.k();
  const std::size_t n = room.tokens.size();
  const auto alpha = tp.alpha_for(room.room_type);
  const double alpha0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
  const auto& x = room.tokens;

  Rng rng(seed);
  Matrix<int> z(particles, n, 0);
  Matrix<int> counts(particles, k_count, 0);
  std::vector<double> w(k_count);

  double log_prob = 0.0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    double p_pos = 0.0;
    for (std::size_t p = 0; p < particles; ++p) {
      auto zp = z.row(p);
      auto cp = counts.row(p);
      for (std::size_t prev = 0; prev < pos; ++prev) {
        --cp[zp[prev]];
        double total = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
          w[k] = (cp[k] + alpha[k]) * tp.phi(k, x[prev]);
          total += w[k];
        }
        zp[prev] = static_cast<int>(rng.categorical(w, total));
        ++cp[zp[prev]];
      }
      double total = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        w[k] = (cp[k] + alpha[k]) * tp.phi(k, x[pos]);
        total += w[k];
      }
      p_pos += total / (static_cast<double>(pos) + alpha0);
      zp[pos] = static_cast<int>(rng.categorical(w, total));
      ++cp[zp[pos]];
    }
    log_prob += std::log(p_pos / static_cast<double>(particles));
  }
  if (!std::isfinite(log_prob))
    throw NumericError("left_to_right produced a non-finite log probability");
  return HeldOutEstimate{log_prob, n, EstimateMethod::left_to_right, particles,
                         seed};
}

HeldOutEstimate room_log_prob(const Room& room, const PredictiveModel& model,
                              const EstimatorConfig& config) {
  switch (model.family()) {
    case Family::simple:
      return {logprob_simple(model.simple_model(), room), room.size(),
              EstimateMethod::closed_form, 0, 0};
    case Family::cond_simple:
      return {logprob_cond(model.cond_model(), room), room.size(),
              EstimateMethod::closed_form, 0, 0};
    case Family::fg:
    case Family::cfg:
      if (config.prefer_exact && exact_feasible(model.topics().k(), room.size()))
        return {exact_log_marginal(room, model), room.size(),
                EstimateMethod::exact, 0, 0};
      return left_to_right(room, model, config.particles, config.seed);
  }
  throw ConfigError("unknown model family");
}

HeldOutEstimate average_room_log_prob(const Room& room,
                                      std::span<const PredictiveModel> models,
                                      const EstimatorConfig& config) {
  if (models.empty()) throw ConfigError("no models to average");
  HeldOutEstimate out;
  double sum = 0.0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    EstimatorConfig c = config;
    c.seed = derive_seed(config.seed, {i});
    auto e = room_log_prob(room, models[i], c);
    sum += e.log_prob;
    if (i == 0) out = e;
  }
  out.log_prob = sum / static_cast<double>(models.size());
  out.seed = config.seed;
  return out;
}

double perplexity(const HeldOutEstimate& estimate) {
  if (estimate.n_tokens == 0)
    throw DataError("perplexity is undefined for an empty room");
  return -estimate.log_prob / static_cast<double>(estimate.n_tokens);
}

}  // namespace assemblage
