// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "assemblage/baseline.hpp"
#include "assemblage/corpus.hpp"
#include "assemblage/matrix.hpp"
#include "assemblage/priors.hpp"
#include "assemblage/sampler.hpp"

namespace assemblage {

enum class Family { simple, cond_simple, fg, cfg };

std::string_view family_name(Family family);
// Accepts simple, cond, cond_simple, fg, cfg.
std::optional<Family> parse_family(std::string_view name);

// Smoothed group-type distributions (N_{a|k} + beta) / (N_{.|k} + |A| beta).
Matrix<double> smoothed_phi(const Matrix<int>& group_type,
                            std::span<const int> group_totals, double beta);

// Frozen mixed-membership parameters used at test time.
struct TopicParams {
  Matrix<double> phi;  // K x |A|, rows sum to 1
  std::vector<double> alpha;
  std::optional<RoomTypePriors> priors;

  std::size_t k() const { return phi.rows(); }
  // Room-type row for cfg (global alpha for fallback rows), global otherwise.
  std::span<const double> alpha_for(int room_type) const;
};

class PredictiveModel {
 public:
  static PredictiveModel simple(SimpleModel model);
  static PredictiveModel cond_simple(CondSimpleModel model);
  // Phi is smoothed from the snapshot's counts with the snapshot's beta.
  static PredictiveModel fg(const Snapshot& snapshot);
  static PredictiveModel cfg(const Snapshot& snapshot, RoomTypePriors priors);
  // Direct parameterisation; phi rows must sum to 1 within 1e-9.
  static PredictiveModel fg(Matrix<double> phi, std::vector<double> alpha);
  static PredictiveModel cfg(Matrix<double> phi, RoomTypePriors priors);

  Family family() const { return family_; }
  std::size_t vocab_size() const;
  const SimpleModel& simple_model() const;
  const CondSimpleModel& cond_model() const;
  const TopicParams& topics() const;

 private:
  using Params = std::variant<SimpleModel, CondSimpleModel, TopicParams>;
  PredictiveModel(Family family, Params params)
      : family_(family), params_(std::move(params)) {}

  Family family_;
  Params params_;
};

enum class EstimateMethod { exact, left_to_right, closed_form };

std::string_view method_name(EstimateMethod method);

struct HeldOutEstimate {
  double log_prob = 0.0;  // nats
  std::size_t n_tokens = 0;
  EstimateMethod method = EstimateMethod::closed_form;
  std::size_t particles = 0;
  std::uint64_t seed = 0;
};

struct EstimatorConfig {
  std::size_t particles = 20;
  std::uint64_t seed = 0;
  // Use exact enumeration for fg/cfg rooms that fit under the guard.
  bool prefer_exact = false;
};

// Largest K^N_r that exact enumeration will attempt.
inline constexpr double kExactGuard = 1e7;

bool exact_feasible(std::size_t k, std::size_t n_tokens);

// Exact marginal over every assignment of the room's tokens to groups, in log
// space. Throws ConfigError when K^N_r exceeds the guard.
double exact_log_marginal(const Room& room, const PredictiveModel& model);

// Sequential particle estimate: for each position, every particle first
// resamples its earlier assignments, then contributes the predictive
// probability of the next token, then samples that token's group.
HeldOutEstimate left_to_right(const Room& room, const PredictiveModel& model,
                              std::size_t particles, std::uint64_t seed);

// Closed form for the baselines, left-to-right (or exact on request) for the
// mixed-membership families.
HeldOutEstimate room_log_prob(const Room& room, const PredictiveModel& model,
                              const EstimatorConfig& config);

// Mean of per-model log-probabilities, one model per saved snapshot. Each
// model gets its own seed derived from config.seed.
HeldOutEstimate average_room_log_prob(const Room& room,
                                      std::span<const PredictiveModel> models,
                                      const EstimatorConfig& config);

// -log_prob / n_tokens. Throws DataError for an empty room.
double perplexity(const HeldOutEstimate& estimate);

}  // namespace assemblage
