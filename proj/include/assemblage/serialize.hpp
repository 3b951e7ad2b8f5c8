// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "assemblage/baseline.hpp"
#include "assemblage/heldout.hpp"
#include "assemblage/priors.hpp"
#include "assemblage/sampler.hpp"
#include "assemblage/synth.hpp"

namespace assemblage {

// Counts and hyperparameters of a mixed-membership model taken from one
// designated snapshot.
struct TopicModelCounts {
  std::uint64_t iteration = 0;
  Hyperparams hyper{{1.0}, 1.0};
  Matrix<int> group_type;
  std::vector<int> group_totals;
  std::optional<RoomTypePriors> priors;  // present for cfg
};

// Frozen parameters of any of the four families.
struct TrainedModel {
  Family family = Family::simple;
  std::variant<SimpleModel, CondSimpleModel, TopicModelCounts> params;

  PredictiveModel predictive() const;
};

TrainedModel trained_simple(SimpleModel model);
TrainedModel trained_cond(CondSimpleModel model);
TrainedModel trained_fg(const Snapshot& snapshot);
TrainedModel trained_cfg(const Snapshot& snapshot, RoomTypePriors priors);

nlohmann::json to_json(const TrainedModel& model);
// Throws DataError on a malformed or unsupported document.
TrainedModel trained_model_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const RoomTypePriors& priors);
RoomTypePriors room_type_priors_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const Hyperparams& hyper);
Hyperparams hyperparams_from_json(const nlohmann::json& doc);

// Chain snapshot file: config echo, generator, and per-snapshot z
// assignments plus group totals used as a checksum.
nlohmann::json chain_to_json(const ChainResult& chain, const ChainConfig& config,
                             std::uint64_t corpus_hash);

struct LoadedChain {
  ChainConfig config;
  std::uint64_t corpus_hash = 0;
  std::vector<Snapshot> snapshots;
};

// Rebuilds counts from z against `train` and verifies them against the stored
// totals. Throws DataError on any mismatch.
LoadedChain chain_from_json(const nlohmann::json& doc, const CorpusView& train);

nlohmann::json to_json(const GroundTruth& truth, const Vocabulary& vocab);

}  // namespace assemblage
