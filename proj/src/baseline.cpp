// Apache License, Version 2.0, refer to LICENSE.txt

#include "assemblage/baseline.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "assemblage/error.hpp"

namespace assemblage {

namespace {

void check_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta))
    throw ConfigError("eta must be a positive finite number, got " +
                      std::to_string(eta));
}

void check_tokens(std::span<const TypeId> tokens, std::size_t vocab) {
  for (TypeId t : tokens)
    if (t < 0 || static_cast<std::size_t>(t) >= vocab)
      throw DataError("token id outside the model vocabulary");
}

}  // namespace

SimpleModel::SimpleModel(std::vector<std::int64_t> counts, double eta)
    : counts_(std::move(counts)), eta_(eta) {
  check_eta(eta);
  if (counts_.empty()) throw ConfigError("vocabulary is empty");
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

double SimpleModel::prob(TypeId a) const {
  return (static_cast<double>(counts_.at(a)) + eta_) /
         (static_cast<double>(total_) +
          static_cast<double>(counts_.size()) * eta_);
}

double SimpleModel::log_prob(std::span<const TypeId> tokens) const {
  check_tokens(tokens, counts_.size());
  const double log_denom = std::log(static_cast<double>(total_) +
                                    static_cast<double>(counts_.size()) * eta_);
  double lp = 0.0;
  for (TypeId t : tokens)
    lp += std::log(static_cast<double>(counts_[t]) + eta_) - log_denom;
  return lp;
}

CondSimpleModel::CondSimpleModel(Matrix<std::int64_t> counts_by_type,
                                 double eta)
    : counts_(std::move(counts_by_type)), eta_(eta) {
  check_eta(eta);
  if (counts_.rows() != kRoomTypeCount)
    throw ConfigError("conditional model needs one row per room type");
  if (counts_.cols() == 0) throw ConfigError("vocabulary is empty");
  totals_.resize(counts_.rows());
  for (std::size_t t = 0; t < counts_.rows(); ++t) {
    auto row = counts_.row(t);
    totals_[t] = std::accumulate(row.begin(), row.end(), std::int64_t{0});
  }
}

double CondSimpleModel::prob(int room_type, TypeId a) const {
  return (static_cast<double>(counts_(room_type, a)) + eta_) /
         (static_cast<double>(totals_.at(room_type)) +
          static_cast<double>(counts_.cols()) * eta_);
}

double CondSimpleModel::log_prob(int room_type,
                                 std::span<const TypeId> tokens) const {
  if (!valid_room_type(room_type)) throw DataError("room type outside 0..22");
  check_tokens(tokens, counts_.cols());
  const double log_denom =
      std::log(static_cast<double>(totals_[room_type]) +
               static_cast<double>(counts_.cols()) * eta_);
  double lp = 0.0;
  for (TypeId t : tokens)
    lp += std::log(static_cast<double>(counts_(room_type, t)) + eta_) -
          log_denom;
  return lp;
}

SimpleModel fit_simple(const CorpusView& train, double eta) {
  check_eta(eta);
  std::vector<std::int64_t> counts(train.vocab_size(), 0);
  for (const Room* r : train.rooms())
    for (TypeId t : r->tokens) ++counts[t];
  return SimpleModel(std::move(counts), eta);
}

CondSimpleModel fit_cond(const CorpusView& train, double eta) {
  check_eta(eta);
  Matrix<std::int64_t> counts(kRoomTypeCount, train.vocab_size(), 0);
  for (const Room* r : train.rooms())
    for (TypeId t : r->tokens) ++counts(r->room_type, t);
  return CondSimpleModel(std::move(counts), eta);
}

double logprob_simple(const SimpleModel& model, const Room& room) {
  return model.log_prob(room.tokens);
}

double logprob_cond(const CondSimpleModel& model, const Room& room) {
  return model.log_prob(room.room_type, room.tokens);
}

}  // namespace assemblage
