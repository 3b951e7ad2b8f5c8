// Apache License, Version 2.0, refer to LICENSE.txt

#include "assemblage/synth.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "assemblage/error.hpp"
#include "assemblage/random.hpp"

namespace assemblage {

void SynthSpec::validate() const {
  if (phi.rows() == 0 || phi.cols() == 0) throw ConfigError("phi is empty");
  for (std::size_t k = 0; k < phi.rows(); ++k) {
    double s = 0.0;
    for (double v : phi.row(k)) {
      if (!(v >= 0.0)) throw ConfigError("phi entries must be non-negative");
      s += v;
    }
    if (std::fabs(s - 1.0) > 1e-12)
      throw ConfigError("phi row " + std::to_string(k) + " does not sum to 1");
  }
  if (alpha.cols() != phi.rows()) throw ConfigError("alpha width must equal K");
  if (alpha.rows() == 0) throw ConfigError("alpha needs at least one row");
  for (double a : alpha.data())
    if (!(a > 0.0) || !std::isfinite(a))
      throw ConfigError("alpha entries must be positive");
  if (room_types.empty()) throw ConfigError("room_types is empty");
  for (int t : room_types)
    if (!valid_room_type(t)) throw ConfigError("room type outside 0..22");
  if (alpha.rows() != 1 && alpha.rows() != room_types.size())
    throw ConfigError("alpha must have one row or one row per room type");
  if (n_houses < 1) throw ConfigError("n_houses must be at least 1");
  if (rooms_per_house.min < 1 || rooms_per_house.min > rooms_per_house.max)
    throw ConfigError("rooms_per_house range is invalid");
  if (tokens_per_room.min > tokens_per_room.max)
    throw ConfigError("tokens_per_room range is invalid");
}

namespace {

std::size_t draw(Rng& rng, CountRange r) {
  return r.min + rng.below(r.max - r.min + 1);
}

std::string numbered(char prefix, std::size_t i, std::size_t count) {
  int width = 1;
  for (std::size_t c = count; c >= 10; c /= 10) ++width;
  std::string digits = std::to_string(i);
  if (digits.size() < static_cast<std::size_t>(width))
    digits.insert(0, width - digits.size(), '0');
  return prefix + digits;
}

}  // namespace

SynthResult generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t vocab = spec.vocab_size();
  Rng rng(spec.seed);

  std::vector<std::string> labels;
  for (std::size_t a = 0; a < vocab; ++a)
    labels.push_back(numbered('a', a, std::max<std::size_t>(vocab, 100)));

  GroundTruth truth{spec.phi, spec.alpha, {}, Matrix<double>(), {}};
  std::vector<House> houses;
  for (std::size_t h = 0; h < spec.n_houses; ++h) {
    House house;
    house.id = numbered('h', h + 1, spec.n_houses);
    house.name = house.id;
    const std::size_t n_rooms = draw(rng, spec.rooms_per_house);
    for (std::size_t j = 0; j < n_rooms; ++j) {
      const std::size_t slot = spec.rule == RoomTypeRule::cycle
                                   ? j % spec.room_types.size()
                                   : rng.below(spec.room_types.size());
      Room room;
      room.house_id = house.id;
      room.room_id = numbered('r', j + 1, n_rooms);
      room.room_type = spec.room_types[slot];
      const auto alpha = spec.alpha.row(spec.alpha.rows() == 1 ? 0 : slot);
      const auto theta = rng.dirichlet(alpha);
      const std::size_t n = draw(rng, spec.tokens_per_room);
      std::vector<int> z(n);
      room.tokens.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        z[i] = static_cast<int>(rng.categorical(theta, 1.0));
        room.tokens[i] =
            static_cast<TypeId>(rng.categorical(spec.phi.row(z[i]), 1.0));
      }
      truth.theta.append_row(theta);
      truth.z.push_back(std::move(z));
      truth.room_types.push_back(room.room_type);
      house.rooms.push_back(std::move(room));
    }
    houses.push_back(std::move(house));
  }
  return {Corpus(std::move(houses), Vocabulary(labels)), std::move(truth)};
}

Matrix<double> dominant_phi(std::size_t k, std::size_t vocab, double mass) {
  if (k < 1 || k > vocab) throw ConfigError("dominant_phi needs 1 <= K <= |A|");
  if (!(mass > 0.0 && mass <= 1.0)) throw ConfigError("mass must be in (0, 1]");
  Matrix<double> phi(k, vocab, vocab > 1 ? (1.0 - mass) / (vocab - 1) : 0.0);
  for (std::size_t g = 0; g < k; ++g) phi(g, g) = vocab > 1 ? mass : 1.0;
  return phi;
}

Matrix<double> block_phi(std::size_t k, std::size_t vocab, double mass) {
  if (k < 1 || k > vocab) throw ConfigError("block_phi needs 1 <= K <= |A|");
  if (!(mass > 0.0 && mass <= 1.0)) throw ConfigError("mass must be in (0, 1]");
  Matrix<double> phi(k, vocab, 0.0);
  for (std::size_t g = 0; g < k; ++g) {
    const std::size_t lo = g * vocab / k;
    const std::size_t hi = (g + 1) * vocab / k;
    const std::size_t inside = hi - lo;
    const std::size_t outside = vocab - inside;
    const double in_mass = outside == 0 ? 1.0 : mass;
    for (std::size_t a = 0; a < vocab; ++a) {
      const bool in = a >= lo && a < hi;
      phi(g, a) = in ? in_mass / inside : (1.0 - in_mass) / outside;
    }
  }
  return phi;
}

}  // namespace assemblage
