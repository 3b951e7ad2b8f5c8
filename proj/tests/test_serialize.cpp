// Apache License, Version 2.0, refer to LICENSE.txt

#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "assemblage/error.hpp"
#include "assemblage/hash.hpp"
#include "assemblage/serialize.hpp"
#include "fixtures.hpp"

using namespace assemblage;
using nlohmann::json;

namespace {

ChainConfig short_chain(std::size_t k) {
  ChainConfig c;
  c.k = k;
  c.seed = 5;
  c.iterations = 40;
  c.burn_in = 10;
  c.save_every = 10;
  c.optimize_every = 10;
  return c;
}

// Scores every room with a fixed estimator seed so that two models with the
// same parameters give identical numbers.
std::vector<double> scores(const TrainedModel& m, const Corpus& c) {
  const auto model = m.predictive();
  std::vector<double> out;
  for (const Room* r : CorpusView(c).rooms()) {
    if (r->size() == 0) continue;
    out.push_back(room_log_prob(*r, model, {8, 3, false}).log_prob);
  }
  return out;
}

TrainedModel round_trip(const TrainedModel& m) {
  return trained_model_from_json(json::parse(to_json(m).dump()));
}

}  // namespace

TEST_CASE("every family survives a round trip") {
  const auto c = fixtures::random_corpus(3, 4, 5, 10, 8);
  const auto chain = run_chain(c, short_chain(3));
  const auto priors = fit_room_type_priors(chain.snapshots, c, 3);
  const std::vector<TrainedModel> models{
      trained_simple(fit_simple(c)), trained_cond(fit_cond(c, 0.3)),
      trained_fg(chain.snapshots.back()),
      trained_cfg(chain.snapshots.back(), priors)};
  for (const auto& m : models) {
    const auto back = round_trip(m);
    CHECK(back.family == m.family);
    CHECK(to_json(back) == to_json(m));
    CHECK(scores(back, c) == scores(m, c));
  }
}

TEST_CASE("documents carry version and kind") {
  const auto c = fixtures::random_corpus(2);
  const auto doc = to_json(trained_simple(fit_simple(c)));
  CHECK(doc.at("format_version") == 1);
  CHECK(doc.at("kind") == "trained_model");
  auto wrong = doc;
  wrong["format_version"] = 2;
  CHECK_THROWS_AS(trained_model_from_json(wrong), DataError);
  wrong = doc;
  wrong["kind"] = "gibbs_chain";
  CHECK_THROWS_AS(trained_model_from_json(wrong), DataError);
  wrong = doc;
  wrong["family"] = "lda";
  CHECK_THROWS_AS(trained_model_from_json(wrong), DataError);
  wrong = doc;
  wrong["counts"].push_back(1);
  CHECK_THROWS_AS(trained_model_from_json(wrong), DataError);
  CHECK_THROWS_AS(trained_model_from_json(json::array()), DataError);
}

TEST_CASE("tampered topic counts are rejected") {
  const auto c = fixtures::random_corpus(4);
  const auto chain = run_chain(c, short_chain(2));
  auto doc = to_json(trained_fg(chain.snapshots.back()));
  doc["group_totals"][0] = doc["group_totals"][0].get<int>() + 1;
  CHECK_THROWS_AS(trained_model_from_json(doc), DataError);
  doc = to_json(trained_fg(chain.snapshots.back()));
  doc["hyperparams"]["alpha"] = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(trained_model_from_json(doc), DataError);
  doc = to_json(trained_cfg(chain.snapshots.back(),
                            fit_room_type_priors(chain.snapshots, c, 2)));
  doc.erase("room_type_priors");
  CHECK_THROWS_AS(trained_model_from_json(doc), DataError);
}

TEST_CASE("chain files rebuild identical snapshots") {
  const auto c = fixtures::random_corpus(6, 4, 5, 10, 8);
  const auto config = short_chain(3);
  const auto chain = run_chain(c, config);
  const auto doc = json::parse(chain_to_json(chain, config, content_hash(c)).dump());
  CHECK(doc.at("kind") == "gibbs_chain");
  CHECK(doc.at("rng").at("algorithm") == "mt19937_64");
  CHECK(doc.at("corpus_hash") == to_hex(content_hash(c)));
  const auto loaded = chain_from_json(doc, c);
  CHECK(loaded.corpus_hash == content_hash(c));
  CHECK(loaded.config.k == 3);
  CHECK(loaded.config.iterations == 40);
  REQUIRE(loaded.snapshots.size() == chain.snapshots.size());
  for (std::size_t i = 0; i < chain.snapshots.size(); ++i) {
    const auto& a = chain.snapshots[i];
    const auto& b = loaded.snapshots[i];
    CHECK(a.iteration == b.iteration);
    CHECK(a.hyper == b.hyper);
    CHECK(a.z == b.z);
    CHECK(a.room_group == b.room_group);
    CHECK(a.group_type == b.group_type);
    CHECK(a.group_totals == b.group_totals);
  }
}

TEST_CASE("chain files are checked against the corpus") {
  const auto c = fixtures::random_corpus(7, 4, 5, 10, 8);
  const auto config = short_chain(2);
  const auto chain = run_chain(c, config);
  const auto doc = chain_to_json(chain, config, content_hash(c));
  auto bad = doc;
  bad["snapshots"][0]["group_totals"][0] = -1;
  CHECK_THROWS_AS(chain_from_json(bad, c), DataError);
  bad = doc;
  bad["snapshots"][0]["z"][0].push_back(0);
  CHECK_THROWS_AS(chain_from_json(bad, c), DataError);
  bad = doc;
  bad["snapshots"] = json::array();
  CHECK_THROWS_AS(chain_from_json(bad, c), DataError);
  bad = doc;
  bad["corpus_hash"] = "zz";
  CHECK_THROWS_AS(chain_from_json(bad, c), DataError);
  const auto other = fixtures::random_corpus(8, 5, 5, 10, 8);
  CHECK_THROWS_AS(chain_from_json(doc, other), DataError);
}

TEST_CASE("priors and hyperparameters round trip") {
  const auto c = fixtures::random_corpus(9, 4, 5, 10, 8);
  const auto chain = run_chain(c, short_chain(2));
  const auto priors = fit_room_type_priors(chain.snapshots, c, 2);
  const auto back = room_type_priors_from_json(json::parse(to_json(priors).dump()));
  CHECK(back.alpha_by_type == priors.alpha_by_type);
  CHECK(back.fallback == priors.fallback);
  CHECK(back.global_alpha == priors.global_alpha);
  auto bad = to_json(priors);
  bad["global_alpha"] = {1.0};
  CHECK_THROWS_AS(room_type_priors_from_json(bad), DataError);

  const Hyperparams h({0.25, 1.5, 3.0}, 0.02);
  CHECK(hyperparams_from_json(json::parse(to_json(h).dump())) == h);
  CHECK_THROWS_AS(hyperparams_from_json(json{{"alpha", {1.0, -1.0}}, {"beta", 0.1}}),
                  DataError);
}

TEST_CASE("synthetic truth documents") {
  SynthSpec spec;
  spec.phi = dominant_phi(2, 4, 0.7);
  spec.alpha = Matrix<double>(1, 2, 1.0);
  spec.n_houses = 2;
  const auto out = generate(spec);
  const auto doc = to_json(out.truth, out.corpus.vocabulary());
  CHECK(doc.at("kind") == "synth_truth");
  CHECK(doc.at("labels").size() == 4);
  CHECK(doc.at("phi").size() == 2);
  CHECK(doc.at("theta").size() == out.truth.theta.rows());
  CHECK(doc.at("z").size() == out.truth.z.size());
}
