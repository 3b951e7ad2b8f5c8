// Apache License, Version 2.0, refer to LICENSE.txt

#include <cmath>
#include <set>
#include <sstream>
#include <tuple>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <doctest.h>

#include "assemblage/error.hpp"
#include "assemblage/evaluate.hpp"
#include "assemblage/hash.hpp"
#include "assemblage/synth.hpp"
#include "fixtures.hpp"

using namespace assemblage;

namespace {

EvalConfig quick_config() {
  EvalConfig c;
  c.k_grid = {2};
  c.seeds = 1;
  c.chain.iterations = 30;
  c.chain.burn_in = 10;
  c.chain.save_every = 10;
  c.chain.optimize_every = 10;
  c.particles = 5;
  return c;
}

Corpus small_synth(std::size_t houses, std::uint64_t seed = 1) {
  SynthSpec spec;
  spec.phi = block_phi(2, 8, 0.9);
  spec.alpha = Matrix<double>(1, 2, 0.5);
  spec.room_types = {1, 4};
  spec.n_houses = houses;
  spec.rooms_per_house = {3, 4};
  spec.tokens_per_room = {4, 9};
  spec.seed = seed;
  return generate(spec).corpus;
}

EvalRecord record(std::string house, std::string room, int type, Family f,
                  double perplexity, std::size_t k = 0, std::size_t seed = 0) {
  EvalRecord r;
  r.house_id = std::move(house);
  r.room_id = std::move(room);
  r.room_type = type;
  r.family = f;
  r.k = k;
  r.seed = seed;
  r.n_tokens = 4;
  r.perplexity = perplexity;
  r.log_prob = -perplexity * 4;
  return r;
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("smallest run scores every held-out room under each family") {
  const auto c = small_synth(2);
  const auto table = run_loo(c, quick_config());
  CHECK(table.records.size() == c.room_count() * 4);
  std::set<std::tuple<std::size_t, std::string, std::string, Family, std::size_t, std::size_t>> keys;
  for (const auto& r : table.records) {
    CHECK(keys.insert({r.fold, r.house_id, r.room_id, r.family, r.k, r.seed}).second);
    CHECK(r.perplexity > 0.0);
    CHECK(std::isfinite(r.perplexity));
    CHECK(r.house_id == c.houses()[r.fold].id);
    if (r.family == Family::simple || r.family == Family::cond_simple) {
      CHECK(r.k == 0);
      CHECK(r.method == EstimateMethod::closed_form);
    } else {
      CHECK(r.k == 2);
      CHECK(r.method == EstimateMethod::left_to_right);
      CHECK(r.particles == 5);
    }
  }
}

TEST_CASE("record count follows the protocol arithmetic") {
  const auto c = small_synth(3);
  auto config = quick_config();
  config.k_grid = {2, 3};
  config.seeds = 2;
  const auto table = run_loo(c, config);
  // Two baselines once per room, two mixed-membership families per (K, seed).
  CHECK(table.records.size() == c.room_count() * (2 + 2 * 2 * 2));
  config.families = {Family::simple, Family::fg};
  CHECK(run_loo(c, config).records.size() == c.room_count() * (1 + 2 * 2));
}

TEST_CASE("runs are deterministic and worker-count independent") {
  const auto c = small_synth(4, 3);
  auto config = quick_config();
  config.k_grid = {2, 3};
  config.seeds = 2;
  const auto a = eval_table_csv(run_loo(c, config));
  const auto b = eval_table_csv(run_loo(c, config));
  config.workers = 4;
  const auto d = eval_table_csv(run_loo(c, config));
  CHECK(a == b);
  CHECK(a == d);
  config.root_seed = 2;
  CHECK(eval_table_csv(run_loo(c, config)) != a);
}

TEST_CASE("training structures never contain the held-out house") {
  const auto c = small_synth(4, 5);
  const auto table = run_loo(c, quick_config());
  REQUIRE(table.fold_train_hashes.size() == 4);
  for (std::size_t f = 0; f < 4; ++f) {
    std::vector<std::size_t> rest;
    for (std::size_t h = 0; h < 4; ++h)
      if (h != f) rest.push_back(h);
    CHECK(table.fold_train_hashes[f] == content_hash(CorpusView(c, rest)));
    CHECK(table.fold_train_hashes[f] != content_hash(c));
  }
  CHECK(table.corpus_hash == content_hash(c));
}

TEST_CASE("empty held-out rooms are skipped and counted") {
  const auto c = fixtures::build({{"a", "1", 1, {"x", "y", "x"}},
                                  {"a", "2", 4, {}},
                                  {"b", "1", 1, {"y", "y"}},
                                  {"b", "2", 2, {}},
                                  {"b", "3", 2, {}}});
  const auto table = run_loo(c, quick_config());
  CHECK(table.skipped_empty_rooms == 3);
  CHECK(table.records.size() == 2 * 4);
}

TEST_CASE("run_loo needs two houses and a sound config") {
  const auto one = fixtures::build({{"a", "1", 1, {"x"}}});
  CHECK_THROWS_AS(run_loo(one, quick_config()), DataError);
  auto bad = quick_config();
  bad.chain.burn_in = bad.chain.iterations;
  CHECK_THROWS_AS(run_loo(small_synth(2), bad), ConfigError);
  bad = quick_config();
  bad.k_grid.clear();
  CHECK_THROWS_AS(run_loo(small_synth(2), bad), ConfigError);
}

TEST_CASE("aggregate arithmetic") {
  EvalTable one;
  one.records = {record("h", "r", 3, Family::simple, 2.5)};
  auto rows = aggregate(one, {});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean == 2.5);
  CHECK(rows[0].count == 1);
  CHECK(rows[0].sd == 0.0);

  EvalTable two;
  two.records = {record("h", "r1", 3, Family::simple, 2.0),
                 record("h", "r2", 3, Family::simple, 4.0)};
  rows = aggregate(two, {});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean == doctest::Approx(3.0));
  CHECK(rows[0].sd == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(aggregate(EvalTable{}, {}), DataError);
}

TEST_CASE("K averaging modes") {
  EvalTable t;
  t.records = {record("h", "r", 3, Family::fg, 2.0, 10, 0),
               record("h", "r", 3, Family::fg, 4.0, 15, 0)};
  AggregateOptions perp;
  CHECK(aggregate(t, perp)[0].mean == doctest::Approx(3.0));
  CHECK(aggregate(t, perp)[0].count == 1);
  AggregateOptions lp;
  lp.averaging = KAveraging::log_prob;
  CHECK(aggregate(t, lp)[0].mean == doctest::Approx(3.0));
  AggregateOptions only;
  only.k = 15;
  CHECK(aggregate(t, only)[0].mean == doctest::Approx(4.0));
  AggregateOptions by_k;
  by_k.by = GroupBy::k;
  const auto rows = aggregate(t, by_k);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].group == "10");
  CHECK(rows[1].group == "15");
}

TEST_CASE("aggregation scales with the records") {
  const auto c = small_synth(3, 9);
  auto table = run_loo(c, quick_config());
  for (auto by : {GroupBy::house, GroupBy::room_type, GroupBy::k}) {
    AggregateOptions o;
    o.by = by;
    const auto base = aggregate(table, o);
    auto scaled = table;
    for (auto& r : scaled.records) r.perplexity *= 3.5;
    const auto after = aggregate(scaled, o);
    REQUIRE(after.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(after[i].group == base[i].group);
      CHECK(after[i].mean == doctest::Approx(3.5 * base[i].mean).epsilon(1e-12));
    }
  }
}

TEST_CASE("paired t-test against a reference distribution") {
  const std::vector<double> a{2, 4, 6, 8, 10}, b{1, 2, 3, 4, 5};
  const auto t = paired_t_test(a, b);
  CHECK(t.t == doctest::Approx(4.242640687119285).epsilon(1e-12));
  CHECK(t.df == 4);
  boost::math::students_t dist(4);
  const double p = 2 * boost::math::cdf(boost::math::complement(dist, t.t));
  CHECK(std::abs(t.p - p) < 1e-12);
  CHECK(std::abs(t.p - 0.013235599563682695) < 1e-10);
  CHECK_FALSE(t.degenerate);
}

TEST_CASE("paired t-test symmetry and edge cases") {
  const std::vector<double> a{4.1, 3.9, 4.7, 5.0}, b{4.0, 4.2, 4.3, 4.4};
  const auto ab = paired_t_test(a, b), ba = paired_t_test(b, a);
  CHECK(ab.t == doctest::Approx(-ba.t));
  CHECK(ab.p == doctest::Approx(ba.p));
  const auto same = paired_t_test(a, a);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);
  const std::vector<double> base{1, 2, 3, 4}, shifted{3, 4, 5, 6};
  const auto constant = paired_t_test(shifted, base);
  CHECK(constant.degenerate);
  CHECK(constant.p == 0.0);
  CHECK(constant.t > 0.0);
  CHECK_THROWS_AS(paired_t_test(std::vector<double>{1.0}, std::vector<double>{2.0}),
                  ConfigError);
  CHECK_THROWS_AS(paired_t_test(a, std::vector<double>{1.0, 2.0}), ConfigError);
}

TEST_CASE("pairwise house tests cover each family pair once") {
  const auto c = small_synth(4, 2);
  const auto table = run_loo(c, quick_config());
  const auto tests = pairwise_house_tests(table, {});
  CHECK(tests.size() == 6);
  for (const auto& t : tests) {
    CHECK(t.n == 4);
    CHECK(t.test.df == 3);
    CHECK(t.test.p >= 0.0);
    CHECK(t.test.p <= 1.0);
  }
}

TEST_CASE("CSV exports carry provenance and one row per record") {
  const auto c = small_synth(2, 4);
  const auto table = run_loo(c, quick_config());
  const auto csv = eval_table_csv(table);
  CHECK(csv.rfind("# format_version=1 config_hash=", 0) == 0);
  CHECK(csv.find("corpus_hash=" + to_hex(table.corpus_hash)) != std::string::npos);
  CHECK(csv.find("\nfold,house_id,room_id,room_type,family,k,seed,n_tokens,"
                 "log_prob,perplexity,method,particles,estimator_seed,"
                 "phi_mode\n") != std::string::npos);
  CHECK(count_lines(csv) == table.records.size() + 2);
  const auto summary = summary_csv(aggregate(table, {}), table, "house_id");
  CHECK(summary.rfind("# format_version=1", 0) == 0);
  const auto tt = ttest_csv(pairwise_house_tests(table, {}), table);
  CHECK(count_lines(tt) == 2 + 6);
}

TEST_CASE("phi averaging mode is recorded") {
  const auto c = small_synth(2, 6);
  auto config = quick_config();
  config.phi_mode = PhiMode::average;
  config.chain.iterations = 40;
  const auto table = run_loo(c, config);
  for (const auto& r : table.records) CHECK(r.phi_mode == PhiMode::average);
  CHECK(eval_table_csv(table).find(",average\n") != std::string::npos);
}
