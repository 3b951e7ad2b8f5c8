// Apache License, Version 2.0, refer to LICENSE.txt

#include <cmath>
#include <vector>

#include <doctest.h>

#include "assemblage/baseline.hpp"
#include "assemblage/error.hpp"
#include "fixtures.hpp"

using namespace assemblage;

TEST_CASE("fit_simple counts tokens") {
  const auto c = fixtures::build({{"1", "r", 1, {"a", "a", "b"}}}, {"a", "b", "c"});
  const auto m = fit_simple(c, 1.0);
  CHECK(m.counts() == std::vector<std::int64_t>{2, 1, 0});
}

TEST_CASE("empty training set predicts uniformly") {
  const auto c = fixtures::build({{"1", "r", 1, {"a"}}, {"2", "r", 1, {}}},
                                 {"a", "b", "c", "d"});
  const CorpusView empty(c, {1});
  const auto m = fit_simple(empty, 0.1);
  for (TypeId a = 0; a < 4; ++a) CHECK(m.prob(a) == doctest::Approx(0.25));
}

TEST_CASE("simple log-prob by hand") {
  SimpleModel m({2, 1, 0}, 1.0);
  const std::vector<TypeId> room{0, 2};
  CHECK(m.log_prob(room) == doctest::Approx(-2.4849066497880004).epsilon(1e-12));
  CHECK(m.log_prob({}) == 0.0);
}

TEST_CASE("huge eta approaches uniform") {
  SimpleModel m({500, 3, 0, 0, 17}, 1e9);
  const std::vector<TypeId> room{0, 0, 1, 4};
  CHECK(std::abs(m.log_prob(room) / 4 - std::log(1.0 / 5)) < 1e-6);
}

TEST_CASE("distributions normalize") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto c = fixtures::random_corpus(seed);
    for (double eta : {1e-3, 0.1, 5.0}) {
      const auto s = fit_simple(c, eta);
      double total = 0.0;
      for (TypeId a = 0; a < static_cast<TypeId>(c.vocab_size()); ++a)
        total += s.prob(a);
      CHECK(std::abs(total - 1.0) < 1e-12);
      const auto k = fit_cond(c, eta);
      for (int t = 0; t < kRoomTypeCount; ++t) {
        double row = 0.0;
        for (TypeId a = 0; a < static_cast<TypeId>(c.vocab_size()); ++a)
          row += k.prob(t, a);
        CHECK(std::abs(row - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("non-positive eta is rejected") {
  const auto c = fixtures::build({{"1", "r", 1, {"a"}}});
  CHECK_THROWS_AS(fit_simple(c, 0.0), ConfigError);
  CHECK_THROWS_AS(fit_cond(c, -1.0), ConfigError);
}

TEST_CASE("conditional rows by hand") {
  const auto c = fixtures::build({{"1", "x", 3, {"a"}}, {"1", "y", 4, {"b", "b"}}});
  const auto m = fit_cond(c, 0.1);
  CHECK(m.counts_by_type()(3, 0) == 1);
  CHECK(m.counts_by_type()(3, 1) == 0);
  CHECK(m.counts_by_type()(4, 0) == 0);
  CHECK(m.counts_by_type()(4, 1) == 2);
}

TEST_CASE("conditional concentrates on the only type seen") {
  const auto c = fixtures::build(
      {{"1", "k", 14, {"hearth", "hearth"}}, {"1", "x", 4, {"lamp", "cup"}}});
  const auto m = fit_cond(c, 0.1);
  const TypeId hearth = *c.vocabulary().find("hearth");
  for (TypeId a = 0; a < 3; ++a)
    if (a != hearth) CHECK(m.prob(14, hearth) > m.prob(14, a));
}

TEST_CASE("conditional log-prob by hand with 240 types") {
  std::vector<std::string> vocab;
  for (int i = 0; i < 240; ++i) vocab.push_back("t" + std::to_string(i));
  const auto c = fixtures::build({{"1", "x", 7, {"t0"}}}, vocab);
  const auto m = fit_cond(c, 0.1);
  Room test{"y", "2", 7, {0}};
  CHECK(logprob_cond(m, test) ==
        doctest::Approx(-3.123565645063876).epsilon(1e-12));
  Room unseen{"z", "2", 8, {0, 5, 9}};
  CHECK(logprob_cond(m, unseen) ==
        doctest::Approx(3 * std::log(1.0 / 240)).epsilon(1e-12));
}

TEST_CASE("single room type reduces conditional to simple") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto c = fixtures::random_corpus(seed);
    std::vector<House> houses = c.houses();
    for (auto& h : houses)
      for (auto& r : h.rooms) r.room_type = 6;
    const Corpus same(houses, c.vocabulary());
    const auto s = fit_simple(same, 0.3);
    const auto k = fit_cond(same, 0.3);
    for (const auto* room : CorpusView(same).rooms())
      CHECK(std::abs(logprob_cond(k, *room) - logprob_simple(s, *room)) < 1e-12);
  }
}

TEST_CASE("pooling identity") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto c = fixtures::random_corpus(seed);
    const auto s = fit_simple(c);
    const auto k = fit_cond(c);
    for (std::size_t a = 0; a < c.vocab_size(); ++a) {
      std::int64_t sum = 0;
      for (int t = 0; t < kRoomTypeCount; ++t) sum += k.counts_by_type()(t, a);
      CHECK(sum == s.counts()[a]);
    }
  }
}

TEST_CASE("one more token of a raises P(a)") {
  std::vector<std::int64_t> counts{4, 0, 2};
  for (TypeId a = 0; a < 3; ++a) {
    auto more = counts;
    ++more[a];
    CHECK(SimpleModel(more, 0.1).prob(a) > SimpleModel(counts, 0.1).prob(a));
  }
}

TEST_CASE("training without one house") {
  const auto c = parse_records(fixtures::inventory_csv());
  const auto nine = *c.find_house("9");
  std::vector<std::size_t> rest;
  for (std::size_t h = 0; h < c.houses().size(); ++h)
    if (h != nine) rest.push_back(h);
  const auto m = fit_simple(CorpusView(c, rest));
  CHECK(m.total() == static_cast<std::int64_t>(c.token_count()) - 886);
}
