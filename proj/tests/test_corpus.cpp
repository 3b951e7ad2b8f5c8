// Apache License, Version 2.0, refer to LICENSE.txt

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include <doctest.h>

#include "assemblage/corpus.hpp"
#include "assemblage/error.hpp"
#include "fixtures.hpp"

using namespace assemblage;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_records(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("vocabulary ids are dense and invertible") {
  Vocabulary v;
  CHECK(v.intern("amphora") == 0);
  CHECK(v.intern("lamp") == 1);
  CHECK(v.intern("amphora") == 0);
  CHECK(v.size() == 2);
  for (TypeId id = 0; id < 2; ++id) CHECK(*v.find(v.label(id)) == id);
  CHECK_FALSE(v.find("loom weight").has_value());
  CHECK_THROWS_AS(Vocabulary({"a", "b", "a"}), DataError);
}

TEST_CASE("header-only file gives an empty corpus") {
  auto c = parse_records("house_id,room_id,room_type,artifact_type,count\n");
  CHECK(c.houses().empty());
  CHECK(c.vocab_size() == 0);
  const auto s = summarize(c);
  CHECK(s.rooms == 0);
  CHECK(s.tokens == 0);
  for (auto n : s.room_type_counts) CHECK(n == 0);
}

TEST_CASE("counts expand into tokens") {
  auto c = parse_records(
      "house_id,room_id,room_type,artifact_type,count\n"
      "1,a,4,lamp,2\n"
      "1,a,4,amphora,3\n");
  REQUIRE(c.houses().size() == 1);
  REQUIRE(c.houses()[0].rooms.size() == 1);
  const auto& room = c.houses()[0].rooms[0];
  CHECK(room.size() == 5);
  CHECK(std::count(room.tokens.begin(), room.tokens.end(), 0) == 2);
  CHECK(std::count(room.tokens.begin(), room.tokens.end(), 1) == 3);
  CHECK(c.vocabulary().label(0) == "lamp");
}

TEST_CASE("count column is optional") {
  auto c = parse_records(
      "artifact_type,room_type,room_id,house_id\n"
      "lamp,3,a,9\nlamp,3,a,9\n");
  CHECK(c.houses()[0].rooms[0].size() == 2);
  CHECK(c.houses()[0].id == "9");
}

TEST_CASE("CRLF, BOM, quotes, comments") {
  auto c = parse_records(
      "\xEF\xBB\xBFhouse_id,room_id,room_type,artifact_type,count\r\n"
      "# provenance line\r\n"
      "1,a,4,\"bronze, casseruola\",1\r\n");
  CHECK(c.vocabulary().label(0) == "bronze, casseruola");
}

TEST_CASE("malformed rows report their line") {
  const std::string head = "house_id,room_id,room_type,artifact_type,count\n";
  CHECK(error_of(head + "1,a,4,lamp,1\n1,a,4\n").find("line 3") == 0);
  CHECK(error_of(head + "1,a,23,lamp,1\n").find("line 2") == 0);
  CHECK(error_of(head + "1,a,-1,lamp,1\n").find("outside 0..22") !=
        std::string::npos);
  CHECK(error_of(head + "1,a,x,lamp,1\n").find("line 2") == 0);
  CHECK(error_of(head + "1,a,4,lamp,0\n").find("line 2") == 0);
  CHECK(error_of(head + "1,a,4,lamp,1\n1,a,5,cup,1\n").find("line 3") == 0);
  CHECK(error_of(head + "1,a,4,\"lamp,1\n").find("line 2") == 0);
  CHECK_FALSE(error_of("house_id,room_id,artifact_type\n1,a,lamp\n").empty());
  CHECK_FALSE(error_of("").empty());
}

TEST_CASE("empty artifact_type registers an empty room") {
  auto c = parse_records(
      "house_id,room_id,room_type,artifact_type,count\n"
      "1,a,17,,\n1,b,4,lamp,1\n");
  REQUIRE(c.houses()[0].rooms.size() == 2);
  CHECK(c.houses()[0].rooms[0].size() == 0);
  CHECK(summarize(c).empty_rooms == 1);
}

TEST_CASE("corpus validates its invariants") {
  Vocabulary v({"a"});
  CHECK_THROWS_AS(Corpus({{"1", "", {{"r", "2", 1, {0}}}}}, v), DataError);
  CHECK_THROWS_AS(Corpus({{"1", "", {{"r", "1", 1, {3}}}}}, v), DataError);
  CHECK_THROWS_AS(Corpus({{"1", "", {{"r", "1", 30, {0}}}}}, v), DataError);
  CHECK_THROWS_AS(Corpus({{"1", "", {}}, {"1", "", {}}}, v), DataError);
}

TEST_CASE("round trip of random corpora") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto c = fixtures::random_corpus(seed);
    const auto text = serialize_records(c);
    const auto back = parse_records(text);
    const auto again = serialize_records(back);
    CHECK(again == text);
    // Parsed corpora round-trip exactly, including vocabulary order.
    CHECK(parse_records(again) == back);
    CHECK(content_hash(back) == content_hash(parse_records(again)));
  }
}

TEST_CASE("parsed corpus survives serialize and re-parse unchanged") {
  const auto c = parse_records(
      "house_id,room_id,room_type,artifact_type,count,house_name\n"
      "2,x,9,cup,1,Two\n"
      "1,a,4,lamp,2,One\n"
      "1,b,0,,,One\n"
      "1,a,4,cup,1,One\n"
      "2,y,9,\"odd \"\"label\"\"\",4,Two\n");
  CHECK(parse_records(serialize_records(c)) == c);
}

TEST_CASE("summaries agree with room sums") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto c = fixtures::random_corpus(seed);
    const auto s = summarize(c);
    std::size_t rooms = 0, tokens = 0;
    for (std::size_t h = 0; h < c.houses().size(); ++h) {
      std::size_t sum = 0;
      for (const auto& r : c.houses()[h].rooms) sum += r.size();
      CHECK(s.houses[h].tokens == sum);
      CHECK(c.houses()[h].token_count() == sum);
      rooms += c.houses()[h].rooms.size();
      tokens += sum;
    }
    CHECK(s.rooms == rooms);
    CHECK(s.tokens == tokens);
    std::size_t typed = 0;
    for (auto n : s.room_type_counts) typed += n;
    CHECK(typed == rooms);
  }
}

TEST_CASE("inventory-shaped corpus reports per-house counts") {
  const auto c = parse_records(fixtures::inventory_csv());
  const auto s = summarize(c);
  REQUIRE(s.houses.size() == 30);
  for (std::size_t i = 0; i < 30; ++i) {
    const auto& row = fixtures::kHouseInventory[i];
    CHECK(s.houses[i].id == std::to_string(row.id));
    CHECK(s.houses[i].rooms == static_cast<std::size_t>(row.rooms));
    CHECK(s.houses[i].tokens == static_cast<std::size_t>(row.objects));
    CHECK(s.houses[i].name == row.name);
  }
  const auto nine = *c.find_house("9");
  CHECK(s.houses[nine].rooms == 56);
  CHECK(s.houses[nine].tokens == 886);
  const auto fewest = std::min_element(
      s.houses.begin(), s.houses.end(),
      [](const auto& a, const auto& b) { return a.tokens < b.tokens; });
  CHECK(fewest->id == "25");
  CHECK(fewest->tokens == 17);
  CHECK(s.room_type_counts[3] == 35);
  CHECK(s.room_type_counts[4] == 80);
  CHECK(s.rooms == 584);
  CHECK(s.tokens == 5963);
}

TEST_CASE("loo splits partition the houses") {
  const auto c = fixtures::random_corpus(3, 6);
  const auto splits = loo_splits(c);
  REQUIRE(splits.size() == 6);
  for (std::size_t f = 0; f < splits.size(); ++f) {
    const auto& s = splits[f];
    CHECK(s.fold_index == f);
    CHECK(s.held_out_house == c.houses()[f].id);
    CHECK(s.test.house_count() == 1);
    CHECK(s.train.house_count() == 5);
    CHECK_FALSE(s.train.contains_house(s.held_out_house));
    CHECK(s.test.contains_house(s.held_out_house));
    CHECK(s.train.token_count() + s.test.token_count() == c.token_count());
    CHECK(s.train.vocab_size() == c.vocab_size());
    CHECK(&s.train.corpus() == &c);
  }
}

TEST_CASE("two houses give two mirror splits, one house is an error") {
  const auto c = fixtures::build({{"a", "1", 1, {"x"}}, {"b", "1", 1, {"y"}}});
  const auto splits = loo_splits(c);
  REQUIRE(splits.size() == 2);
  CHECK(splits[0].train.house(0).id == "b");
  CHECK(splits[1].train.house(0).id == "a");
  const auto one = fixtures::build({{"a", "1", 1, {"x"}}});
  CHECK_THROWS_AS(loo_splits(one), DataError);
}

TEST_CASE("content hash separates views") {
  const auto c = fixtures::random_corpus(9, 5);
  const CorpusView all(c);
  CHECK(content_hash(all) == content_hash(c));
  std::set<std::uint64_t> hashes;
  for (const auto& s : loo_splits(c)) hashes.insert(content_hash(s.train));
  CHECK(hashes.size() == 5);
}

TEST_CASE("room type label sidecar") {
  auto labels = parse_room_type_labels(
      "room_type,label\n3,atrium\n4,\"small closed room, side\"\n");
  CHECK(labels.at(3) == "atrium");
  CHECK(labels.at(4) == "small closed room, side");
  CHECK_THROWS_AS(parse_room_type_labels("room_type,label\n40,x\n"), DataError);
}
