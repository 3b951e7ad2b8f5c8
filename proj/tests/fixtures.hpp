// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "assemblage/corpus.hpp"

namespace fixtures {

struct HouseRow {
  int id;
  int rooms;
  int objects;
  const char* name;
};

// Room and object counts per house of the reference database.
inline constexpr std::array<HouseRow, 30> kHouseInventory{{
    {1, 15, 189, "Casa del Sacello Iliaco"},
    {2, 7, 63, "House I 6,8-9"},
    {3, 12, 275, "Casa dei Quadretti Teatrali"},
    {4, 12, 125, "Casa dei Ceii"},
    {5, 16, 67, "Casa di Stallius Eros"},
    {6, 13, 99, "Casa del Sacerdos Amandus"},
    {7, 25, 353, "Casa dell'Efebo"},
    {8, 20, 112, "House I 7,19"},
    {9, 56, 886, "Casa del Menandro"},
    {10, 15, 522, "Casa del Fabbro"},
    {11, 16, 164, "House I 10,8"},
    {12, 16, 148, "Casa degli Amanti"},
    {13, 17, 178, "Casa della Venere in Bikini"},
    {14, 18, 122, "Casa di Trebius Valens"},
    {15, 52, 748, "Casa di Julius Polybius"},
    {16, 30, 242, "Casa delle Nozze d'Argento"},
    {17, 17, 145, "Casa di M. Lucretius Fronto"},
    {18, 16, 176, "Casa dei Vettii"},
    {19, 17, 158, "House VI 15,5"},
    {20, 13, 158, "Casa del Principe di Napoli"},
    {21, 20, 187, "Casa degli Amorini Dorati"},
    {22, 10, 141, "Casa della Ara Massima"},
    {23, 19, 144, "House VI 16,26"},
    {24, 23, 120, "House VIII 2,14-16"},
    {25, 10, 17, "House VIII 2,26"},
    {26, 11, 61, "House VIII 2,28"},
    {27, 20, 61, "House VIII 2,29-30"},
    {28, 20, 71, "House VIII 2,34"},
    {29, 31, 168, "Casa di Giuseppe II"},
    {30, 17, 63, "House VIII 5,9"},
}};

// Rooms per room type 1..22; index 0 unused.
inline constexpr std::array<int, 23> kRoomTypeFrequency{
    0, 18, 8, 35, 80, 16, 24, 18, 25, 36, 17, 31,
    43, 9, 42, 11, 43, 23, 14, 4, 7, 11, 53};

// CSV with the inventory's shape: per-house room and object counts, room
// types with the frequencies above, and the remaining rooms as type 0.
inline std::string inventory_csv(std::size_t vocab = 240,
                                 std::uint32_t seed = 7) {
  std::vector<int> types;
  for (int t = 1; t < 23; ++t)
    types.insert(types.end(), kRoomTypeFrequency[t], t);
  int total_rooms = 0;
  for (const auto& h : kHouseInventory) total_rooms += h.rooms;
  types.resize(total_rooms, 0);
  std::mt19937 gen(seed);
  std::shuffle(types.begin(), types.end(), gen);
  std::uniform_int_distribution<std::size_t> pick(0, vocab - 1);

  std::ostringstream out;
  out << "house_id,room_id,room_type,artifact_type,count,house_name\n";
  std::size_t next_type = 0;
  for (const auto& h : kHouseInventory) {
    std::vector<int> per_room(h.rooms, h.objects / h.rooms);
    for (int i = 0; i < h.objects % h.rooms; ++i) ++per_room[i];
    for (int r = 0; r < h.rooms; ++r) {
      const int t = types[next_type++];
      const std::string name = std::string("\"") + h.name + "\"";
      if (per_room[r] == 0)
        out << h.id << ",r" << r << "," << t << ",,," << name << "\n";
      for (int j = 0; j < per_room[r]; ++j)
        out << h.id << ",r" << r << "," << t << ",type" << pick(gen) << ",1,"
            << name << "\n";
    }
  }
  return out.str();
}

struct RoomSpec {
  std::string house;
  std::string room;
  int type;
  std::vector<std::string> labels;
};

// Builds a corpus from room specs; `vocab` labels are interned first so ids
// follow their order.
inline assemblage::Corpus build(const std::vector<RoomSpec>& specs,
                                const std::vector<std::string>& vocab = {}) {
  assemblage::Vocabulary v;
  for (const auto& l : vocab) v.intern(l);
  std::vector<assemblage::House> houses;
  for (const auto& s : specs) {
    if (houses.empty() || houses.back().id != s.house)
      houses.push_back({s.house, s.house, {}});
    assemblage::Room room{s.room, s.house, s.type, {}};
    for (const auto& l : s.labels) room.tokens.push_back(v.intern(l));
    houses.back().rooms.push_back(std::move(room));
  }
  return assemblage::Corpus(std::move(houses), std::move(v));
}

// Random corpus with some empty rooms and repeated types.
inline assemblage::Corpus random_corpus(std::uint64_t seed,
                                        std::size_t houses = 4,
                                        std::size_t max_rooms = 5,
                                        std::size_t max_tokens = 12,
                                        std::size_t vocab = 9) {
  std::mt19937_64 gen(seed);
  auto below = [&](std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen);
  };
  std::vector<RoomSpec> specs;
  for (std::size_t h = 0; h < houses; ++h) {
    const auto rooms = 1 + below(max_rooms);
    for (std::size_t r = 0; r < rooms; ++r) {
      RoomSpec s{"h" + std::to_string(h), "r" + std::to_string(r),
                 static_cast<int>(below(23)), {}};
      const auto n = below(max_tokens + 1);
      for (std::size_t i = 0; i < n; ++i)
        s.labels.push_back("t" + std::to_string(below(vocab)));
      specs.push_back(std::move(s));
    }
  }
  return build(specs);
}

}  // namespace fixtures
