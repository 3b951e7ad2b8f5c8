// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace assemblage {

using TypeId = std::int32_t;

// Room types are the integers 0..22: the 22 published architectural types
// plus type 0 for lower floors.
inline constexpr int kRoomTypeCount = 23;

inline bool valid_room_type(int t) { return t >= 0 && t < kRoomTypeCount; }

// Artifact-type labels with dense integer ids assigned in insertion order.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(const std::vector<std::string>& labels);

  // Returns the id of `label`, adding it if unseen.
  TypeId intern(std::string_view label);
  std::optional<TypeId> find(std::string_view label) const;
  const std::string& label(TypeId id) const { return labels_.at(id); }
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  bool operator==(const Vocabulary& other) const {
    return labels_ == other.labels_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, TypeId> index_;
};

struct Room {
  std::string room_id;
  std::string house_id;
  int room_type = 0;
  std::vector<TypeId> tokens;

  std::size_t size() const { return tokens.size(); }
  bool operator==(const Room&) const = default;
};

struct House {
  std::string id;
  std::string name;
  std::vector<Room> rooms;

  std::size_t token_count() const;
  bool operator==(const House&) const = default;
};

// Houses, their typed rooms, and the shared vocabulary. Immutable once built.
class Corpus {
 public:
  Corpus() = default;
  // Validates the invariants (house ids, room types, token ranges) and throws
  // DataError when one fails.
  Corpus(std::vector<House> houses, Vocabulary vocabulary);

  const std::vector<House>& houses() const { return houses_; }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  std::size_t vocab_size() const { return vocabulary_.size(); }
  std::size_t room_count() const;
  std::size_t token_count() const;
  std::optional<std::size_t> find_house(std::string_view id) const;

  bool operator==(const Corpus&) const = default;

 private:
  std::vector<House> houses_;
  Vocabulary vocabulary_;
};

// A subset of a corpus's houses. Never re-indexes the vocabulary. The
// referenced corpus must outlive the view.
class CorpusView {
 public:
  // View over every house.
  CorpusView(const Corpus& corpus);  // NOLINT(google-explicit-constructor)
  CorpusView(const Corpus& corpus, std::vector<std::size_t> house_indices);

  const Corpus& corpus() const { return *corpus_; }
  std::size_t house_count() const { return houses_.size(); }
  const House& house(std::size_t i) const {
    return corpus_->houses()[houses_[i]];
  }
  const std::vector<std::size_t>& house_indices() const { return houses_; }
  bool contains_house(std::string_view id) const;
  std::size_t vocab_size() const { return corpus_->vocab_size(); }

  // Rooms in house order, then room order.
  std::vector<const Room*> rooms() const;
  std::size_t token_count() const;

 private:
  const Corpus* corpus_;
  std::vector<std::size_t> houses_;
};

struct LooSplit {
  std::size_t fold_index;
  std::string held_out_house;
  CorpusView train;
  CorpusView test;
};

// Parses the `house_id,room_id,room_type,artifact_type[,count][,house_name]`
// CSV. A row with count c contributes c tokens; a row with an empty
// artifact_type (and no count) only registers the room. Blank lines and lines
// starting with # are skipped. Throws DataError carrying the 1-based line
// number of the offending row.
Corpus parse_records(std::string_view text);

// Inverse of parse_records: re-parsing the output of a parsed corpus yields an
// equal corpus.
std::string serialize_records(const Corpus& corpus);

// Optional `room_type,label` sidecar used for display only.
std::map<int, std::string> parse_room_type_labels(std::string_view text);

// One split per house, in house order. Throws DataError for fewer than two
// houses.
std::vector<LooSplit> loo_splits(const Corpus& corpus);

struct HouseSummary {
  std::string id;
  std::string name;
  std::size_t rooms = 0;
  std::size_t tokens = 0;
};

struct CorpusSummary {
  std::vector<HouseSummary> houses;
  std::array<std::size_t, kRoomTypeCount> room_type_counts{};
  std::size_t rooms = 0;
  std::size_t tokens = 0;
  std::size_t empty_rooms = 0;
  std::size_t vocab_size = 0;
};

CorpusSummary summarize(const CorpusView& corpus);

// Order-sensitive content hash of the viewed houses, rooms, tokens (by label)
// and vocabulary.
std::uint64_t content_hash(const CorpusView& corpus);

}  // namespace assemblage
