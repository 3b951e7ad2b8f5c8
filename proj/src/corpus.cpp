// Apache License, Version 2.0, refer to LICENSE.txt

#include "assemblage/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <set>
#include <sstream>

#include "assemblage/error.hpp"
#include "assemblage/hash.hpp"
#include "csv.hpp"

namespace assemblage {

namespace {

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Vocabulary::Vocabulary(const std::vector<std::string>& labels) {
  for (const auto& l : labels) {
    if (index_.contains(l)) throw DataError("duplicate vocabulary label: " + l);
    intern(l);
  }
}

TypeId Vocabulary::intern(std::string_view label) {
  std::string key(label);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  auto id = static_cast<TypeId>(labels_.size());
  labels_.push_back(key);
  index_.emplace(std::move(key), id);
  return id;
}

std::optional<TypeId> Vocabulary::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t House::token_count() const {
  std::size_t n = 0;
  for (const auto& r : rooms) n += r.size();
  return n;
}

Corpus::Corpus(std::vector<House> houses, Vocabulary vocabulary)
    : houses_(std::move(houses)), vocabulary_(std::move(vocabulary)) {
  std::set<std::string> house_ids;
  const auto vocab = static_cast<TypeId>(vocabulary_.size());
  for (const auto& h : houses_) {
    if (!house_ids.insert(h.id).second)
      throw DataError("duplicate house id: " + h.id);
    std::set<std::string> room_ids;
    for (const auto& r : h.rooms) {
      if (r.house_id != h.id)
        throw DataError("room " + r.room_id + " claims house " + r.house_id +
                        " but is stored in house " + h.id);
      if (!room_ids.insert(r.room_id).second)
        throw DataError("duplicate room id " + r.room_id + " in house " + h.id);
      if (!valid_room_type(r.room_type))
        throw DataError("room " + h.id + "/" + r.room_id +
                        " has room type outside 0..22");
      for (TypeId t : r.tokens)
        if (t < 0 || t >= vocab)
          throw DataError("room " + h.id + "/" + r.room_id +
                          " contains an out-of-vocabulary token id");
    }
  }
}

std::size_t Corpus::room_count() const {
  std::size_t n = 0;
  for (const auto& h : houses_) n += h.rooms.size();
  return n;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& h : houses_) n += h.token_count();
  return n;
}

std::optional<std::size_t> Corpus::find_house(std::string_view id) const {
  for (std::size_t i = 0; i < houses_.size(); ++i)
    if (houses_[i].id == id) return i;
  return std::nullopt;
}

CorpusView::CorpusView(const Corpus& corpus)
    : corpus_(&corpus), houses_(corpus.houses().size()) {
  std::iota(houses_.begin(), houses_.end(), std::size_t{0});
}

CorpusView::CorpusView(const Corpus& corpus,
                       std::vector<std::size_t> house_indices)
    : corpus_(&corpus), houses_(std::move(house_indices)) {
  for (auto i : houses_)
    if (i >= corpus.houses().size())
      throw ConfigError("corpus view references a missing house");
}

bool CorpusView::contains_house(std::string_view id) const {
  return std::any_of(houses_.begin(), houses_.end(), [&](std::size_t i) {
    return corpus_->houses()[i].id == id;
  });
}

std::vector<const Room*> CorpusView::rooms() const {
  std::vector<const Room*> out;
  for (auto i : houses_)
    for (const auto& r : corpus_->houses()[i].rooms) out.push_back(&r);
  return out;
}

std::size_t CorpusView::token_count() const {
  std::size_t n = 0;
  for (auto i : houses_) n += corpus_->houses()[i].token_count();
  return n;
}

namespace {

// Blank lines and '#' comment lines.
bool skippable(std::string_view line) {
  return line.empty() || line.front() == '#';
}

}  // namespace

Corpus parse_records(std::string_view text) {
  auto lines = csv::split_lines(text);
  std::vector<std::string> fields;

  std::size_t li = 0;
  while (li < lines.size() && skippable(lines[li].text)) ++li;
  if (li == lines.size()) throw DataError("line 1: missing header");

  const auto header_line = lines[li].number;
  if (!csv::split_fields(lines[li].text, fields))
    fail_at(header_line, "unterminated quote in header");
  int col_house = -1, col_room = -1, col_type = -1, col_artifact = -1,
      col_count = -1, col_name = -1;
  for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
    const auto& f = fields[i];
    int* slot = f == "house_id"        ? &col_house
                : f == "room_id"       ? &col_room
                : f == "room_type"     ? &col_type
                : f == "artifact_type" ? &col_artifact
                : f == "count"         ? &col_count
                : f == "house_name"    ? &col_name
                                       : nullptr;
    if (slot == nullptr) continue;
    if (*slot != -1) fail_at(header_line, "duplicate column " + f);
    *slot = i;
  }
  if (col_house < 0 || col_room < 0 || col_type < 0 || col_artifact < 0)
    fail_at(header_line,
            "header must contain house_id, room_id, room_type, artifact_type");
  const std::size_t width = fields.size();

  Vocabulary vocab;
  std::vector<House> houses;
  std::unordered_map<std::string, std::size_t> house_index;
  // (house index, room id) -> room index within the house.
  std::vector<std::unordered_map<std::string, std::size_t>> room_index;

  for (++li; li < lines.size(); ++li) {
    const auto [number, line] = lines[li];
    if (skippable(line)) continue;
    if (!csv::split_fields(line, fields))
      fail_at(number, "unterminated quote");
    if (fields.size() != width)
      fail_at(number, "expected " + std::to_string(width) + " fields, found " +
                          std::to_string(fields.size()));

    const std::string& house_id = fields[col_house];
    const std::string& room_id = fields[col_room];
    const std::string& artifact = fields[col_artifact];
    if (house_id.empty()) fail_at(number, "empty house_id");
    if (room_id.empty()) fail_at(number, "empty room_id");

    int room_type = 0;
    if (!parse_int(fields[col_type], room_type))
      fail_at(number, "room_type is not an integer: '" + fields[col_type] + "'");
    if (!valid_room_type(room_type))
      fail_at(number, "room_type " + std::to_string(room_type) +
                          " outside 0..22");

    long long count = 1;
    const bool has_count = col_count >= 0 && !fields[col_count].empty();
    if (has_count && !parse_int(fields[col_count], count))
      fail_at(number, "count is not an integer: '" + fields[col_count] + "'");
    if (artifact.empty()) {
      if (has_count) fail_at(number, "count given without artifact_type");
    } else if (count < 1) {
      fail_at(number, "count must be at least 1");
    }

    auto [hit, inserted] = house_index.try_emplace(house_id, houses.size());
    if (inserted) {
      houses.push_back(House{house_id, house_id, {}});
      room_index.emplace_back();
    }
    House& house = houses[hit->second];
    if (col_name >= 0 && !fields[col_name].empty()) {
      if (inserted || house.name == house.id) {
        house.name = fields[col_name];
      } else if (house.name != fields[col_name]) {
        fail_at(number, "house " + house_id + " has conflicting house_name");
      }
    }

    auto& rooms = room_index[hit->second];
    auto [rit, new_room] = rooms.try_emplace(room_id, house.rooms.size());
    if (new_room) {
      house.rooms.push_back(Room{room_id, house_id, room_type, {}});
    }
    Room& room = house.rooms[rit->second];
    if (room.room_type != room_type)
      fail_at(number, "room " + house_id + "/" + room_id +
                          " has conflicting room_type " +
                          std::to_string(room_type) + " (first seen as " +
                          std::to_string(room.room_type) + ")");

    if (!artifact.empty()) {
      TypeId id = vocab.intern(artifact);
      room.tokens.insert(room.tokens.end(), static_cast<std::size_t>(count),
                         id);
    }
  }
  return Corpus(std::move(houses), std::move(vocab));
}

std::string serialize_records(const Corpus& corpus) {
  const bool with_names =
      std::any_of(corpus.houses().begin(), corpus.houses().end(),
                  [](const House& h) { return h.name != h.id; });
  std::ostringstream out;
  out << "house_id,room_id,room_type,artifact_type,count";
  if (with_names) out << ",house_name";
  out << '\n';

  auto prefix = [&](const House& h, const Room& r) {
    out << csv::escape(h.id) << ',' << csv::escape(r.room_id) << ','
        << r.room_type << ',';
  };
  auto suffix = [&](const House& h) {
    if (with_names) out << ',' << csv::escape(h.name);
    out << '\n';
  };

  // Registration rows fix house and room order and carry empty rooms.
  std::vector<std::pair<const House*, const Room*>> rooms;
  for (const auto& h : corpus.houses()) {
    for (const auto& r : h.rooms) {
      rooms.emplace_back(&h, &r);
      prefix(h, r);
      out << ',';
      suffix(h);
    }
  }

  // Token rows are interleaved across rooms so that labels first appear in
  // vocabulary id order while each room keeps its own token order. For a
  // parsed corpus such an interleaving always exists (the original file is
  // one); otherwise the smallest pending id is taken and ids may renumber.
  const auto vocab = corpus.vocab_size();
  std::vector<char> seen(vocab, 0);
  std::vector<std::size_t> head(rooms.size(), 0);
  std::size_t remaining = corpus.token_count();
  TypeId next_new = 0;

  auto emit_run = [&](std::size_t ri) {
    const auto& [h, r] = rooms[ri];
    const auto& toks = r->tokens;
    std::size_t start = head[ri];
    std::size_t end = start;
    while (end < toks.size() && toks[end] == toks[start]) ++end;
    prefix(*h, *r);
    out << csv::escape(corpus.vocabulary().label(toks[start])) << ','
        << (end - start);
    suffix(*h);
    seen[toks[start]] = 1;
    head[ri] = end;
    remaining -= end - start;
  };

  while (remaining > 0) {
    for (std::size_t ri = 0; ri < rooms.size(); ++ri) {
      const auto& toks = rooms[ri].second->tokens;
      while (head[ri] < toks.size() && seen[toks[head[ri]]]) emit_run(ri);
    }
    if (remaining == 0) break;
    while (next_new < static_cast<TypeId>(vocab) && seen[next_new]) ++next_new;
    std::size_t pick = rooms.size();
    TypeId best = 0;
    for (std::size_t ri = 0; ri < rooms.size(); ++ri) {
      const auto& toks = rooms[ri].second->tokens;
      if (head[ri] >= toks.size()) continue;
      TypeId t = toks[head[ri]];
      if (t == next_new) {
        pick = ri;
        break;
      }
      if (pick == rooms.size() || t < best) {
        pick = ri;
        best = t;
      }
    }
    emit_run(pick);
  }
  return out.str();
}

std::map<int, std::string> parse_room_type_labels(std::string_view text) {
  auto lines = csv::split_lines(text);
  std::vector<std::string> fields;
  std::map<int, std::string> labels;
  bool header = true;
  for (const auto& [number, line] : lines) {
    if (line.empty()) continue;
    if (!csv::split_fields(line, fields) || fields.size() != 2)
      fail_at(number, "expected room_type,label");
    if (header) {
      if (fields[0] != "room_type" || fields[1] != "label")
        fail_at(number, "header must be room_type,label");
      header = false;
      continue;
    }
    int t = 0;
    if (!parse_int(fields[0], t) || !valid_room_type(t))
      fail_at(number, "room_type must be an integer in 0..22");
    if (!labels.emplace(t, fields[1]).second)
      fail_at(number, "duplicate room_type " + std::to_string(t));
  }
  if (header) throw DataError("line 1: missing header");
  return labels;
}

std::vector<LooSplit> loo_splits(const Corpus& corpus) {
  const auto n = corpus.houses().size();
  if (n < 2)
    throw DataError("leave-one-out needs at least 2 houses, corpus has " +
                    std::to_string(n));
  std::vector<LooSplit> splits;
  splits.reserve(n);
  for (std::size_t fold = 0; fold < n; ++fold) {
    std::vector<std::size_t> train;
    for (std::size_t i = 0; i < n; ++i)
      if (i != fold) train.push_back(i);
    splits.push_back(LooSplit{fold, corpus.houses()[fold].id,
                              CorpusView(corpus, std::move(train)),
                              CorpusView(corpus, {fold})});
  }
  return splits;
}

CorpusSummary summarize(const CorpusView& corpus) {
  CorpusSummary s;
  s.vocab_size = corpus.vocab_size();
  for (std::size_t i = 0; i < corpus.house_count(); ++i) {
    const House& h = corpus.house(i);
    HouseSummary hs{h.id, h.name, h.rooms.size(), h.token_count()};
    for (const auto& r : h.rooms) {
      ++s.room_type_counts[r.room_type];
      if (r.tokens.empty()) ++s.empty_rooms;
    }
    s.rooms += hs.rooms;
    s.tokens += hs.tokens;
    s.houses.push_back(std::move(hs));
  }
  return s;
}

std::uint64_t content_hash(const CorpusView& corpus) {
  Fnv1a h;
  const auto& vocab = corpus.corpus().vocabulary();
  h.update_u64(vocab.size());
  for (const auto& l : vocab.labels()) {
    h.update(l);
    h.update(std::string_view("\0", 1));
  }
  for (std::size_t i = 0; i < corpus.house_count(); ++i) {
    const House& house = corpus.house(i);
    h.update(house.id);
    h.update(std::string_view("\0", 1));
    h.update_u64(house.rooms.size());
    for (const auto& r : house.rooms) {
      h.update(r.room_id);
      h.update(std::string_view("\0", 1));
      h.update_u64(static_cast<std::uint64_t>(r.room_type));
      h.update_u64(r.tokens.size());
      for (TypeId t : r.tokens) h.update_u64(static_cast<std::uint64_t>(t));
    }
  }
  return h.digest();
}

}  // namespace assemblage
