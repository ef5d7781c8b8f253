#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ankge {

using EntityId = std::int32_t;
using RelationId = std::int32_t;

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct RawTriple {
  std::string head;
  std::string relation;
  std::string tail;

  friend bool operator==(const RawTriple&, const RawTriple&) = default;
};

/// Suffix appended to a relation name to form its reverse relation.
inline constexpr std::string_view kReverseSuffix = "_Reverse";

/// Reads a tab-separated triple file. Blank lines are skipped; any other
/// line must have exactly three fields. Throws DataError naming the line.
std::vector<RawTriple> load_triples(const std::filesystem::path& path);
std::vector<RawTriple> parse_triples(std::string_view text, std::string_view source = "<memory>");

/// Dense string <-> id mapping, ids assigned in insertion order.
class Vocabulary {
 public:
  std::int32_t intern(std::string_view name);
  std::optional<std::int32_t> find(std::string_view name) const;
  const std::string& name(std::int32_t id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::int32_t size() const { return static_cast<std::int32_t>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

struct TripleStore {
  Vocabulary entities;
  Vocabulary relations;
  std::vector<Triple> train;
  std::vector<Triple> valid;
  std::vector<Triple> test;
  bool augmented = false;
  // Relation count before reverse augmentation.
  std::int32_t raw_relation_count = 0;

  std::int32_t num_entities() const { return entities.size(); }
  std::int32_t num_relations() const { return relations.size(); }

  /// Hash over vocabularies and all splits.
  std::uint64_t digest() const;

  friend bool operator==(const TripleStore&, const TripleStore&) = default;
};

/// Ids are assigned by first occurrence over train, then valid, then test.
/// Duplicate triples within a split are dropped (first kept) with a warning
/// on stderr.
TripleStore build_store(std::span<const RawTriple> train, std::span<const RawTriple> valid,
                        std::span<const RawTriple> test);

/// Appends r + kReverseSuffix for every raw relation r (id r + raw count) and
/// adds (t, r^-1, h) to each split after its original triples.
TripleStore augment_reverse(TripleStore store);

/// Loads train.txt / valid.txt / test.txt from a directory, builds the store
/// and augments it.
TripleStore load_dataset(const std::filesystem::path& dir);

/// Vocabulary dump: "<id>\t<name>" per line.
void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);

/// Writes the full store (vocabularies, id triples, flags) to a directory;
/// load_store reproduces it exactly.
void save_store(const TripleStore& store, const std::filesystem::path& dir);
TripleStore load_store(const std::filesystem::path& dir);

/// (head, relation) -> tails over train, valid and test.
class FilterIndex {
 public:
  explicit FilterIndex(const TripleStore& store);

  /// Sorted tails; empty when the key is absent.
  std::span<const EntityId> tails(EntityId head, RelationId relation) const;
  bool contains(EntityId head, RelationId relation, EntityId tail) const;

 private:
  std::unordered_map<std::uint64_t, std::vector<EntityId>> tails_;
};

/// Co-occurrence counts over train only.
class CountIndex {
 public:
  explicit CountIndex(const TripleStore& store);

  std::int64_t rt_count(RelationId relation, EntityId tail) const;
  std::int64_t ht_count(EntityId head, EntityId tail) const;
  std::int64_t t_count(EntityId tail) const;

  std::int64_t rt_total() const;
  std::int64_t ht_total() const;
  std::int64_t t_total() const;

 private:
  std::unordered_map<std::uint64_t, std::int64_t> rt_;
  std::unordered_map<std::uint64_t, std::int64_t> ht_;
  std::vector<std::int64_t> t_;
};

inline std::uint64_t pair_key(std::int32_t a, std::int32_t b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace ankge
