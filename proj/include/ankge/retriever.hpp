#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ankge/model.hpp"
#include "ankge/triple_store.hpp"

namespace ankge {

struct RetrieverConfig {
  int entity_top_k = 1;     // N_e
  int relation_top_k = 1;   // N_r
  int pair_top_k = 5;       // N_t
  int entity_preselect = 50;    // m; clamped to |E|
  int relation_preselect = 50;  // n; clamped to |R|
  bool exclude_original = true;

  friend bool operator==(const RetrieverConfig&, const RetrieverConfig&) = default;
};

/// Throws std::invalid_argument if a size is non-positive or N_t > m * n
/// (after clamping m and n to the vocabulary).
void validate(const RetrieverConfig& config, std::int32_t num_entities, std::int32_t num_relations);

struct EntityCandidate {
  EntityId entity = 0;
  double score = 0.0;
  friend bool operator==(const EntityCandidate&, const EntityCandidate&) = default;
};

struct RelationCandidate {
  RelationId relation = 0;
  double score = 0.0;
  friend bool operator==(const RelationCandidate&, const RelationCandidate&) = default;
};

struct PairCandidate {
  EntityId entity = 0;
  RelationId relation = 0;
  double score = 0.0;
  friend bool operator==(const PairCandidate&, const PairCandidate&) = default;
};

// All lists are ordered by score descending, ties by ascending id (pairs:
// entity id, then relation id). Requesting more candidates than exist throws
// std::invalid_argument.

/// Top N_e of f(h', r, t) over all entities h'.
std::vector<EntityCandidate> retrieve_entity_level(const EmbeddingModel& model, const Triple& triple,
                                                   const RetrieverConfig& config);

/// Top N_r of f(h, r', t) over all relations r'.
std::vector<RelationCandidate> retrieve_relation_level(const EmbeddingModel& model, const Triple& triple,
                                                       const RetrieverConfig& config);

/// Pre-selects the top m heads by f(h', r, t) and top n relations by
/// f(h, r', t), then returns the top N_t of f(h', r', t) over their product.
/// Only the exact original pair (h, r) is excluded.
std::vector<PairCandidate> retrieve_triple_level(const EmbeddingModel& model, const Triple& triple,
                                                 const RetrieverConfig& config);

/// Retrieved analogical objects for every training triple, in train order.
class AnalogyCache {
 public:
  struct Entry {
    std::span<const EntityCandidate> entities;
    std::span<const RelationCandidate> relations;
    std::span<const PairCandidate> pairs;
  };

  AnalogyCache() = default;
  AnalogyCache(RetrieverConfig config, std::size_t triple_count);

  const RetrieverConfig& config() const { return config_; }
  std::size_t size() const { return triple_count_; }
  Entry entry(std::size_t index) const;

  void set(std::size_t index, std::span<const EntityCandidate> entities, std::span<const RelationCandidate> relations,
           std::span<const PairCandidate> pairs);

  /// Provenance echoed into the cache manifest.
  std::string checkpoint_digest = "none";
  std::string store_digest = "none";

  friend bool operator==(const AnalogyCache&, const AnalogyCache&) = default;

 private:
  RetrieverConfig config_;
  std::size_t triple_count_ = 0;
  std::vector<EntityCandidate> entities_;
  std::vector<RelationCandidate> relations_;
  std::vector<PairCandidate> pairs_;
};

/// Retrieves all three levels for each triple in store.train. Parallel
/// across triples; output order follows the train split.
AnalogyCache build_cache(const EmbeddingModel& model, const TripleStore& store, const RetrieverConfig& config);

inline constexpr std::string_view kCacheMagic = "ANKGE-ANALOGY-CACHE";

/// Manifest (config echo, checkpoint and store digests, triple count) then per
/// triple: N_e x (i32 entity, f64 score), N_r x (i32 relation, f64 score),
/// N_t x (i32 entity, i32 relation, f64 score).
void save_cache(const AnalogyCache& cache, const std::filesystem::path& path);
AnalogyCache load_cache(const std::filesystem::path& path);

}  // namespace ankge
