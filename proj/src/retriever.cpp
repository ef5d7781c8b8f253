#include "ankge/retriever.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <stdexcept>

#include "ankge/errors.hpp"
#include "ankge/manifest.hpp"
#include "ankge/parallel.hpp"

namespace ankge {

namespace {

struct Scored {
  double score;
  EntityId first;
  RelationId second;
};

// True when a ranks before b.
bool ranks_before(const Scored& a, const Scored& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.first != b.first) return a.first < b.first;
  return a.second < b.second;
}

/// Bounded selection of the k best items under ranks_before.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  void push(const Scored& s) {
    if (heap_.size() < k_) {
      heap_.push(s);
    } else if (ranks_before(s, heap_.top())) {
      heap_.pop();
      heap_.push(s);
    }
  }

  std::vector<Scored> take() {
    std::vector<Scored> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  struct Worst {
    bool operator()(const Scored& a, const Scored& b) const { return ranks_before(a, b); }
  };
  std::size_t k_;
  // Top of the heap is the worst kept item.
  std::priority_queue<Scored, std::vector<Scored>, Worst> heap_;
};

void require(int wanted, std::int64_t available, const char* what) {
  if (wanted < 1) throw std::invalid_argument(std::string(what) + " must be positive");
  if (wanted > available) {
    throw std::invalid_argument(std::string(what) + " = " + std::to_string(wanted) + " exceeds the " +
                                std::to_string(available) + " available candidates");
  }
}

std::vector<Scored> top_heads(const EmbeddingModel& model, const Triple& triple, std::size_t k, bool exclude) {
  TailScorer scorer = model.tail_scorer();
  const auto relation = model.relation(triple.relation);
  const auto tail = model.entity(triple.tail);
  TopK top(k);
  for (EntityId e = 0; e < model.num_entities(); ++e) {
    if (exclude && e == triple.head) continue;
    scorer.reset(model.entity(e), relation);
    top.push({scorer(tail), e, 0});
  }
  return top.take();
}

std::vector<Scored> top_relations(const EmbeddingModel& model, const Triple& triple, std::size_t k, bool exclude) {
  TailScorer scorer = model.tail_scorer();
  const auto head = model.entity(triple.head);
  const auto tail = model.entity(triple.tail);
  TopK top(k);
  for (RelationId r = 0; r < model.num_relations(); ++r) {
    if (exclude && r == triple.relation) continue;
    scorer.reset(head, model.relation(r));
    // Relation ids sort on the primary tie key.
    top.push({scorer(tail), r, 0});
  }
  return top.take();
}

int clamp_preselect(int wanted, std::int32_t available) { return std::min<int>(wanted, available); }

}  // namespace

void validate(const RetrieverConfig& c, std::int32_t num_entities, std::int32_t num_relations) {
  if (c.entity_top_k < 1 || c.relation_top_k < 1 || c.pair_top_k < 1 || c.entity_preselect < 1 ||
      c.relation_preselect < 1) {
    throw std::invalid_argument("retriever sizes must be positive");
  }
  const std::int64_t m = clamp_preselect(c.entity_preselect, num_entities);
  const std::int64_t n = clamp_preselect(c.relation_preselect, num_relations);
  if (c.pair_top_k > m * n) throw std::invalid_argument("N_t exceeds m * n");
  const int excluded = c.exclude_original ? 1 : 0;
  require(c.entity_top_k, num_entities - excluded, "N_e");
  require(c.relation_top_k, num_relations - excluded, "N_r");
}

std::vector<EntityCandidate> retrieve_entity_level(const EmbeddingModel& model, const Triple& triple,
                                                   const RetrieverConfig& config) {
  require(config.entity_top_k, model.num_entities() - (config.exclude_original ? 1 : 0), "N_e");
  std::vector<EntityCandidate> out;
  for (const Scored& s : top_heads(model, triple, static_cast<std::size_t>(config.entity_top_k),
                                   config.exclude_original)) {
    out.push_back({s.first, s.score});
  }
  return out;
}

std::vector<RelationCandidate> retrieve_relation_level(const EmbeddingModel& model, const Triple& triple,
                                                       const RetrieverConfig& config) {
  require(config.relation_top_k, model.num_relations() - (config.exclude_original ? 1 : 0), "N_r");
  std::vector<RelationCandidate> out;
  for (const Scored& s : top_relations(model, triple, static_cast<std::size_t>(config.relation_top_k),
                                       config.exclude_original)) {
    out.push_back({s.first, s.score});
  }
  return out;
}

std::vector<PairCandidate> retrieve_triple_level(const EmbeddingModel& model, const Triple& triple,
                                                 const RetrieverConfig& config) {
  const int m = clamp_preselect(config.entity_preselect, model.num_entities());
  const int n = clamp_preselect(config.relation_preselect, model.num_relations());
  if (m < 1 || n < 1) throw std::invalid_argument("pre-selection sizes must be positive");
  const auto heads = top_heads(model, triple, static_cast<std::size_t>(m), false);
  const auto relations = top_relations(model, triple, static_cast<std::size_t>(n), false);

  bool original_present = false;
  if (config.exclude_original) {
    const bool head_in = std::any_of(heads.begin(), heads.end(), [&](const Scored& s) { return s.first == triple.head; });
    const bool rel_in =
        std::any_of(relations.begin(), relations.end(), [&](const Scored& s) { return s.first == triple.relation; });
    original_present = head_in && rel_in;
  }
  require(config.pair_top_k, static_cast<std::int64_t>(m) * n - (original_present ? 1 : 0), "N_t");

  TailScorer scorer = model.tail_scorer();
  const auto tail = model.entity(triple.tail);
  TopK top(static_cast<std::size_t>(config.pair_top_k));
  for (const Scored& h : heads) {
    const auto head = model.entity(h.first);
    for (const Scored& r : relations) {
      if (config.exclude_original && h.first == triple.head && r.first == triple.relation) continue;
      scorer.reset(head, model.relation(r.first));
      top.push({scorer(tail), h.first, r.first});
    }
  }
  std::vector<PairCandidate> out;
  for (const Scored& s : top.take()) out.push_back({s.first, s.second, s.score});
  return out;
}

AnalogyCache::AnalogyCache(RetrieverConfig config, std::size_t triple_count)
    : config_(config), triple_count_(triple_count),
      entities_(triple_count * static_cast<std::size_t>(config.entity_top_k)),
      relations_(triple_count * static_cast<std::size_t>(config.relation_top_k)),
      pairs_(triple_count * static_cast<std::size_t>(config.pair_top_k)) {}

AnalogyCache::Entry AnalogyCache::entry(std::size_t index) const {
  if (index >= triple_count_) throw std::out_of_range("analogy cache index out of range");
  const auto ne = static_cast<std::size_t>(config_.entity_top_k);
  const auto nr = static_cast<std::size_t>(config_.relation_top_k);
  const auto nt = static_cast<std::size_t>(config_.pair_top_k);
  return {std::span<const EntityCandidate>(entities_).subspan(index * ne, ne),
          std::span<const RelationCandidate>(relations_).subspan(index * nr, nr),
          std::span<const PairCandidate>(pairs_).subspan(index * nt, nt)};
}

void AnalogyCache::set(std::size_t index, std::span<const EntityCandidate> entities,
                       std::span<const RelationCandidate> relations, std::span<const PairCandidate> pairs) {
  const auto ne = static_cast<std::size_t>(config_.entity_top_k);
  const auto nr = static_cast<std::size_t>(config_.relation_top_k);
  const auto nt = static_cast<std::size_t>(config_.pair_top_k);
  if (index >= triple_count_ || entities.size() != ne || relations.size() != nr || pairs.size() != nt) {
    throw std::invalid_argument("analogy cache entry has the wrong shape");
  }
  std::copy(entities.begin(), entities.end(), entities_.begin() + static_cast<std::ptrdiff_t>(index * ne));
  std::copy(relations.begin(), relations.end(), relations_.begin() + static_cast<std::ptrdiff_t>(index * nr));
  std::copy(pairs.begin(), pairs.end(), pairs_.begin() + static_cast<std::ptrdiff_t>(index * nt));
}

AnalogyCache build_cache(const EmbeddingModel& model, const TripleStore& store, const RetrieverConfig& config) {
  if (model.num_entities() != store.num_entities() || model.num_relations() != store.num_relations()) {
    throw std::invalid_argument("model and store vocabularies disagree");
  }
  validate(config, store.num_entities(), store.num_relations());
  AnalogyCache cache(config, store.train.size());
  parallel_for(store.train.size(), [&](std::size_t i) {
    const Triple& t = store.train[i];
    cache.set(i, retrieve_entity_level(model, t, config), retrieve_relation_level(model, t, config),
              retrieve_triple_level(model, t, config));
  });
  return cache;
}

void save_cache(const AnalogyCache& cache, const std::filesystem::path& path) {
  const RetrieverConfig& c = cache.config();
  Manifest m{std::string(kCacheMagic)};
  m.set("version", 1);
  m.set("entity_top_k", c.entity_top_k);
  m.set("relation_top_k", c.relation_top_k);
  m.set("pair_top_k", c.pair_top_k);
  m.set("entity_preselect", c.entity_preselect);
  m.set("relation_preselect", c.relation_preselect);
  m.set("exclude_original", c.exclude_original ? 1 : 0);
  m.set("checkpoint_digest", cache.checkpoint_digest);
  m.set("store_digest", cache.store_digest);
  m.set("triples", static_cast<std::int64_t>(cache.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write cache " + path.string());
  m.write(out);
  for (std::size_t i = 0; i < cache.size(); ++i) {
    const auto e = cache.entry(i);
    for (const auto& x : e.entities) {
      write_i32(out, x.entity);
      write_f64(out, std::span(&x.score, 1));
    }
    for (const auto& x : e.relations) {
      write_i32(out, x.relation);
      write_f64(out, std::span(&x.score, 1));
    }
    for (const auto& x : e.pairs) {
      write_i32(out, x.entity);
      write_i32(out, x.relation);
      write_f64(out, std::span(&x.score, 1));
    }
  }
  if (!out) throw DataError("failed writing cache " + path.string());
}

AnalogyCache load_cache(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open cache " + path.string());
  const std::string what = "cache " + path.string();
  Manifest m = Manifest::read(in, kCacheMagic);
  if (m.get_int("version") != 1) throw DataError(what + ": unsupported version");
  RetrieverConfig c;
  c.entity_top_k = static_cast<int>(m.get_int("entity_top_k"));
  c.relation_top_k = static_cast<int>(m.get_int("relation_top_k"));
  c.pair_top_k = static_cast<int>(m.get_int("pair_top_k"));
  c.entity_preselect = static_cast<int>(m.get_int("entity_preselect"));
  c.relation_preselect = static_cast<int>(m.get_int("relation_preselect"));
  c.exclude_original = m.get_int("exclude_original") != 0;
  const auto triples = m.get_int("triples");
  if (c.entity_top_k < 1 || c.relation_top_k < 1 || c.pair_top_k < 1 || triples < 0) {
    throw DataError(what + ": invalid shape");
  }
  AnalogyCache cache(c, static_cast<std::size_t>(triples));
  cache.checkpoint_digest = m.get("checkpoint_digest");
  cache.store_digest = m.get("store_digest");
  std::vector<EntityCandidate> ents(static_cast<std::size_t>(c.entity_top_k));
  std::vector<RelationCandidate> rels(static_cast<std::size_t>(c.relation_top_k));
  std::vector<PairCandidate> pairs(static_cast<std::size_t>(c.pair_top_k));
  for (std::size_t i = 0; i < cache.size(); ++i) {
    for (auto& x : ents) {
      x.entity = read_i32(in, what);
      read_f64(in, std::span(&x.score, 1), what);
    }
    for (auto& x : rels) {
      x.relation = read_i32(in, what);
      read_f64(in, std::span(&x.score, 1), what);
    }
    for (auto& x : pairs) {
      x.entity = read_i32(in, what);
      x.relation = read_i32(in, what);
      read_f64(in, std::span(&x.score, 1), what);
    }
    cache.set(i, ents, rels, pairs);
  }
  expect_eof(in, what);
  return cache;
}

}  // namespace ankge
