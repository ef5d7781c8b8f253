#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "ankge/analogy.hpp"
#include "ankge/evaluation.hpp"
#include "ankge/model.hpp"
#include "ankge/retriever.hpp"
#include "ankge/triple_store.hpp"

// Brute-force reference implementations: score everything, std::sort, cut.
namespace oracle {

using namespace ankge;

inline std::vector<EntityCandidate> entity_level(const EmbeddingModel& m, const Triple& q, int k, bool exclude) {
  std::vector<EntityCandidate> all;
  for (EntityId e = 0; e < m.num_entities(); ++e) {
    if (exclude && e == q.head) continue;
    all.push_back({e, m.score_triple(e, q.relation, q.tail)});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return std::tie(b.score, a.entity) < std::tie(a.score, b.entity);
  });
  all.resize(static_cast<std::size_t>(k));
  return all;
}

inline std::vector<RelationCandidate> relation_level(const EmbeddingModel& m, const Triple& q, int k, bool exclude) {
  std::vector<RelationCandidate> all;
  for (RelationId r = 0; r < m.num_relations(); ++r) {
    if (exclude && r == q.relation) continue;
    all.push_back({r, m.score_triple(q.head, r, q.tail)});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return std::tie(b.score, a.relation) < std::tie(a.score, b.relation);
  });
  all.resize(static_cast<std::size_t>(k));
  return all;
}

// Pairs over the pre-selected heads and relations (all of them when m = |E|
// and n = |R|), excluding only the exact original pair.
inline std::vector<PairCandidate> triple_level(const EmbeddingModel& m, const Triple& q, int k, int pre_m, int pre_n,
                                               bool exclude) {
  const auto heads = entity_level(m, q, std::min(pre_m, m.num_entities()), false);
  const auto rels = relation_level(m, q, std::min(pre_n, m.num_relations()), false);
  std::vector<PairCandidate> all;
  for (const auto& h : heads) {
    for (const auto& r : rels) {
      if (exclude && h.entity == q.head && r.relation == q.relation) continue;
      all.push_back({h.entity, r.relation, m.score_triple(h.entity, r.relation, q.tail)});
    }
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return std::tie(b.score, a.entity, a.relation) < std::tie(a.score, b.entity, b.relation);
  });
  all.resize(static_cast<std::size_t>(k));
  return all;
}

// Random model whose tables contain duplicated rows so that ties occur.
inline EmbeddingModel model_with_ties(ModelFamily family, std::int32_t entities, std::int32_t relations, int dim,
                                      std::mt19937_64& rng) {
  EmbeddingModel m(family, entities, relations, dim);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : m.entity_params()) v = u(rng);
  for (double& v : m.relation_params()) v = u(rng);
  for (double& v : m.mix_params()) v = 0.5;
  const auto ew = static_cast<std::size_t>(m.layout().entity);
  const auto rw = static_cast<std::size_t>(m.layout().relation);
  std::uniform_int_distribution<std::int32_t> pe(0, entities - 1), pr(0, relations - 1);
  auto ent = m.entity_params();
  auto rel = m.relation_params();
  for (int i = 0; i < entities / 4; ++i) {
    const auto src = static_cast<std::size_t>(pe(rng)), dst = static_cast<std::size_t>(pe(rng));
    std::copy_n(ent.begin() + static_cast<std::ptrdiff_t>(src * ew), ew, ent.begin() + static_cast<std::ptrdiff_t>(dst * ew));
  }
  for (int i = 0; i < std::max(1, relations / 4); ++i) {
    const auto src = static_cast<std::size_t>(pr(rng)), dst = static_cast<std::size_t>(pr(rng));
    std::copy_n(rel.begin() + static_cast<std::ptrdiff_t>(src * rw), rw, rel.begin() + static_cast<std::ptrdiff_t>(dst * rw));
  }
  m.refresh();
  return m;
}

// Reference AnKGE score from four independent score() calls.
inline double ankge_score(const EmbeddingModel& m, const AnalogyParams* p, const Triple& q, const AnalogyWeights& w) {
  const auto h = m.entity(q.head);
  const auto r = m.relation(q.relation);
  const auto t = m.entity(q.tail);
  double s = m.score(h, r, t);
  if (p == nullptr) return s;
  const auto ha = analogical_entity(*p, m, q.head, q.relation);
  const auto ra = analogical_relation(*p, m, q.relation);
  if (w.entity != 0.0) s += w.entity * m.score(ha, r, t);
  if (w.relation != 0.0) s += w.relation * m.score(h, ra, t);
  if (w.triple != 0.0) s += w.triple * m.score(ha, ra, t);
  return s;
}

inline AnalogyWeights weights(const TripleStore& store, const Triple& q, const InferenceConfig& c) {
  if (!c.adaptive) return {c.alpha_entity, c.alpha_relation, c.alpha_triple};
  std::int64_t rt = 0, ht = 0, tc = 0;
  for (const Triple& x : store.train) {
    rt += (x.relation == q.relation && x.tail == q.tail) ? 1 : 0;
    ht += (x.head == q.head && x.tail == q.tail) ? 1 : 0;
    tc += x.tail == q.tail ? 1 : 0;
  }
  auto cap = [](std::int64_t n, int limit) { return std::min(1.0, static_cast<double>(n) / limit); };
  return {c.alpha_entity * cap(rt, c.entity_top_k), c.alpha_relation * cap(ht, c.relation_top_k),
          c.alpha_triple * cap(tc, c.pair_top_k)};
}

// Filtered rank with the average-tie rule, from a linear scan of the splits.
inline double rank(const EmbeddingModel& m, const AnalogyParams* p, const TripleStore& store, const Triple& q,
                   const InferenceConfig& c) {
  const AnalogyWeights w = p == nullptr ? AnalogyWeights{} : weights(store, q, c);
  auto known = [&](EntityId t) {
    for (const auto* split : {&store.train, &store.valid, &store.test}) {
      for (const Triple& x : *split) {
        if (x.head == q.head && x.relation == q.relation && x.tail == t) return true;
      }
    }
    return false;
  };
  const double gold = ankge_score(m, p, q, w);
  double greater = 0.0, equal = 0.0;
  for (EntityId t = 0; t < m.num_entities(); ++t) {
    if (t == q.tail || known(t)) continue;
    const double s = ankge_score(m, p, {q.head, q.relation, t}, w);
    if (s > gold) greater += 1.0;
    if (s == gold) equal += 1.0;
  }
  return 1.0 + greater + equal / 2.0;
}

// Random augmented store over named entities and relations; train, valid and
// test are disjoint and may contain symbols that never occur in train.
inline TripleStore random_store(std::mt19937_64& rng, int entities, int relations, int train, int valid, int test) {
  std::uniform_int_distribution<int> pe(0, entities - 1), pr(0, relations - 1);
  std::vector<RawTriple> all;
  std::vector<std::tuple<int, int, int>> seen;
  while (static_cast<int>(all.size()) < train + valid + test) {
    const auto key = std::make_tuple(pe(rng), pr(rng), pe(rng));
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    all.push_back({"e" + std::to_string(std::get<0>(key)), "r" + std::to_string(std::get<1>(key)),
                   "e" + std::to_string(std::get<2>(key))});
  }
  const auto a = all.begin();
  const std::vector<RawTriple> tr(a, a + train), va(a + train, a + train + valid), te(a + train + valid, all.end());
  return augment_reverse(build_store(tr, va, te));
}

// Identity analogy parameters with uniform noise on every entry.
inline AnalogyParams random_params(const EmbeddingModel& m, std::mt19937_64& rng, double weight) {
  AnalogyParams p = AnalogyParams::identity(m, weight);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (double& v : p.entity_projection) v += u(rng);
  for (double& v : p.relation_projection) v += u(rng);
  for (double& v : p.transform) v = u(rng);
  return p;
}

}  // namespace oracle
