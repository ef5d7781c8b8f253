#include "ankge/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "ankge/errors.hpp"
#include "ankge/parallel.hpp"

namespace ankge {

namespace {

double capped_ratio(std::int64_t count, int denominator) {
  return std::min(static_cast<double>(count) / static_cast<double>(denominator), 1.0);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

AnalogyWeights adaptive_weights(const CountIndex& counts, const Triple& triple, const InferenceConfig& config) {
  if (!config.adaptive) return {config.alpha_entity, config.alpha_relation, config.alpha_triple};
  if (config.entity_top_k < 1 || config.relation_top_k < 1 || config.pair_top_k < 1) {
    throw std::invalid_argument("adaptive weight denominators must be positive");
  }
  return {capped_ratio(counts.rt_count(triple.relation, triple.tail), config.entity_top_k) * config.alpha_entity,
          capped_ratio(counts.ht_count(triple.head, triple.tail), config.relation_top_k) * config.alpha_relation,
          capped_ratio(counts.t_count(triple.tail), config.pair_top_k) * config.alpha_triple};
}

AnkgeScorer::AnkgeScorer(const EmbeddingModel& model, const AnalogyParams& params, EntityId head,
                         RelationId relation)
    : model_(model), head_analogy_(analogical_entity(params, model, head, relation)),
      relation_analogy_(analogical_relation(params, model, relation)), base_(model.tail_scorer()),
      entity_term_(model.tail_scorer()), relation_term_(model.tail_scorer()), pair_term_(model.tail_scorer()) {
  const auto h = model.entity(head);
  const auto r = model.relation(relation);
  base_.reset(h, r);
  entity_term_.reset(head_analogy_, r);
  relation_term_.reset(h, relation_analogy_);
  pair_term_.reset(head_analogy_, relation_analogy_);
}

double AnkgeScorer::operator()(EntityId tail, const AnalogyWeights& w) const {
  const auto t = model_.entity(tail);
  double s = base_(t);
  if (w.entity != 0.0) s += w.entity * entity_term_(t);
  if (w.relation != 0.0) s += w.relation * relation_term_(t);
  if (w.triple != 0.0) s += w.triple * pair_term_(t);
  return s;
}

std::vector<double> AnkgeScorer::all_tails(const AnalogyWeights& weights) const {
  std::vector<double> out(static_cast<std::size_t>(model_.num_entities()));
  for (EntityId t = 0; t < model_.num_entities(); ++t) out[static_cast<std::size_t>(t)] = (*this)(t, weights);
  return out;
}

double ankge_score(const EmbeddingModel& model, const AnalogyParams& params, const Triple& triple,
                   const AnalogyWeights& weights) {
  return AnkgeScorer(model, params, triple.head, triple.relation)(triple.tail, weights);
}

double filtered_rank(std::span<const double> scores, const Triple& gold, const FilterIndex& filter) {
  const double target = scores[static_cast<std::size_t>(gold.tail)];
  if (std::isnan(target)) throw NumericError("gold tail scored NaN");
  std::int64_t greater = 0;
  std::int64_t equal = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] < target) continue;
    if (std::isnan(scores[i])) throw NumericError("candidate tail scored NaN");
    const auto cand = static_cast<EntityId>(i);
    if (cand == gold.tail) continue;
    if (filter.contains(gold.head, gold.relation, cand)) continue;
    if (scores[i] > target) {
      ++greater;
    } else {
      ++equal;
    }
  }
  return 1.0 + static_cast<double>(greater) + static_cast<double>(equal) / 2.0;
}

double rank_tail(const EmbeddingModel& model, const AnalogyParams* params, const Triple& triple,
                 const FilterIndex& filter, const CountIndex& counts, const InferenceConfig& config) {
  if (params == nullptr) return filtered_rank(model.score_all_tails(triple.head, triple.relation), triple, filter);
  const AnalogyWeights w = adaptive_weights(counts, triple, config);
  return filtered_rank(AnkgeScorer(model, *params, triple.head, triple.relation).all_tails(w), triple, filter);
}

Metrics compute_metrics(std::span<const double> ranks) {
  Metrics m;
  if (ranks.empty()) return m;
  for (double r : ranks) {
    m.mrr += 1.0 / r;
    m.hits1 += r <= 1.0 ? 1.0 : 0.0;
    m.hits3 += r <= 3.0 ? 1.0 : 0.0;
    m.hits10 += r <= 10.0 ? 1.0 : 0.0;
  }
  const auto n = static_cast<double>(ranks.size());
  m.mrr /= n;
  m.hits1 /= n;
  m.hits3 /= n;
  m.hits10 /= n;
  return m;
}

EvalReport evaluate(const EmbeddingModel& model, const AnalogyParams* params, const TripleStore& store,
                    const InferenceConfig& config, std::span<const Triple> queries) {
  if (queries.empty()) throw std::invalid_argument("evaluation needs at least one query triple");
  const FilterIndex filter(store);
  const CountIndex counts(store);
  EvalReport report;
  report.ranks.resize(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) {
    RankRecord& rec = report.ranks[i];
    rec.triple = queries[i];
    rec.base_rank = rank_tail(model, nullptr, rec.triple, filter, counts, config);
    if (params == nullptr) {
      rec.ankge_rank = rec.base_rank;
    } else {
      rec.weights = adaptive_weights(counts, rec.triple, config);
      rec.ankge_rank = rank_tail(model, params, rec.triple, filter, counts, config);
    }
  });
  std::vector<double> base_ranks, ankge_ranks;
  for (const auto& r : report.ranks) {
    base_ranks.push_back(r.base_rank);
    ankge_ranks.push_back(r.ankge_rank);
  }
  report.base = compute_metrics(base_ranks);
  report.ankge = compute_metrics(ankge_ranks);
  return report;
}

EvalReport evaluate(const EmbeddingModel& model, const AnalogyParams* params, const TripleStore& store,
                    const InferenceConfig& config) {
  return evaluate(model, params, store, config, store.test);
}

void write_metrics(const EvalReport& report, const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& metadata) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "mrr " << fixed6(report.ankge.mrr) << '\n';
  out << "hits1 " << fixed6(report.ankge.hits1) << '\n';
  out << "hits3 " << fixed6(report.ankge.hits3) << '\n';
  out << "hits10 " << fixed6(report.ankge.hits10) << '\n';
  out << "base_mrr " << fixed6(report.base.mrr) << '\n';
  out << "base_hits1 " << fixed6(report.base.hits1) << '\n';
  out << "base_hits3 " << fixed6(report.base.hits3) << '\n';
  out << "base_hits10 " << fixed6(report.base.hits10) << '\n';
  out << "queries " << report.ranks.size() << '\n';
  for (const auto& [k, v] : metadata) out << k << ' ' << v << '\n';
}

void write_ranks_csv(const EvalReport& report, const TripleStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << "head,relation,tail,base_rank,ankge_rank,lambda_E,lambda_R,lambda_T\n";
  for (const auto& r : report.ranks) {
    out << csv_field(store.entities.name(r.triple.head)) << ',' << csv_field(store.relations.name(r.triple.relation))
        << ',' << csv_field(store.entities.name(r.triple.tail)) << ',' << r.base_rank << ',' << r.ankge_rank << ','
        << r.weights.entity << ',' << r.weights.relation << ',' << r.weights.triple << '\n';
  }
}

}  // namespace ankge
