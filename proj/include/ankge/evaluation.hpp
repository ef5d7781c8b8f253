#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ankge/analogy.hpp"
#include "ankge/model.hpp"
#include "ankge/triple_store.hpp"

namespace ankge {

struct InferenceConfig {
  double alpha_entity = 0.05;    // alpha_E
  double alpha_relation = 0.3;   // alpha_R
  double alpha_triple = 0.1;     // alpha_T
  int entity_top_k = 1;          // N_e
  int relation_top_k = 1;        // N_r
  int pair_top_k = 5;            // N_t
  bool adaptive = true;          // false: lambda = alpha
};

struct AnalogyWeights {
  double entity = 0.0;    // lambda_E
  double relation = 0.0;  // lambda_R
  double triple = 0.0;    // lambda_T
};

/// lambda_E = min(#(., r, t) / N_e, 1) alpha_E, lambda_R = min(#(h, ., t) / N_r, 1)
/// alpha_R, lambda_T = min(#(., ., t) / N_t, 1) alpha_T, with counts over train.
AnalogyWeights adaptive_weights(const CountIndex& counts, const Triple& triple, const InferenceConfig& config);

/// Precomputed analogical rows for one query (h, r).
class AnkgeScorer {
 public:
  AnkgeScorer(const EmbeddingModel& model, const AnalogyParams& params, EntityId head, RelationId relation);

  /// f(h,r,t) + l_E f(h_a,r,t) + l_R f(h,r_a,t) + l_T f(h_a,r_a,t). Zero
  /// weights skip their term, so all-zero weights give the base score exactly.
  double operator()(EntityId tail, const AnalogyWeights& weights) const;
  std::vector<double> all_tails(const AnalogyWeights& weights) const;

 private:
  const EmbeddingModel& model_;
  std::vector<double> head_analogy_;
  std::vector<double> relation_analogy_;
  TailScorer base_;
  TailScorer entity_term_;
  TailScorer relation_term_;
  TailScorer pair_term_;
};

double ankge_score(const EmbeddingModel& model, const AnalogyParams& params, const Triple& triple,
                   const AnalogyWeights& weights);

/// Filtered rank of the gold tail among candidate scores: other tails in the
/// filter set are dropped, then rank = 1 + #greater + #equal / 2. A NaN score
/// throws NumericError.
double filtered_rank(std::span<const double> scores, const Triple& gold, const FilterIndex& filter);

/// Scores every tail with the query's single set of weights and returns the
/// filtered rank. params == nullptr ranks with the base model.
double rank_tail(const EmbeddingModel& model, const AnalogyParams* params, const Triple& triple,
                 const FilterIndex& filter, const CountIndex& counts, const InferenceConfig& config);

struct Metrics {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Mean reciprocal rank and Hits@{1,3,10} (rank <= k).
Metrics compute_metrics(std::span<const double> ranks);

struct RankRecord {
  Triple triple;
  double base_rank = 0.0;
  double ankge_rank = 0.0;
  AnalogyWeights weights;
};

struct EvalReport {
  Metrics ankge;
  Metrics base;
  std::vector<RankRecord> ranks;
};

/// Tail prediction for every query triple (the reverse-augmented test split by
/// default). Base ranks use only f(h, r, t); AnKGE ranks use the interpolated
/// score, or equal the base ranks when params is null.
EvalReport evaluate(const EmbeddingModel& model, const AnalogyParams* params, const TripleStore& store,
                    const InferenceConfig& config, std::span<const Triple> queries);
EvalReport evaluate(const EmbeddingModel& model, const AnalogyParams* params, const TripleStore& store,
                    const InferenceConfig& config);

/// "key value" lines, metrics with 6 decimals, then metadata lines.
void write_metrics(const EvalReport& report, const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& metadata = {});

/// CSV: head,relation,tail,base_rank,ankge_rank,lambda_E,lambda_R,lambda_T
void write_ranks_csv(const EvalReport& report, const TripleStore& store, const std::filesystem::path& path);

}  // namespace ankge
