#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ankge/model.hpp"
#include "ankge/optim.hpp"
#include "ankge/retriever.hpp"
#include "ankge/triple_store.hpp"

namespace ankge {

enum class Similarity { Euclidean, Cosine };

std::string_view to_string(Similarity similarity);
Similarity parse_similarity(std::string_view name);

struct AnalogyTrainConfig {
  double gamma = 10.0;
  double learning_rate = 1e-3;
  int epochs = 10;
  int batch_size = 1024;
  std::uint64_t seed = 0;
  Similarity similarity = Similarity::Euclidean;
};

/// Trainable analogy-function parameters. Rows follow the base model's used
/// layouts: entity rows are d_e = layout.entity wide, relation rows d_r =
/// layout.relation wide.
struct AnalogyParams {
  int entity_width = 0;
  int relation_width = 0;
  std::int32_t num_entities = 0;
  std::int32_t num_relations = 0;
  std::vector<double> entity_projection;    // v^E, |E| x d_e
  std::vector<double> relation_projection;  // v^R, |R| x d_r
  std::vector<double> transform;            // M, d_e x d_r row-major
  double ent_rel_weight = 1.0;

  /// v^E = v^R = 1 and M = 0, so every analogical embedding equals the
  /// original one.
  static AnalogyParams identity(const EmbeddingModel& model, double ent_rel_weight);

  std::span<const double> entity_row(EntityId id) const;
  std::span<const double> relation_row(RelationId id) const;
  std::uint64_t digest() const;

  friend bool operator==(const AnalogyParams&, const AnalogyParams&) = default;
};

/// r_a = v^R_r * r (element-wise).
std::vector<double> analogical_relation(const AnalogyParams& params, const EmbeddingModel& model, RelationId relation);

/// h_a = v^E_h * h + w * M (v^R_r * r).
std::vector<double> analogical_entity(const AnalogyParams& params, const EmbeddingModel& model, EntityId head,
                                      RelationId relation);

/// z_a = g(h_a, r_a).
std::vector<double> analogical_pair(const AnalogyParams& params, const EmbeddingModel& model, EntityId head,
                                    RelationId relation);

/// Softmax with max subtraction.
std::vector<double> softmax(std::span<const double> scores);

/// h+ = sum_i h_i softmax(score_i) over the cached entity candidates.
std::vector<double> aggregate_entity(const AnalogyCache::Entry& entry, const EmbeddingModel& model);

/// r+ = sum_i r_i softmax(score_i) over the cached relation candidates.
std::vector<double> aggregate_relation(const AnalogyCache::Entry& entry, const EmbeddingModel& model);

struct PairAggregate {
  std::vector<double> entity;    // z_e+
  std::vector<double> relation;  // z_r+
  std::vector<double> composed;  // z+ = g(z_e+, z_r+)
};

/// One set of softmax weights over the cached pairs, applied to both sums.
PairAggregate aggregate_triple(const AnalogyCache::Entry& entry, const EmbeddingModel& model);

/// log sig(gamma * dist(x_a, x_plus) - s), with dist the Euclidean distance or
/// 1 - cosine similarity. When requested, writes dL/dx_a into d_xa (overwrite)
/// and dL/ds into d_s.
double level_loss(std::span<const double> x_a, std::span<const double> x_plus, double s, double gamma,
                  Similarity similarity = Similarity::Euclidean, std::span<double> d_xa = {}, double* d_s = nullptr);

struct BetaWeights {
  double entity = 0.0;
  double relation = 0.0;
  double triple = 0.0;
};

/// Softmax of [f(h+, r, t), f(h, r+, t), f(z_e+, z_r+, t), f(h, r, t)],
/// first three entries.
BetaWeights beta_weights(const EmbeddingModel& model, const Triple& triple, std::span<const double> entity_plus,
                         std::span<const double> relation_plus, std::span<const double> pair_entity_plus,
                         std::span<const double> pair_relation_plus);

struct AnalogyGrad {
  explicit AnalogyGrad(const AnalogyParams& params);
  void clear();

  SparseRowGrad entity;
  SparseRowGrad relation;
  std::vector<double> transform;
};

struct AnalogyLoss {
  double total = 0.0;
  double entity = 0.0;
  double relation = 0.0;
  double triple = 0.0;
  BetaWeights beta;
};

/// beta_E L(h_a vs h+) + beta_R L(r_a vs r+) + beta_T L(z_a vs z+), where each
/// level's score term is taken on its analogy triple (h_a, r, t), (h, r_a, t)
/// and (h_a, r_a, t). Gradients, scaled by grad_scale, flow only into the
/// analogy parameters. beta_override replaces the computed beta weights.
AnalogyLoss total_loss(const EmbeddingModel& model, const AnalogyParams& params, const AnalogyCache::Entry& entry,
                       const Triple& triple, const AnalogyTrainConfig& config, AnalogyGrad* grad = nullptr,
                       double grad_scale = 1.0, const BetaWeights* beta_override = nullptr);

/// Mean total_loss over store.train.
double mean_total_loss(const EmbeddingModel& model, const AnalogyParams& params, const TripleStore& store,
                       const AnalogyCache& cache, const AnalogyTrainConfig& config);

struct AnalogyEpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double wall_seconds = 0.0;
};

/// Mini-batch Adam over the training triples starting from identity
/// parameters. The base model is only read.
AnalogyParams train_analogy(const EmbeddingModel& model, const TripleStore& store, const AnalogyCache& cache,
                            const AnalogyTrainConfig& config, double ent_rel_weight,
                            const std::function<void(const AnalogyEpochStats&)>& on_epoch = {});

inline constexpr std::string_view kAnalogyParamsMagic = "ANKGE-ANALOGY-PARAMS";

struct AnalogyParamsMeta {
  std::string base_checkpoint_digest = "none";
  std::string cache_digest = "none";
  Similarity similarity = Similarity::Euclidean;
};

void save_analogy_params(const AnalogyParams& params, const std::filesystem::path& path,
                         const AnalogyParamsMeta& meta = {});
AnalogyParams load_analogy_params(const std::filesystem::path& path, AnalogyParamsMeta* meta = nullptr);

}  // namespace ankge
