#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ankge/triple_store.hpp"

namespace ankge {

enum class ModelFamily { TransE, RotatE, HAKE, PairRE };

std::string_view to_string(ModelFamily family);
ModelFamily parse_family(std::string_view name);

/// Physical row widths for a family at semantic dimension k.
///
///   family   entity row        relation row              composed g(h, r)
///   TransE   k                 k                         k
///   RotatE   [re | im]  2k     phases  k                 [re | im]  2k
///   HAKE     [mod | ph] 2k     [mod | ph] 2k             [mod | mix*sin] 2k
///   PairRE   k                 [r_head | r_tail] 2k      k
///
/// HAKE relation moduli are stored unconstrained and passed through softplus
/// when read; every other parameter is stored as used.
struct RowLayout {
  int entity = 0;
  int relation = 0;
  int composed = 0;
  friend bool operator==(const RowLayout&, const RowLayout&) = default;
};

RowLayout row_layout(ModelFamily family, int dim);

/// Score for a fixed (head, relation) prefix, evaluated against any number of
/// tails. score() goes through this same path, so batched and single-tail
/// scores agree bit for bit.
class TailScorer {
 public:
  TailScorer(ModelFamily family, int dim, std::span<const double> mix_weight);

  void reset(std::span<const double> head, std::span<const double> relation);
  double operator()(std::span<const double> tail) const;

 private:
  ModelFamily family_;
  int dim_;
  std::span<const double> mix_;
  std::vector<double> a_;
  std::vector<double> b_;
};

/// f(h, r, t); higher means more plausible.
double score(ModelFamily family, int dim, std::span<const double> head, std::span<const double> relation,
             std::span<const double> tail, std::span<const double> mix_weight);

/// Accumulates upstream * df/d(argument) into each non-empty output span.
void score_backward(ModelFamily family, int dim, std::span<const double> head, std::span<const double> relation,
                    std::span<const double> tail, std::span<const double> mix_weight, double upstream,
                    std::span<double> d_head, std::span<double> d_relation, std::span<double> d_tail,
                    std::span<double> d_mix);

/// g(h, r) written into out (composed width).
void compose(ModelFamily family, int dim, std::span<const double> head, std::span<const double> relation,
             std::span<const double> mix_weight, std::span<double> out);

/// Vector-Jacobian product of compose: accumulates d_out^T dg/d(argument).
void compose_backward(ModelFamily family, int dim, std::span<const double> head, std::span<const double> relation,
                      std::span<const double> mix_weight, std::span<const double> d_out, std::span<double> d_head,
                      std::span<double> d_relation, std::span<double> d_mix);

class EmbeddingModel {
 public:
  EmbeddingModel(ModelFamily family, std::int32_t num_entities, std::int32_t num_relations, int dim);

  ModelFamily family() const { return family_; }
  int dim() const { return dim_; }
  std::int32_t num_entities() const { return num_entities_; }
  std::int32_t num_relations() const { return num_relations_; }
  const RowLayout& layout() const { return layout_; }

  std::span<const double> entity(EntityId id) const;
  /// Relation row as used by the score function (HAKE moduli already positive).
  std::span<const double> relation(RelationId id) const;
  std::span<const double> mix_weight() const { return mix_weight_; }

  // Trainable storage. Call refresh() after mutating relation_params().
  std::span<double> entity_params() { return entities_; }
  std::span<double> relation_params() { return relation_raw_; }
  std::span<double> mix_params() { return mix_weight_; }
  std::span<const double> entity_params() const { return entities_; }
  std::span<const double> relation_params() const { return relation_raw_; }
  std::span<const double> mix_params() const { return mix_weight_; }
  void refresh();

  /// Converts a gradient w.r.t. the used relation row into one w.r.t. its
  /// stored parameters, in place.
  void relation_grad_to_params(RelationId id, std::span<double> grad) const;

  double score(std::span<const double> head, std::span<const double> relation, std::span<const double> tail) const;
  double score_triple(EntityId head, RelationId relation, EntityId tail) const;
  double score_triple(const Triple& t) const { return score_triple(t.head, t.relation, t.tail); }
  std::vector<double> score_tails(EntityId head, RelationId relation, std::span<const EntityId> tails) const;
  std::vector<double> score_all_tails(EntityId head, RelationId relation) const;
  /// All-tails pass for arbitrary head/relation rows.
  std::vector<double> score_all_tails(std::span<const double> head, std::span<const double> relation) const;

  std::vector<double> compose(std::span<const double> head, std::span<const double> relation) const;
  TailScorer tail_scorer() const { return TailScorer(family_, dim_, mix_weight_); }

  /// Hash over family, shape and every stored parameter.
  std::uint64_t digest() const;

  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;

 private:
  void check_entity(EntityId id) const;
  void check_relation(RelationId id) const;

  ModelFamily family_;
  int dim_;
  std::int32_t num_entities_;
  std::int32_t num_relations_;
  RowLayout layout_;
  std::vector<double> entities_;
  std::vector<double> relation_raw_;
  std::vector<double> relations_;
  std::vector<double> mix_weight_;
};

/// Uniform initialization from a seeded generator. Entity values (and
/// TransE/PairRE relation values) are drawn from [-range, range]; phases from
/// [0, 2*pi); HAKE relation moduli start at 1 and its mix weight at 0.5.
/// range <= 0 selects (9 + 2) / dim.
EmbeddingModel init_model(ModelFamily family, std::int32_t num_entities, std::int32_t num_relations, int dim,
                          std::uint64_t seed, double range = 0.0);

double softplus(double x);
double sigmoid(double x);
/// log(sigmoid(x)) without overflow.
double log_sigmoid(double x);

}  // namespace ankge
