#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "ankge/model.hpp"
#include "ankge/optim.hpp"
#include "ankge/triple_store.hpp"

namespace ankge {

struct BaseTrainConfig {
  double margin = 9.0;
  double adversarial_temperature = 1.0;
  int negative_samples = 256;
  int batch_size = 1024;
  double learning_rate = 1e-3;
  int epochs = 100;
  int dim = 500;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument unless every field is positive (epochs may be 0).
void validate(const BaseTrainConfig& config);

/// Small counter-based generator; cheap to construct per work item.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t state_;
};

/// Gradients of a loss w.r.t. a model. Relation rows hold gradients w.r.t. the
/// rows returned by EmbeddingModel::relation(), not the stored parameters.
struct ModelGrad {
  explicit ModelGrad(const EmbeddingModel& model);
  void clear();

  SparseRowGrad entity;
  SparseRowGrad relation;
  std::vector<double> mix;
};

struct AdversarialLoss {
  double loss = 0.0;
  /// Self-adversarial weight of each negative.
  std::vector<double> weights;
};

/// Negative-sampling loss with self-adversarial weighting:
///
///   L = -log sig(margin + f(pos)) - sum_i p_i log sig(-margin - f(neg_i))
///   p = softmax(temperature * f(neg))
///
/// p is a constant for differentiation. When frozen_weights is non-empty it
/// replaces p (used for finite-difference checks). Gradients, scaled by
/// grad_scale, are accumulated into grad when it is non-null.
AdversarialLoss self_adversarial_loss(const EmbeddingModel& model, const Triple& positive,
                                      std::span<const Triple> negatives, double margin, double temperature,
                                      ModelGrad* grad = nullptr, double grad_scale = 1.0,
                                      std::span<const double> frozen_weights = {});

/// Tail corruption with uniformly drawn entity ids; the gold tail is not
/// filtered out.
std::vector<Triple> sample_negatives(std::int32_t num_entities, const Triple& positive, int count, SplitMix64& rng);
std::vector<Triple> sample_negatives(const TripleStore& store, const Triple& positive, int count, SplitMix64& rng);

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double wall_seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Mini-batch Adam on the self-adversarial loss over store.train. The model is
/// initialized with init_model(family, ..., config.dim, config.seed,
/// (margin + 2) / dim). Throws NumericError if the loss becomes non-finite.
EmbeddingModel train_base(const TripleStore& store, ModelFamily family, const BaseTrainConfig& config,
                          const EpochCallback& on_epoch = {});

/// Continues training an existing model in place.
void train_base(EmbeddingModel& model, const TripleStore& store, const BaseTrainConfig& config,
                const EpochCallback& on_epoch = {});

}  // namespace ankge
