#include "ankge/base_training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "ankge/errors.hpp"
#include "ankge/parallel.hpp"

namespace ankge {

namespace {

// Batches are split into a fixed number of chunks whose gradients are summed
// in chunk order, so results do not depend on the thread count.
constexpr std::size_t kChunks = 16;

}  // namespace

void validate(const BaseTrainConfig& c) {
  if (!(c.margin > 0.0) || !(c.adversarial_temperature > 0.0) || c.negative_samples < 1 || c.batch_size < 1 ||
      !(c.learning_rate > 0.0) || c.epochs < 0 || c.dim < 1) {
    throw std::invalid_argument("base training configuration values must be positive");
  }
}

SplitMix64::result_type SplitMix64::operator()() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ModelGrad::ModelGrad(const EmbeddingModel& model)
    : entity(model.layout().entity), relation(model.layout().relation), mix(model.mix_weight().size(), 0.0) {}

void ModelGrad::clear() {
  entity.clear();
  relation.clear();
  std::fill(mix.begin(), mix.end(), 0.0);
}

AdversarialLoss self_adversarial_loss(const EmbeddingModel& model, const Triple& positive,
                                      std::span<const Triple> negatives, double margin, double temperature,
                                      ModelGrad* grad, double grad_scale, std::span<const double> frozen_weights) {
  if (negatives.empty()) throw std::invalid_argument("self-adversarial loss needs at least one negative");
  if (!frozen_weights.empty() && frozen_weights.size() != negatives.size()) {
    throw std::invalid_argument("frozen weight count must match negative count");
  }
  TailScorer scorer = model.tail_scorer();
  Triple current = positive;
  scorer.reset(model.entity(positive.head), model.relation(positive.relation));
  const double pos_score = scorer(model.entity(positive.tail));
  std::vector<double> neg_scores(negatives.size());
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    const Triple& n = negatives[i];
    if (n.head != current.head || n.relation != current.relation) {
      current = n;
      scorer.reset(model.entity(n.head), model.relation(n.relation));
    }
    neg_scores[i] = scorer(model.entity(n.tail));
  }

  AdversarialLoss out;
  if (frozen_weights.empty()) {
    out.weights.resize(negatives.size());
    const double top = *std::max_element(neg_scores.begin(), neg_scores.end()) * temperature;
    double total = 0.0;
    for (std::size_t i = 0; i < negatives.size(); ++i) {
      out.weights[i] = std::exp(temperature * neg_scores[i] - top);
      total += out.weights[i];
    }
    for (double& w : out.weights) w /= total;
  } else {
    out.weights.assign(frozen_weights.begin(), frozen_weights.end());
  }

  out.loss = -log_sigmoid(margin + pos_score);
  for (std::size_t i = 0; i < negatives.size(); ++i) out.loss -= out.weights[i] * log_sigmoid(-margin - neg_scores[i]);

  if (grad != nullptr) {
    auto backward = [&](const Triple& t, double upstream) {
      score_backward(model.family(), model.dim(), model.entity(t.head), model.relation(t.relation),
                     model.entity(t.tail), model.mix_weight(), upstream, grad->entity.row(t.head),
                     grad->relation.row(t.relation), grad->entity.row(t.tail), grad->mix);
    };
    // d/dx [-log sig(x)] = -sig(-x)
    backward(positive, -sigmoid(-(margin + pos_score)) * grad_scale);
    for (std::size_t i = 0; i < negatives.size(); ++i) {
      backward(negatives[i], out.weights[i] * sigmoid(margin + neg_scores[i]) * grad_scale);
    }
  }
  return out;
}

std::vector<Triple> sample_negatives(std::int32_t num_entities, const Triple& positive, int count, SplitMix64& rng) {
  if (count < 1) throw std::invalid_argument("negative sample count must be at least 1");
  std::uniform_int_distribution<EntityId> pick(0, num_entities - 1);
  std::vector<Triple> out(static_cast<std::size_t>(count), positive);
  for (Triple& t : out) t.tail = pick(rng);
  return out;
}

std::vector<Triple> sample_negatives(const TripleStore& store, const Triple& positive, int count, SplitMix64& rng) {
  return sample_negatives(store.num_entities(), positive, count, rng);
}

EmbeddingModel train_base(const TripleStore& store, ModelFamily family, const BaseTrainConfig& config,
                          const EpochCallback& on_epoch) {
  validate(config);
  EmbeddingModel model = init_model(family, store.num_entities(), store.num_relations(), config.dim, config.seed,
                                    (config.margin + 2.0) / config.dim);
  train_base(model, store, config, on_epoch);
  return model;
}

void train_base(EmbeddingModel& model, const TripleStore& store, const BaseTrainConfig& config,
                const EpochCallback& on_epoch) {
  validate(config);
  if (!store.augmented) throw std::logic_error("base training expects a reverse-augmented store");
  if (model.num_entities() != store.num_entities() || model.num_relations() != store.num_relations()) {
    throw std::invalid_argument("model and store vocabularies disagree");
  }
  if (config.epochs == 0 || store.train.empty()) return;

  const AdamOptions adam{config.learning_rate};
  Adam entity_opt(model.entity_params().size(), adam);
  Adam relation_opt(model.relation_params().size(), adam);
  Adam mix_opt(model.mix_params().size(), adam);
  std::vector<double> entity_grad(model.entity_params().size());
  std::vector<double> relation_grad(model.relation_params().size());
  std::vector<double> mix_grad(model.mix_params().size());
  std::vector<ModelGrad> chunk_grads(kChunks, ModelGrad(model));
  std::vector<double> chunk_loss(kChunks);

  std::vector<std::size_t> order(store.train.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch_size = static_cast<std::size_t>(config.batch_size);
  const auto rw = static_cast<std::size_t>(model.layout().relation);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 shuffle_rng(splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(epoch) + 1)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;

    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
      const std::size_t end = std::min(order.size(), begin + batch_size);
      const std::size_t count = end - begin;
      const double scale = 1.0 / static_cast<double>(count);

      parallel_for(kChunks, [&](std::size_t c) {
        ModelGrad& g = chunk_grads[c];
        g.clear();
        chunk_loss[c] = 0.0;
        const std::size_t lo = begin + count * c / kChunks;
        const std::size_t hi = begin + count * (c + 1) / kChunks;
        for (std::size_t pos = lo; pos < hi; ++pos) {
          const Triple& positive = store.train[order[pos]];
          SplitMix64 rng(splitmix64(config.seed + 0x51ed2701ULL) ^
                         splitmix64((static_cast<std::uint64_t>(epoch) << 32) + pos));
          const auto negatives = sample_negatives(store, positive, config.negative_samples, rng);
          chunk_loss[c] += self_adversarial_loss(model, positive, negatives, config.margin,
                                                 config.adversarial_temperature, &g, scale)
                               .loss;
        }
      });

      double batch_loss = 0.0;
      std::fill(entity_grad.begin(), entity_grad.end(), 0.0);
      std::fill(relation_grad.begin(), relation_grad.end(), 0.0);
      std::fill(mix_grad.begin(), mix_grad.end(), 0.0);
      for (std::size_t c = 0; c < kChunks; ++c) {
        batch_loss += chunk_loss[c];
        chunk_grads[c].entity.add_to_dense(entity_grad);
        chunk_grads[c].relation.add_to_dense(relation_grad);
        for (std::size_t i = 0; i < mix_grad.size(); ++i) mix_grad[i] += chunk_grads[c].mix[i];
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("base training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch starting at " + std::to_string(begin));
      }
      epoch_loss += batch_loss;
      for (RelationId r = 0; r < model.num_relations(); ++r) {
        model.relation_grad_to_params(r, std::span<double>(relation_grad).subspan(static_cast<std::size_t>(r) * rw, rw));
      }
      entity_opt.step(model.entity_params(), entity_grad);
      relation_opt.step(model.relation_params(), relation_grad);
      mix_opt.step(model.mix_params(), mix_grad);
      model.refresh();
    }

    if (on_epoch) {
      const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
      on_epoch({epoch, epoch_loss / static_cast<double>(order.size()), wall.count()});
    }
  }
}

}  // namespace ankge
