#include "ankge/analogy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ankge/digest.hpp"
#include "ankge/errors.hpp"
#include "ankge/manifest.hpp"
#include "ankge/parallel.hpp"

namespace ankge {

namespace {

constexpr std::size_t kChunks = 16;

void check_params(const AnalogyParams& p, const EmbeddingModel& model) {
  if (p.entity_width != model.layout().entity || p.relation_width != model.layout().relation ||
      p.num_entities != model.num_entities() || p.num_relations != model.num_relations()) {
    throw std::invalid_argument("analogy parameters do not match the base model");
  }
}

// Weighted sum of rows; weights come from the softmax over scores.
void accumulate(std::span<double> out, std::span<const double> row, double weight) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += weight * row[i];
}

struct Forward {
  std::vector<double> relation_scaled;  // u = v^R * r, also r_a
  std::vector<double> entity;           // h_a
  std::vector<double> pair;             // z_a
};

Forward forward(const AnalogyParams& p, const EmbeddingModel& model, EntityId head, RelationId relation) {
  check_params(p, model);
  const auto h = model.entity(head);
  const auto r = model.relation(relation);
  const auto vr = p.relation_row(relation);
  const auto ve = p.entity_row(head);
  const auto de = static_cast<std::size_t>(p.entity_width);
  const auto dr = static_cast<std::size_t>(p.relation_width);
  Forward f;
  f.relation_scaled.resize(dr);
  for (std::size_t j = 0; j < dr; ++j) f.relation_scaled[j] = vr[j] * r[j];
  f.entity.resize(de);
  for (std::size_t i = 0; i < de; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < dr; ++j) mu += p.transform[i * dr + j] * f.relation_scaled[j];
    f.entity[i] = ve[i] * h[i] + p.ent_rel_weight * mu;
  }
  f.pair = model.compose(f.entity, f.relation_scaled);
  return f;
}

}  // namespace

std::string_view to_string(Similarity similarity) {
  return similarity == Similarity::Cosine ? "cosine" : "euclidean";
}

Similarity parse_similarity(std::string_view name) {
  if (name == "euclidean") return Similarity::Euclidean;
  if (name == "cosine") return Similarity::Cosine;
  throw std::invalid_argument("unknown similarity: " + std::string(name));
}

AnalogyParams AnalogyParams::identity(const EmbeddingModel& model, double ent_rel_weight) {
  AnalogyParams p;
  p.entity_width = model.layout().entity;
  p.relation_width = model.layout().relation;
  p.num_entities = model.num_entities();
  p.num_relations = model.num_relations();
  p.entity_projection.assign(static_cast<std::size_t>(p.num_entities) * static_cast<std::size_t>(p.entity_width), 1.0);
  p.relation_projection.assign(
      static_cast<std::size_t>(p.num_relations) * static_cast<std::size_t>(p.relation_width), 1.0);
  p.transform.assign(static_cast<std::size_t>(p.entity_width) * static_cast<std::size_t>(p.relation_width), 0.0);
  p.ent_rel_weight = ent_rel_weight;
  return p;
}

std::span<const double> AnalogyParams::entity_row(EntityId id) const {
  if (id < 0 || id >= num_entities) throw std::out_of_range("entity id out of range");
  const auto w = static_cast<std::size_t>(entity_width);
  return std::span<const double>(entity_projection).subspan(static_cast<std::size_t>(id) * w, w);
}

std::span<const double> AnalogyParams::relation_row(RelationId id) const {
  if (id < 0 || id >= num_relations) throw std::out_of_range("relation id out of range");
  const auto w = static_cast<std::size_t>(relation_width);
  return std::span<const double>(relation_projection).subspan(static_cast<std::size_t>(id) * w, w);
}

std::uint64_t AnalogyParams::digest() const {
  Digest d;
  d.update_u64(static_cast<std::uint64_t>(entity_width));
  d.update_u64(static_cast<std::uint64_t>(relation_width));
  d.update(std::span<const double>(entity_projection));
  d.update(std::span<const double>(relation_projection));
  d.update(std::span<const double>(transform));
  d.update(std::span<const double>(&ent_rel_weight, 1));
  return d.value();
}

std::vector<double> analogical_relation(const AnalogyParams& params, const EmbeddingModel& model,
                                        RelationId relation) {
  check_params(params, model);
  const auto r = model.relation(relation);
  const auto v = params.relation_row(relation);
  std::vector<double> out(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) out[j] = v[j] * r[j];
  return out;
}

std::vector<double> analogical_entity(const AnalogyParams& params, const EmbeddingModel& model, EntityId head,
                                      RelationId relation) {
  return forward(params, model, head, relation).entity;
}

std::vector<double> analogical_pair(const AnalogyParams& params, const EmbeddingModel& model, EntityId head,
                                    RelationId relation) {
  return forward(params, model, head, relation).pair;
}

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("softmax of an empty list");
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> w(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    w[i] = std::exp(scores[i] - top);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> aggregate_entity(const AnalogyCache::Entry& entry, const EmbeddingModel& model) {
  if (entry.entities.empty()) throw std::invalid_argument("no entity candidates to aggregate");
  std::vector<double> scores;
  for (const auto& c : entry.entities) scores.push_back(c.score);
  const auto w = softmax(scores);
  std::vector<double> out(static_cast<std::size_t>(model.layout().entity), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) accumulate(out, model.entity(entry.entities[i].entity), w[i]);
  return out;
}

std::vector<double> aggregate_relation(const AnalogyCache::Entry& entry, const EmbeddingModel& model) {
  if (entry.relations.empty()) throw std::invalid_argument("no relation candidates to aggregate");
  std::vector<double> scores;
  for (const auto& c : entry.relations) scores.push_back(c.score);
  const auto w = softmax(scores);
  std::vector<double> out(static_cast<std::size_t>(model.layout().relation), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) accumulate(out, model.relation(entry.relations[i].relation), w[i]);
  return out;
}

PairAggregate aggregate_triple(const AnalogyCache::Entry& entry, const EmbeddingModel& model) {
  if (entry.pairs.empty()) throw std::invalid_argument("no pair candidates to aggregate");
  std::vector<double> scores;
  for (const auto& c : entry.pairs) scores.push_back(c.score);
  const auto w = softmax(scores);
  PairAggregate out;
  out.entity.assign(static_cast<std::size_t>(model.layout().entity), 0.0);
  out.relation.assign(static_cast<std::size_t>(model.layout().relation), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    accumulate(out.entity, model.entity(entry.pairs[i].entity), w[i]);
    accumulate(out.relation, model.relation(entry.pairs[i].relation), w[i]);
  }
  out.composed = model.compose(out.entity, out.relation);
  return out;
}

double level_loss(std::span<const double> x_a, std::span<const double> x_plus, double s, double gamma,
                  Similarity similarity, std::span<double> d_xa, double* d_s) {
  if (x_a.size() != x_plus.size()) throw std::invalid_argument("level loss operands differ in length");
  const std::size_t n = x_a.size();
  double distance = 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  if (similarity == Similarity::Euclidean) {
    for (std::size_t i = 0; i < n; ++i) distance += (x_a[i] - x_plus[i]) * (x_a[i] - x_plus[i]);
    distance = std::sqrt(distance);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      dot += x_a[i] * x_plus[i];
      na += x_a[i] * x_a[i];
      nb += x_plus[i] * x_plus[i];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    const double cosine = (na > 0.0 && nb > 0.0) ? dot / (na * nb) : 0.0;
    distance = 1.0 - cosine;
  }
  const double x = gamma * distance - s;
  const double loss = log_sigmoid(x);
  const double dx = sigmoid(-x);  // d log sig(x) / dx
  if (d_s != nullptr) *d_s = -dx;
  if (!d_xa.empty()) {
    std::fill(d_xa.begin(), d_xa.end(), 0.0);
    if (similarity == Similarity::Euclidean) {
      if (distance > 0.0) {
        for (std::size_t i = 0; i < n; ++i) d_xa[i] = dx * gamma * (x_a[i] - x_plus[i]) / distance;
      }
    } else if (na > 0.0 && nb > 0.0) {
      const double cosine = dot / (na * nb);
      for (std::size_t i = 0; i < n; ++i) {
        d_xa[i] = -dx * gamma * (x_plus[i] / (na * nb) - cosine * x_a[i] / (na * na));
      }
    }
  }
  return loss;
}

BetaWeights beta_weights(const EmbeddingModel& model, const Triple& triple, std::span<const double> entity_plus,
                         std::span<const double> relation_plus, std::span<const double> pair_entity_plus,
                         std::span<const double> pair_relation_plus) {
  const auto h = model.entity(triple.head);
  const auto r = model.relation(triple.relation);
  const auto t = model.entity(triple.tail);
  const double scores[4] = {model.score(entity_plus, r, t), model.score(h, relation_plus, t),
                            model.score(pair_entity_plus, pair_relation_plus, t), model.score(h, r, t)};
  const auto w = softmax(scores);
  return {w[0], w[1], w[2]};
}

AnalogyGrad::AnalogyGrad(const AnalogyParams& params)
    : entity(params.entity_width), relation(params.relation_width),
      transform(static_cast<std::size_t>(params.entity_width) * static_cast<std::size_t>(params.relation_width), 0.0) {}

void AnalogyGrad::clear() {
  entity.clear();
  relation.clear();
  std::fill(transform.begin(), transform.end(), 0.0);
}

AnalogyLoss total_loss(const EmbeddingModel& model, const AnalogyParams& params, const AnalogyCache::Entry& entry,
                       const Triple& triple, const AnalogyTrainConfig& config, AnalogyGrad* grad, double grad_scale,
                       const BetaWeights* beta_override) {
  const Forward fw = forward(params, model, triple.head, triple.relation);
  const auto h = model.entity(triple.head);
  const auto r = model.relation(triple.relation);
  const auto t = model.entity(triple.tail);

  const auto entity_plus = aggregate_entity(entry, model);
  const auto relation_plus = aggregate_relation(entry, model);
  const auto pair_plus = aggregate_triple(entry, model);

  AnalogyLoss out;
  out.beta = beta_override != nullptr
                 ? *beta_override
                 : beta_weights(model, triple, entity_plus, relation_plus, pair_plus.entity, pair_plus.relation);

  const auto& h_a = fw.entity;
  const auto& r_a = fw.relation_scaled;
  const auto& z_a = fw.pair;
  const double s_entity = model.score(h_a, r, t);
  const double s_relation = model.score(h, r_a, t);
  const double s_pair = model.score(h_a, r_a, t);

  std::vector<double> dx_entity, dx_relation, dx_pair;
  const bool want_grad = grad != nullptr;
  if (want_grad) {
    dx_entity.resize(h_a.size());
    dx_relation.resize(r_a.size());
    dx_pair.resize(z_a.size());
  }
  double ds_entity = 0.0, ds_relation = 0.0, ds_pair = 0.0;
  out.entity = level_loss(h_a, entity_plus, s_entity, config.gamma, config.similarity, dx_entity,
                          want_grad ? &ds_entity : nullptr);
  out.relation = level_loss(r_a, relation_plus, s_relation, config.gamma, config.similarity, dx_relation,
                            want_grad ? &ds_relation : nullptr);
  out.triple = level_loss(z_a, pair_plus.composed, s_pair, config.gamma, config.similarity, dx_pair,
                          want_grad ? &ds_pair : nullptr);
  out.total = out.beta.entity * out.entity + out.beta.relation * out.relation + out.beta.triple * out.triple;
  if (!want_grad) return out;

  const double be = out.beta.entity * grad_scale;
  const double br = out.beta.relation * grad_scale;
  const double bt = out.beta.triple * grad_scale;
  const ModelFamily fam = model.family();
  const int dim = model.dim();
  const auto mix = model.mix_weight();

  std::vector<double> d_ha(h_a.size(), 0.0);
  std::vector<double> d_ra(r_a.size(), 0.0);
  for (std::size_t i = 0; i < d_ha.size(); ++i) d_ha[i] += be * dx_entity[i];
  for (std::size_t j = 0; j < d_ra.size(); ++j) d_ra[j] += br * dx_relation[j];
  std::vector<double> dz(z_a.size());
  for (std::size_t i = 0; i < dz.size(); ++i) dz[i] = bt * dx_pair[i];
  compose_backward(fam, dim, h_a, r_a, mix, dz, d_ha, d_ra, {});
  score_backward(fam, dim, h_a, r, t, mix, be * ds_entity, d_ha, {}, {}, {});
  score_backward(fam, dim, h, r_a, t, mix, br * ds_relation, {}, d_ra, {}, {});
  score_backward(fam, dim, h_a, r_a, t, mix, bt * ds_pair, d_ha, d_ra, {}, {});

  // h_a = v^E * h + w M u,  u = v^R * r
  const auto de = static_cast<std::size_t>(params.entity_width);
  const auto dr = static_cast<std::size_t>(params.relation_width);
  const double w = params.ent_rel_weight;
  auto g_ve = grad->entity.row(triple.head);
  for (std::size_t i = 0; i < de; ++i) g_ve[i] += d_ha[i] * h[i];
  std::vector<double> d_u = d_ra;
  if (w != 0.0) {
    for (std::size_t i = 0; i < de; ++i) {
      const double gi = w * d_ha[i];
      if (gi == 0.0) continue;
      for (std::size_t j = 0; j < dr; ++j) {
        grad->transform[i * dr + j] += gi * fw.relation_scaled[j];
        d_u[j] += gi * params.transform[i * dr + j];
      }
    }
  }
  auto g_vr = grad->relation.row(triple.relation);
  for (std::size_t j = 0; j < dr; ++j) g_vr[j] += d_u[j] * r[j];
  return out;
}

double mean_total_loss(const EmbeddingModel& model, const AnalogyParams& params, const TripleStore& store,
                       const AnalogyCache& cache, const AnalogyTrainConfig& config) {
  if (cache.size() != store.train.size()) throw std::invalid_argument("cache does not cover the train split");
  if (store.train.empty()) return 0.0;
  std::vector<double> losses(store.train.size());
  parallel_for(store.train.size(), [&](std::size_t i) {
    losses[i] = total_loss(model, params, cache.entry(i), store.train[i], config).total;
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(losses.size());
}

AnalogyParams train_analogy(const EmbeddingModel& model, const TripleStore& store, const AnalogyCache& cache,
                            const AnalogyTrainConfig& config, double ent_rel_weight,
                            const std::function<void(const AnalogyEpochStats&)>& on_epoch) {
  if (!(config.gamma > 0.0) || !(config.learning_rate > 0.0) || config.epochs < 0 || config.batch_size < 1) {
    throw std::invalid_argument("invalid analogy training configuration");
  }
  if (cache.size() != store.train.size()) throw std::invalid_argument("cache does not cover the train split");
  AnalogyParams params = AnalogyParams::identity(model, ent_rel_weight);
  if (config.epochs == 0 || store.train.empty()) return params;

  const AdamOptions adam{config.learning_rate};
  Adam entity_opt(params.entity_projection.size(), adam);
  Adam relation_opt(params.relation_projection.size(), adam);
  Adam transform_opt(params.transform.size(), adam);
  std::vector<double> entity_grad(params.entity_projection.size());
  std::vector<double> relation_grad(params.relation_projection.size());
  std::vector<double> transform_grad(params.transform.size());
  std::vector<AnalogyGrad> chunk_grads(kChunks, AnalogyGrad(params));
  std::vector<double> chunk_loss(kChunks);

  std::vector<std::size_t> order(store.train.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch_size = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(epoch) + 0x4a3bULL)));
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
      const std::size_t end = std::min(order.size(), begin + batch_size);
      const std::size_t count = end - begin;
      const double scale = 1.0 / static_cast<double>(count);
      parallel_for(kChunks, [&](std::size_t c) {
        AnalogyGrad& g = chunk_grads[c];
        g.clear();
        chunk_loss[c] = 0.0;
        const std::size_t lo = begin + count * c / kChunks;
        const std::size_t hi = begin + count * (c + 1) / kChunks;
        for (std::size_t pos = lo; pos < hi; ++pos) {
          const std::size_t idx = order[pos];
          chunk_loss[c] += total_loss(model, params, cache.entry(idx), store.train[idx], config, &g, scale).total;
        }
      });
      double batch_loss = 0.0;
      std::fill(entity_grad.begin(), entity_grad.end(), 0.0);
      std::fill(relation_grad.begin(), relation_grad.end(), 0.0);
      std::fill(transform_grad.begin(), transform_grad.end(), 0.0);
      for (std::size_t c = 0; c < kChunks; ++c) {
        batch_loss += chunk_loss[c];
        chunk_grads[c].entity.add_to_dense(entity_grad);
        chunk_grads[c].relation.add_to_dense(relation_grad);
        for (std::size_t i = 0; i < transform_grad.size(); ++i) transform_grad[i] += chunk_grads[c].transform[i];
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("analogy training diverged: non-finite loss at epoch " + std::to_string(epoch));
      }
      epoch_loss += batch_loss;
      entity_opt.step(params.entity_projection, entity_grad);
      relation_opt.step(params.relation_projection, relation_grad);
      transform_opt.step(params.transform, transform_grad);
    }
    if (on_epoch) {
      const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
      on_epoch({epoch, epoch_loss / static_cast<double>(order.size()), wall.count()});
    }
  }
  return params;
}

void save_analogy_params(const AnalogyParams& params, const std::filesystem::path& path,
                         const AnalogyParamsMeta& meta) {
  Manifest m{std::string(kAnalogyParamsMagic)};
  m.set("version", 1);
  m.set("base_checkpoint_digest", meta.base_checkpoint_digest);
  m.set("cache_digest", meta.cache_digest);
  m.set("entities", params.num_entities);
  m.set("relations", params.num_relations);
  m.set("entity_width", params.entity_width);
  m.set("relation_width", params.relation_width);
  m.set("ent_rel_weight", format_double(params.ent_rel_weight));
  m.set("similarity", std::string(to_string(meta.similarity)));
  m.set("params_digest", to_hex(params.digest()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write analogy parameters " + path.string());
  m.write(out);
  write_f64(out, params.entity_projection);
  write_f64(out, params.relation_projection);
  write_f64(out, params.transform);
  if (!out) throw DataError("failed writing analogy parameters " + path.string());
}

AnalogyParams load_analogy_params(const std::filesystem::path& path, AnalogyParamsMeta* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open analogy parameters " + path.string());
  const std::string what = "analogy parameters " + path.string();
  Manifest m = Manifest::read(in, kAnalogyParamsMagic);
  if (m.get_int("version") != 1) throw DataError(what + ": unsupported version");
  AnalogyParams p;
  const auto ne = m.get_int("entities");
  const auto nr = m.get_int("relations");
  const auto de = m.get_int("entity_width");
  const auto dr = m.get_int("relation_width");
  if (ne <= 0 || nr <= 0 || de <= 0 || dr <= 0 || ne > INT32_MAX || nr > INT32_MAX || de > INT32_MAX ||
      dr > INT32_MAX) {
    throw DataError(what + ": invalid shape");
  }
  p.num_entities = static_cast<std::int32_t>(ne);
  p.num_relations = static_cast<std::int32_t>(nr);
  p.entity_width = static_cast<int>(de);
  p.relation_width = static_cast<int>(dr);
  p.ent_rel_weight = m.get_double("ent_rel_weight");
  p.entity_projection.resize(static_cast<std::size_t>(ne * de));
  p.relation_projection.resize(static_cast<std::size_t>(nr * dr));
  p.transform.resize(static_cast<std::size_t>(de * dr));
  read_f64(in, p.entity_projection, what);
  read_f64(in, p.relation_projection, what);
  read_f64(in, p.transform, what);
  expect_eof(in, what);
  if (m.get("params_digest") != to_hex(p.digest())) throw DataError(what + ": parameter digest mismatch");
  if (meta != nullptr) {
    meta->base_checkpoint_digest = m.get("base_checkpoint_digest");
    meta->cache_digest = m.get("cache_digest");
    meta->similarity = parse_similarity(m.get("similarity"));
  }
  return p;
}

}  // namespace ankge
