#include "ankge/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "ankge/digest.hpp"
#include "ankge/errors.hpp"
#include "ankge/parallel.hpp"

namespace ankge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_width(std::span<const double> v, int expected, const char* what) {
  if (static_cast<int>(v.size()) != expected) {
    throw std::invalid_argument(std::string(what) + " has width " + std::to_string(v.size()) + ", expected " +
                                std::to_string(expected));
  }
}

void add_to(std::span<double> out, std::size_t i, double v) {
  if (!out.empty()) out[i] += v;
}

}  // namespace

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) { return -softplus(-x); }

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::TransE: return "TransE";
    case ModelFamily::RotatE: return "RotatE";
    case ModelFamily::HAKE: return "HAKE";
    case ModelFamily::PairRE: return "PairRE";
  }
  throw std::invalid_argument("unknown model family");
}

ModelFamily parse_family(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "transe") return ModelFamily::TransE;
  if (lower == "rotate") return ModelFamily::RotatE;
  if (lower == "hake") return ModelFamily::HAKE;
  if (lower == "pairre") return ModelFamily::PairRE;
  throw std::invalid_argument("unknown model family: " + std::string(name));
}

RowLayout row_layout(ModelFamily family, int dim) {
  if (dim <= 0) throw std::invalid_argument("dimension must be positive");
  switch (family) {
    case ModelFamily::TransE: return {dim, dim, dim};
    case ModelFamily::RotatE: return {2 * dim, dim, 2 * dim};
    case ModelFamily::HAKE: return {2 * dim, 2 * dim, 2 * dim};
    case ModelFamily::PairRE: return {dim, 2 * dim, dim};
  }
  throw std::invalid_argument("unknown model family");
}

TailScorer::TailScorer(ModelFamily family, int dim, std::span<const double> mix_weight)
    : family_(family), dim_(dim), mix_(mix_weight), a_(static_cast<std::size_t>(dim)), b_(static_cast<std::size_t>(dim)) {
  row_layout(family, dim);
}

void TailScorer::reset(std::span<const double> h, std::span<const double> r) {
  const RowLayout lay = row_layout(family_, dim_);
  check_width(h, lay.entity, "head");
  check_width(r, lay.relation, "relation");
  const auto k = static_cast<std::size_t>(dim_);
  switch (family_) {
    case ModelFamily::TransE:
      for (std::size_t i = 0; i < k; ++i) a_[i] = h[i] + r[i];
      break;
    case ModelFamily::RotatE:
      for (std::size_t i = 0; i < k; ++i) {
        const double c = std::cos(r[i]);
        const double s = std::sin(r[i]);
        a_[i] = h[i] * c - h[k + i] * s;
        b_[i] = h[i] * s + h[k + i] * c;
      }
      break;
    case ModelFamily::HAKE:
      for (std::size_t i = 0; i < k; ++i) {
        a_[i] = h[i] * r[i];
        b_[i] = h[k + i] + r[k + i];
      }
      break;
    case ModelFamily::PairRE:
      for (std::size_t i = 0; i < k; ++i) {
        a_[i] = h[i] * r[i];
        b_[i] = r[k + i];
      }
      break;
  }
}

double TailScorer::operator()(std::span<const double> t) const {
  const auto k = static_cast<std::size_t>(dim_);
  switch (family_) {
    case ModelFamily::TransE: {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += std::abs(a_[i] - t[i]);
      return -s;
    }
    case ModelFamily::RotatE: {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double dr = a_[i] - t[i];
        const double di = b_[i] - t[k + i];
        s += dr * dr + di * di;
      }
      return -std::sqrt(s);
    }
    case ModelFamily::HAKE: {
      double m = 0.0;
      double p = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double d = a_[i] - t[i];
        m += d * d;
        p += std::abs(mix_[i] * std::sin((b_[i] - t[k + i]) / 2.0));
      }
      return -std::sqrt(m) - p;
    }
    case ModelFamily::PairRE: {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += std::abs(a_[i] - t[i] * b_[i]);
      return -s;
    }
  }
  return 0.0;
}

double score(ModelFamily family, int dim, std::span<const double> head, std::span<const double> relation,
             std::span<const double> tail, std::span<const double> mix_weight) {
  check_width(tail, row_layout(family, dim).entity, "tail");
  if (family == ModelFamily::HAKE) check_width(mix_weight, dim, "mix weight");
  TailScorer scorer(family, dim, mix_weight);
  scorer.reset(head, relation);
  return scorer(tail);
}

void score_backward(ModelFamily family, int dim, std::span<const double> h, std::span<const double> r,
                    std::span<const double> t, std::span<const double> mix, double up, std::span<double> dh,
                    std::span<double> dr, std::span<double> dt, std::span<double> dmix) {
  const auto k = static_cast<std::size_t>(dim);
  switch (family) {
    case ModelFamily::TransE:
      for (std::size_t i = 0; i < k; ++i) {
        const double s = sign(h[i] + r[i] - t[i]) * up;
        add_to(dh, i, -s);
        add_to(dr, i, -s);
        add_to(dt, i, s);
      }
      break;
    case ModelFamily::RotatE: {
      thread_local std::vector<double> re, im, ddr, ddi;
      re.resize(k);
      im.resize(k);
      ddr.resize(k);
      ddi.resize(k);
      double norm2 = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double c = std::cos(r[i]);
        const double s = std::sin(r[i]);
        re[i] = h[i] * c - h[k + i] * s;
        im[i] = h[i] * s + h[k + i] * c;
        ddr[i] = re[i] - t[i];
        ddi[i] = im[i] - t[k + i];
        norm2 += ddr[i] * ddr[i] + ddi[i] * ddi[i];
      }
      const double norm = std::sqrt(norm2);
      if (norm == 0.0) break;
      for (std::size_t i = 0; i < k; ++i) {
        // f = -norm; df/d(rotated) = -diff / norm
        const double gr = -ddr[i] / norm * up;
        const double gi = -ddi[i] / norm * up;
        const double c = std::cos(r[i]);
        const double s = std::sin(r[i]);
        add_to(dh, i, gr * c + gi * s);
        add_to(dh, k + i, -gr * s + gi * c);
        add_to(dr, i, -gr * im[i] + gi * re[i]);
        add_to(dt, i, -gr);
        add_to(dt, k + i, -gi);
      }
      break;
    }
    case ModelFamily::HAKE: {
      thread_local std::vector<double> diff;
      diff.resize(k);
      double norm2 = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        diff[i] = h[i] * r[i] - t[i];
        norm2 += diff[i] * diff[i];
      }
      const double norm = std::sqrt(norm2);
      for (std::size_t i = 0; i < k; ++i) {
        if (norm > 0.0) {
          const double g = -diff[i] / norm * up;
          add_to(dh, i, g * r[i]);
          add_to(dr, i, g * h[i]);
          add_to(dt, i, -g);
        }
        const double half = (h[k + i] + r[k + i] - t[k + i]) / 2.0;
        const double sn = std::sin(half);
        const double g = -sign(mix[i] * sn) * up;
        const double dhalf = g * mix[i] * std::cos(half) / 2.0;
        add_to(dh, k + i, dhalf);
        add_to(dr, k + i, dhalf);
        add_to(dt, k + i, -dhalf);
        add_to(dmix, i, g * sn);
      }
      break;
    }
    case ModelFamily::PairRE:
      for (std::size_t i = 0; i < k; ++i) {
        const double s = sign(h[i] * r[i] - t[i] * r[k + i]) * up;
        add_to(dh, i, -s * r[i]);
        add_to(dr, i, -s * h[i]);
        add_to(dt, i, s * r[k + i]);
        add_to(dr, k + i, s * t[i]);
      }
      break;
  }
}

void compose(ModelFamily family, int dim, std::span<const double> h, std::span<const double> r,
             std::span<const double> mix, std::span<double> out) {
  const RowLayout lay = row_layout(family, dim);
  check_width(h, lay.entity, "head");
  check_width(r, lay.relation, "relation");
  if (static_cast<int>(out.size()) != lay.composed) throw std::invalid_argument("compose output has wrong width");
  const auto k = static_cast<std::size_t>(dim);
  switch (family) {
    case ModelFamily::TransE:
      for (std::size_t i = 0; i < k; ++i) out[i] = h[i] + r[i];
      break;
    case ModelFamily::RotatE:
      for (std::size_t i = 0; i < k; ++i) {
        const double c = std::cos(r[i]);
        const double s = std::sin(r[i]);
        out[i] = h[i] * c - h[k + i] * s;
        out[k + i] = h[i] * s + h[k + i] * c;
      }
      break;
    case ModelFamily::HAKE:
      check_width(mix, dim, "mix weight");
      for (std::size_t i = 0; i < k; ++i) {
        out[i] = h[i] * r[i];
        out[k + i] = mix[i] * std::sin((h[k + i] + r[k + i]) / 2.0);
      }
      break;
    case ModelFamily::PairRE:
      for (std::size_t i = 0; i < k; ++i) out[i] = h[i] * r[i];
      break;
  }
}

void compose_backward(ModelFamily family, int dim, std::span<const double> h, std::span<const double> r,
                      std::span<const double> mix, std::span<const double> dz, std::span<double> dh,
                      std::span<double> dr, std::span<double> dmix) {
  const auto k = static_cast<std::size_t>(dim);
  switch (family) {
    case ModelFamily::TransE:
      for (std::size_t i = 0; i < k; ++i) {
        add_to(dh, i, dz[i]);
        add_to(dr, i, dz[i]);
      }
      break;
    case ModelFamily::RotatE:
      for (std::size_t i = 0; i < k; ++i) {
        const double c = std::cos(r[i]);
        const double s = std::sin(r[i]);
        const double re = h[i] * c - h[k + i] * s;
        const double im = h[i] * s + h[k + i] * c;
        add_to(dh, i, dz[i] * c + dz[k + i] * s);
        add_to(dh, k + i, -dz[i] * s + dz[k + i] * c);
        add_to(dr, i, -dz[i] * im + dz[k + i] * re);
      }
      break;
    case ModelFamily::HAKE:
      for (std::size_t i = 0; i < k; ++i) {
        add_to(dh, i, dz[i] * r[i]);
        add_to(dr, i, dz[i] * h[i]);
        const double half = (h[k + i] + r[k + i]) / 2.0;
        const double dhalf = dz[k + i] * mix[i] * std::cos(half) / 2.0;
        add_to(dh, k + i, dhalf);
        add_to(dr, k + i, dhalf);
        add_to(dmix, i, dz[k + i] * std::sin(half));
      }
      break;
    case ModelFamily::PairRE:
      for (std::size_t i = 0; i < k; ++i) {
        add_to(dh, i, dz[i] * r[i]);
        add_to(dr, i, dz[i] * h[i]);
      }
      break;
  }
}

EmbeddingModel::EmbeddingModel(ModelFamily family, std::int32_t num_entities, std::int32_t num_relations, int dim)
    : family_(family), dim_(dim), num_entities_(num_entities), num_relations_(num_relations),
      layout_(row_layout(family, dim)) {
  if (num_entities <= 0 || num_relations <= 0) {
    throw std::invalid_argument("a model needs at least one entity and one relation");
  }
  entities_.assign(static_cast<std::size_t>(num_entities) * static_cast<std::size_t>(layout_.entity), 0.0);
  relation_raw_.assign(static_cast<std::size_t>(num_relations) * static_cast<std::size_t>(layout_.relation), 0.0);
  relations_ = relation_raw_;
  if (family == ModelFamily::HAKE) mix_weight_.assign(static_cast<std::size_t>(dim), 0.0);
  refresh();
}

void EmbeddingModel::check_entity(EntityId id) const {
  if (id < 0 || id >= num_entities_) throw std::out_of_range("entity id " + std::to_string(id) + " out of range");
}

void EmbeddingModel::check_relation(RelationId id) const {
  if (id < 0 || id >= num_relations_) throw std::out_of_range("relation id " + std::to_string(id) + " out of range");
}

std::span<const double> EmbeddingModel::entity(EntityId id) const {
  check_entity(id);
  const auto w = static_cast<std::size_t>(layout_.entity);
  return std::span<const double>(entities_).subspan(static_cast<std::size_t>(id) * w, w);
}

std::span<const double> EmbeddingModel::relation(RelationId id) const {
  check_relation(id);
  const auto w = static_cast<std::size_t>(layout_.relation);
  return std::span<const double>(relations_).subspan(static_cast<std::size_t>(id) * w, w);
}

void EmbeddingModel::refresh() {
  relations_ = relation_raw_;
  if (family_ != ModelFamily::HAKE) return;
  const auto w = static_cast<std::size_t>(layout_.relation);
  const auto k = static_cast<std::size_t>(dim_);
  for (std::size_t row = 0; row < static_cast<std::size_t>(num_relations_); ++row) {
    for (std::size_t i = 0; i < k; ++i) relations_[row * w + i] = softplus(relation_raw_[row * w + i]);
  }
}

void EmbeddingModel::relation_grad_to_params(RelationId id, std::span<double> grad) const {
  check_relation(id);
  if (family_ != ModelFamily::HAKE) return;
  const auto w = static_cast<std::size_t>(layout_.relation);
  const std::size_t base = static_cast<std::size_t>(id) * w;
  for (std::size_t i = 0; i < static_cast<std::size_t>(dim_); ++i) grad[i] *= sigmoid(relation_raw_[base + i]);
}

double EmbeddingModel::score(std::span<const double> head, std::span<const double> relation,
                             std::span<const double> tail) const {
  return ankge::score(family_, dim_, head, relation, tail, mix_weight_);
}

double EmbeddingModel::score_triple(EntityId head, RelationId relation, EntityId tail) const {
  return score(entity(head), this->relation(relation), entity(tail));
}

std::vector<double> EmbeddingModel::score_tails(EntityId head, RelationId relation,
                                                std::span<const EntityId> tails) const {
  TailScorer scorer = tail_scorer();
  scorer.reset(entity(head), this->relation(relation));
  std::vector<double> out;
  out.reserve(tails.size());
  for (EntityId t : tails) out.push_back(scorer(entity(t)));
  return out;
}

std::vector<double> EmbeddingModel::score_all_tails(EntityId head, RelationId relation) const {
  return score_all_tails(entity(head), this->relation(relation));
}

std::vector<double> EmbeddingModel::score_all_tails(std::span<const double> head,
                                                    std::span<const double> relation) const {
  TailScorer scorer = tail_scorer();
  scorer.reset(head, relation);
  std::vector<double> out(static_cast<std::size_t>(num_entities_));
  const auto w = static_cast<std::size_t>(layout_.entity);
  std::span<const double> table(entities_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = scorer(table.subspan(i * w, w));
  return out;
}

std::vector<double> EmbeddingModel::compose(std::span<const double> head, std::span<const double> relation) const {
  std::vector<double> out(static_cast<std::size_t>(layout_.composed));
  ankge::compose(family_, dim_, head, relation, mix_weight_, out);
  return out;
}

std::uint64_t EmbeddingModel::digest() const {
  Digest d;
  d.update(to_string(family_));
  d.update_u64(static_cast<std::uint64_t>(dim_));
  d.update_u64(static_cast<std::uint64_t>(num_entities_));
  d.update_u64(static_cast<std::uint64_t>(num_relations_));
  d.update(std::span<const double>(entities_));
  d.update(std::span<const double>(relation_raw_));
  d.update(std::span<const double>(mix_weight_));
  return d.value();
}

EmbeddingModel init_model(ModelFamily family, std::int32_t num_entities, std::int32_t num_relations, int dim,
                          std::uint64_t seed, double range) {
  EmbeddingModel model(family, num_entities, num_relations, dim);
  if (range <= 0.0) range = (9.0 + 2.0) / dim;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> symmetric(-range, range);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  const auto k = static_cast<std::size_t>(dim);

  auto ent = model.entity_params();
  const auto ew = static_cast<std::size_t>(model.layout().entity);
  for (std::size_t row = 0; row < static_cast<std::size_t>(num_entities); ++row) {
    for (std::size_t i = 0; i < ew; ++i) {
      const bool is_phase = family == ModelFamily::HAKE && i >= k;
      ent[row * ew + i] = is_phase ? phase(rng) : symmetric(rng);
    }
  }

  auto rel = model.relation_params();
  const auto rw = static_cast<std::size_t>(model.layout().relation);
  const double unit_modulus = std::log(std::numbers::e - 1.0);  // softplus^-1(1)
  for (std::size_t row = 0; row < static_cast<std::size_t>(num_relations); ++row) {
    for (std::size_t i = 0; i < rw; ++i) {
      double v = 0.0;
      switch (family) {
        case ModelFamily::TransE:
        case ModelFamily::PairRE: v = symmetric(rng); break;
        case ModelFamily::RotatE: v = phase(rng); break;
        case ModelFamily::HAKE: v = i < k ? unit_modulus : phase(rng); break;
      }
      rel[row * rw + i] = v;
    }
  }
  for (double& m : model.mix_params()) m = 0.5;
  model.refresh();
  return model;
}

}  // namespace ankge
