#include "ankge/checkpoint.hpp"

#include <fstream>

#include "ankge/digest.hpp"
#include "ankge/errors.hpp"

namespace ankge {

void save_checkpoint(const EmbeddingModel& model, const std::filesystem::path& path, const CheckpointMeta& meta) {
  Manifest m{std::string(kBaseCheckpointMagic)};
  m.set("version", kCheckpointVersion);
  m.set("family", std::string(to_string(model.family())));
  m.set("entities", model.num_entities());
  m.set("relations", model.num_relations());
  m.set("dim", model.dim());
  m.set("seed", std::to_string(meta.seed));
  m.set("store_digest", meta.store_digest.empty() ? std::string("none") : meta.store_digest);
  m.set("model_digest", to_hex(model.digest()));
  m.set("entity_values", static_cast<std::int64_t>(model.entity_params().size()));
  m.set("relation_values", static_cast<std::int64_t>(model.relation_params().size()));
  m.set("mix_values", static_cast<std::int64_t>(model.mix_params().size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  m.write(out);
  write_f64(out, model.entity_params());
  write_f64(out, model.relation_params());
  write_f64(out, model.mix_params());
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

EmbeddingModel load_checkpoint(const std::filesystem::path& path, Manifest* manifest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  const std::string what = "checkpoint " + path.string();
  Manifest m = Manifest::read(in, kBaseCheckpointMagic);
  if (m.get_int("version") != kCheckpointVersion) {
    throw DataError(what + ": unsupported version " + m.get("version"));
  }
  ModelFamily family{};
  try {
    family = parse_family(m.get("family"));
  } catch (const std::invalid_argument& e) {
    throw DataError(what + ": " + e.what());
  }
  const auto entities = m.get_int("entities");
  const auto relations = m.get_int("relations");
  const auto dim = m.get_int("dim");
  if (entities <= 0 || relations <= 0 || dim <= 0 || entities > INT32_MAX || relations > INT32_MAX ||
      dim > INT32_MAX) {
    throw DataError(what + ": invalid shape");
  }
  EmbeddingModel model(family, static_cast<std::int32_t>(entities), static_cast<std::int32_t>(relations),
                       static_cast<int>(dim));
  if (m.get_int("entity_values") != static_cast<std::int64_t>(model.entity_params().size()) ||
      m.get_int("relation_values") != static_cast<std::int64_t>(model.relation_params().size()) ||
      m.get_int("mix_values") != static_cast<std::int64_t>(model.mix_params().size())) {
    throw DataError(what + ": payload sizes do not match family " + m.get("family") + " at the declared shape");
  }
  read_f64(in, model.entity_params(), what);
  read_f64(in, model.relation_params(), what);
  read_f64(in, model.mix_params(), what);
  expect_eof(in, what);
  model.refresh();
  if (m.has("model_digest") && m.get("model_digest") != to_hex(model.digest())) {
    throw DataError(what + ": parameter digest mismatch");
  }
  if (manifest != nullptr) *manifest = std::move(m);
  return model;
}

}  // namespace ankge
