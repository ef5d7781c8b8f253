#include "ankge/pipeline.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

#include "ankge/checkpoint.hpp"
#include "ankge/digest.hpp"
#include "ankge/errors.hpp"
#include "ankge/parallel.hpp"

namespace ankge {

namespace {

void prepare_out_dir(const RunConfig& config) {
  std::filesystem::create_directories(config.out_dir);
  std::ofstream echo(config.out_dir / "config.txt", std::ios::binary | std::ios::trunc);
  echo << echo_config(config);
  thread_limit().store(config.threads);
}

// Writes through a temporary name so a failed stage leaves no partial file.
template <typename Writer>
void write_atomically(const std::filesystem::path& path, Writer&& write) {
  auto tmp = path;
  tmp += ".tmp";
  try {
    write(tmp);
    std::filesystem::rename(tmp, path);
  } catch (...) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    throw;
  }
}

EmbeddingModel load_checked_checkpoint(const std::filesystem::path& checkpoint, const TripleStore& store) {
  Manifest manifest;
  EmbeddingModel model = load_checkpoint(checkpoint, &manifest);
  if (manifest.get("store_digest") != to_hex(store.digest())) {
    throw DataError("checkpoint " + checkpoint.string() + " was trained on a different dataset");
  }
  return model;
}

}  // namespace

TripleStore load_run_dataset(const RunConfig& config) {
  auto train = load_triples(config.train_path());
  auto valid = load_triples(config.valid_path());
  auto test = load_triples(config.test_path());
  return augment_reverse(build_store(train, valid, test));
}

std::filesystem::path cmd_train_base(const RunConfig& config, std::ostream& progress) {
  validate(config.base);
  TripleStore store = load_run_dataset(config);
  prepare_out_dir(config);
  write_vocabulary(store.entities, config.out_dir / "entities.tsv");
  write_vocabulary(store.relations, config.out_dir / "relations.tsv");

  std::ofstream log(config.out_dir / "train_base.log", std::ios::binary | std::ios::trunc);
  log << "epoch\tloss\twall_seconds\n";
  progress << "training " << to_string(config.family) << " on " << store.train.size() << " triples, "
           << store.num_entities() << " entities, " << store.num_relations() << " relations\n";
  EmbeddingModel model = train_base(store, config.family, config.base, [&](const EpochStats& s) {
    progress << "epoch " << s.epoch << " loss " << std::setprecision(6) << s.mean_loss << '\n';
    log << s.epoch << '\t' << format_double(s.mean_loss) << '\t' << s.wall_seconds << '\n';
  });

  const auto path = StagePaths::checkpoint(config);
  write_atomically(path, [&](const std::filesystem::path& tmp) {
    save_checkpoint(model, tmp, {config.seed, to_hex(store.digest())});
  });
  progress << "wrote " << path.string() << '\n';
  return path;
}

std::filesystem::path cmd_retrieve(const RunConfig& config, const std::filesystem::path& checkpoint,
                                   std::ostream& progress) {
  TripleStore store = load_run_dataset(config);
  EmbeddingModel model = load_checked_checkpoint(checkpoint, store);
  prepare_out_dir(config);
  progress << "retrieving analogical objects for " << store.train.size() << " triples\n";
  AnalogyCache cache = build_cache(model, store, config.retriever);
  cache.checkpoint_digest = file_digest(checkpoint);
  cache.store_digest = to_hex(store.digest());
  const auto path = StagePaths::cache(config);
  write_atomically(path, [&](const std::filesystem::path& tmp) { save_cache(cache, tmp); });
  progress << "wrote " << path.string() << '\n';
  return path;
}

std::filesystem::path cmd_train_ankge(const RunConfig& config, const std::filesystem::path& checkpoint,
                                      const std::filesystem::path& cache_path, std::ostream& progress) {
  TripleStore store = load_run_dataset(config);
  EmbeddingModel model = load_checked_checkpoint(checkpoint, store);
  AnalogyCache cache = load_cache(cache_path);
  const std::string checkpoint_digest = file_digest(checkpoint);
  if (cache.checkpoint_digest != checkpoint_digest) {
    throw DataError("cache " + cache_path.string() + " was built from a different checkpoint");
  }
  if (cache.store_digest != to_hex(store.digest()) || cache.size() != store.train.size()) {
    throw DataError("cache " + cache_path.string() + " was built from a different dataset");
  }
  prepare_out_dir(config);

  const std::uint64_t before = model.digest();
  std::ofstream log(config.out_dir / "train_ankge.log", std::ios::binary | std::ios::trunc);
  log << "epoch\tloss\twall_seconds\n";
  AnalogyParams params =
      train_analogy(model, store, cache, config.analogy, config.ent_rel_weight, [&](const AnalogyEpochStats& s) {
        progress << "analogy epoch " << s.epoch << " loss " << std::setprecision(6) << s.mean_loss << '\n';
        log << s.epoch << '\t' << format_double(s.mean_loss) << '\t' << s.wall_seconds << '\n';
      });
  if (model.digest() != before) throw std::logic_error("base model changed during analogy training");

  const auto path = StagePaths::analogy(config);
  write_atomically(path, [&](const std::filesystem::path& tmp) {
    save_analogy_params(params, tmp, {checkpoint_digest, file_digest(cache_path), config.analogy.similarity});
  });
  progress << "wrote " << path.string() << '\n';
  return path;
}

EvalReport cmd_evaluate(const RunConfig& config, const std::filesystem::path& checkpoint,
                        const std::optional<std::filesystem::path>& analogy, std::ostream& progress) {
  TripleStore store = load_run_dataset(config);
  EmbeddingModel model = load_checked_checkpoint(checkpoint, store);
  std::optional<AnalogyParams> params;
  std::vector<std::pair<std::string, std::string>> metadata = {
      {"config_digest", config_digest(config)},
      {"checkpoint_digest", file_digest(checkpoint)},
  };
  if (analogy) {
    AnalogyParamsMeta meta;
    params = load_analogy_params(*analogy, &meta);
    if (meta.base_checkpoint_digest != file_digest(checkpoint)) {
      throw DataError("analogy parameters " + analogy->string() + " belong to a different checkpoint");
    }
    metadata.emplace_back("analogy_digest", file_digest(*analogy));
  } else {
    metadata.emplace_back("analogy_digest", "none");
  }
  prepare_out_dir(config);
  progress << "evaluating " << store.test.size() << " test queries\n";
  EvalReport report = evaluate(model, params ? &*params : nullptr, store, config.inference);
  write_metrics(report, StagePaths::metrics(config), metadata);
  write_ranks_csv(report, store, StagePaths::ranks(config));
  progress << std::fixed << std::setprecision(6) << "mrr " << report.ankge.mrr << " hits@1 " << report.ankge.hits1
           << " hits@3 " << report.ankge.hits3 << " hits@10 " << report.ankge.hits10 << " (base mrr "
           << report.base.mrr << ")\n";
  progress.unsetf(std::ios::fixed);
  return report;
}

void cmd_info(const std::filesystem::path& artifact, std::ostream& out) {
  const Manifest m = Manifest::peek(artifact);
  out << artifact.string() << ": " << m.magic() << '\n';
  for (const auto& [k, v] : m.entries()) out << "  " << k << ' ' << v << '\n';
  out << "  file_digest " << file_digest(artifact) << '\n';
}

}  // namespace ankge
