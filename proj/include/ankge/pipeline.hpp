#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "ankge/config.hpp"
#include "ankge/evaluation.hpp"

namespace ankge {

// Staged workflow behind the command-line tool. Each stage writes into
// config.out_dir, echoes the effective config there, and records the digests of
// its inputs so later stages can refuse mismatched artifacts (DataError).

struct StagePaths {
  static std::filesystem::path checkpoint(const RunConfig& c) { return c.out_dir / "base.ckpt"; }
  static std::filesystem::path cache(const RunConfig& c) { return c.out_dir / "analogy.cache"; }
  static std::filesystem::path analogy(const RunConfig& c) { return c.out_dir / "analogy.params"; }
  static std::filesystem::path metrics(const RunConfig& c) { return c.out_dir / "metrics.txt"; }
  static std::filesystem::path ranks(const RunConfig& c) { return c.out_dir / "ranks.csv"; }
};

/// Loads and reverse-augments the dataset named by the config.
TripleStore load_run_dataset(const RunConfig& config);

/// Trains the base model. Writes base.ckpt, train_base.log (epoch, loss,
/// wall seconds), entities.tsv, relations.tsv and config.txt. The checkpoint
/// is written only after training succeeds.
std::filesystem::path cmd_train_base(const RunConfig& config, std::ostream& progress);

/// Builds the analogy cache for a base checkpoint.
std::filesystem::path cmd_retrieve(const RunConfig& config, const std::filesystem::path& checkpoint,
                                   std::ostream& progress);

/// Trains the analogy functions; verifies the base parameters are unchanged.
std::filesystem::path cmd_train_ankge(const RunConfig& config, const std::filesystem::path& checkpoint,
                                      const std::filesystem::path& cache, std::ostream& progress);

/// Writes metrics.txt and ranks.csv. Without analogy parameters only the base
/// model is evaluated.
EvalReport cmd_evaluate(const RunConfig& config, const std::filesystem::path& checkpoint,
                        const std::optional<std::filesystem::path>& analogy, std::ostream& progress);

/// Prints the manifest of a checkpoint, cache or analogy parameter file.
void cmd_info(const std::filesystem::path& artifact, std::ostream& out);

}  // namespace ankge
