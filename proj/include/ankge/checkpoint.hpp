#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "ankge/manifest.hpp"
#include "ankge/model.hpp"

namespace ankge {

inline constexpr std::string_view kBaseCheckpointMagic = "ANKGE-BASE-CHECKPOINT";
inline constexpr int kCheckpointVersion = 1;

/// Upstream provenance written into the manifest.
struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::string store_digest;
};

/// Manifest (version, family, entities, relations, dim, seed, store digest,
/// value counts) followed by little-endian f64 rows: entity table, stored
/// relation table, then the HAKE mix weight.
void save_checkpoint(const EmbeddingModel& model, const std::filesystem::path& path, const CheckpointMeta& meta = {});

/// Throws DataError on version mismatch, truncation, or a payload whose size
/// disagrees with the declared family and shape.
EmbeddingModel load_checkpoint(const std::filesystem::path& path, Manifest* manifest = nullptr);

}  // namespace ankge
