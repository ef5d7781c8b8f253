#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ankge/analogy.hpp"
#include "ankge/base_training.hpp"
#include "ankge/evaluation.hpp"
#include "ankge/model.hpp"
#include "ankge/retriever.hpp"

namespace ankge {

/// Hyper-parameter presets. The two benchmark profiles carry the published
/// per-family settings; `custom` starts from the fb15k-237 values.
enum class Profile { FB15k237, WN18RR, Custom };

std::string_view to_string(Profile profile);
Profile parse_profile(std::string_view name);

struct RunConfig {
  std::filesystem::path data_dir;
  std::filesystem::path train_file;  // empty: data_dir / "train.txt"
  std::filesystem::path valid_file;
  std::filesystem::path test_file;
  std::filesystem::path out_dir = "run";
  Profile profile = Profile::FB15k237;
  ModelFamily family = ModelFamily::HAKE;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  BaseTrainConfig base;
  RetrieverConfig retriever;
  AnalogyTrainConfig analogy;
  double ent_rel_weight = 1.0;
  InferenceConfig inference;

  std::filesystem::path train_path() const;
  std::filesystem::path valid_path() const;
  std::filesystem::path test_path() const;
};

/// Defaults for a profile and family; see the table in README.md.
RunConfig default_config(Profile profile, ModelFamily family);

/// Parses "key = value" lines; '#' starts a comment. Throws
/// std::invalid_argument with the line number on malformed input.
std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view source);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Builds a config from key-values: profile and family pick the defaults,
/// every other key overrides one field. Unknown keys throw.
RunConfig make_config(const std::map<std::string, std::string>& values);

/// Every settable key, in echo order.
const std::vector<std::string>& config_keys();

/// The effective config as "key = value" lines, parseable by make_config.
std::string echo_config(const RunConfig& config);

/// Hash of the echoed config excluding out_dir and threads.
std::string config_digest(const RunConfig& config);

}  // namespace ankge
