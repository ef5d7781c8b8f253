#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "ankge/config.hpp"
#include "ankge/errors.hpp"
#include "ankge/pipeline.hpp"
#include "ankge/synthetic.hpp"

namespace fs = std::filesystem;
using namespace ankge;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StageOptions {
  std::string config_file;
  std::map<std::string, std::string> overrides;
};

void add_config_options(CLI::App* cmd, StageOptions& opts) {
  cmd->add_option("--config", opts.config_file, "key = value config file")->check(CLI::ExistingFile);
  for (const auto& key : config_keys()) {
    cmd->add_option_function<std::string>(
           "--" + key, [&opts, key](const std::string& v) { opts.overrides[key] = v; }, "override '" + key + "'")
        ->group("Config overrides");
  }
}

RunConfig resolve(const StageOptions& opts) {
  std::map<std::string, std::string> values;
  if (!opts.config_file.empty()) values = read_config_file(opts.config_file);
  for (const auto& [k, v] : opts.overrides) values[k] = v;
  try {
    RunConfig config = make_config(values);
    for (const fs::path& p : {config.train_path(), config.valid_path(), config.test_path()}) {
      if (!fs::exists(p)) throw DataError("missing dataset file " + p.string());
    }
    return config;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

fs::path require_file(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw DataError(std::string("missing ") + what + " " + p.string());
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analogy-enhanced knowledge graph embedding"};
  app.require_subcommand(1);

  StageOptions train_opts, retrieve_opts, ankge_opts, eval_opts;
  std::string checkpoint, cache, analogy;

  auto* train = app.add_subcommand("train-base", "train the base embedding model");
  add_config_options(train, train_opts);

  auto* retrieve = app.add_subcommand("retrieve", "retrieve analogical objects for every training triple");
  add_config_options(retrieve, retrieve_opts);
  retrieve->add_option("--checkpoint", checkpoint, "base checkpoint (default <out>/base.ckpt)");

  auto* ankge = app.add_subcommand("train-ankge", "train the analogy functions");
  add_config_options(ankge, ankge_opts);
  ankge->add_option("--checkpoint", checkpoint, "base checkpoint (default <out>/base.ckpt)");
  ankge->add_option("--cache", cache, "analogy cache (default <out>/analogy.cache)");

  auto* eval = app.add_subcommand("evaluate", "filtered tail ranking on the test split");
  add_config_options(eval, eval_opts);
  eval->add_option("--checkpoint", checkpoint, "base checkpoint (default <out>/base.ckpt)");
  eval->add_option("--analogy", analogy, "analogy parameters; omit for base-only evaluation");

  std::vector<std::string> artifacts;
  auto* info = app.add_subcommand("info", "print artifact manifests");
  info->add_option("files", artifacts, "checkpoint, cache or analogy parameter files")->required();

  SyntheticSpec spec;
  std::string generate_out = "data";
  auto* generate = app.add_subcommand("generate", "write a synthetic dataset");
  generate->add_option("--out", generate_out, "output directory");
  generate->add_option("--seed", spec.seed);
  generate->add_option("--types", spec.num_types);
  generate->add_option("--entities-per-type", spec.entities_per_type);
  generate->add_option("--relation-families", spec.relation_families);
  generate->add_option("--relations-per-family", spec.relations_per_family);
  generate->add_option("--fanout", spec.fanout);
  generate->add_option("--sibling-offset", spec.sibling_offset);
  generate->add_option("--drop-rate", spec.drop_rate);
  generate->add_option("--noise", spec.noise);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  auto or_default = [](const std::string& given, const fs::path& fallback) {
    return given.empty() ? fallback : fs::path(given);
  };

  try {
    if (*train) {
      cmd_train_base(resolve(train_opts), std::cout);
    } else if (*retrieve) {
      RunConfig config = resolve(retrieve_opts);
      cmd_retrieve(config, require_file(or_default(checkpoint, StagePaths::checkpoint(config)), "checkpoint"),
                   std::cout);
    } else if (*ankge) {
      RunConfig config = resolve(ankge_opts);
      cmd_train_ankge(config, require_file(or_default(checkpoint, StagePaths::checkpoint(config)), "checkpoint"),
                      require_file(or_default(cache, StagePaths::cache(config)), "cache"), std::cout);
    } else if (*eval) {
      RunConfig config = resolve(eval_opts);
      std::optional<fs::path> params;
      if (!analogy.empty()) params = require_file(analogy, "analogy parameters");
      cmd_evaluate(config, require_file(or_default(checkpoint, StagePaths::checkpoint(config)), "checkpoint"),
                   params, std::cout);
    } else if (*info) {
      for (const auto& f : artifacts) cmd_info(require_file(f, "artifact"), std::cout);
    } else if (*generate) {
      write_splits(generate_synthetic(spec), generate_out);
      std::cout << "wrote " << generate_out << "/{train,valid,test}.txt\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
