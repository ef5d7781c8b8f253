#include "ankge/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "ankge/digest.hpp"
#include "ankge/errors.hpp"
#include "ankge/manifest.hpp"

namespace ankge {

namespace {

struct BaseRow {
  int dim;
  double margin;
  double temperature;
  int negatives;
  int batch;
};

struct AnalogyRow {
  int ne, nr, nt;
  double alpha_e, alpha_r, alpha_t;
};

// Published settings, indexed [profile][family] in ModelFamily order.
constexpr BaseRow kBaseRows[2][4] = {
    {{500, 9.0, 1.0, 256, 1024}, {500, 9.0, 1.0, 256, 1024}, {1000, 9.0, 1.0, 512, 1024}, {1500, 6.0, 1.0, 256, 1024}},
    {{500, 6.0, 1.0, 256, 2048}, {500, 6.0, 0.5, 1024, 512}, {500, 6.0, 0.5, 1024, 512}, {500, 6.0, 0.5, 1024, 512}},
};

constexpr AnalogyRow kAnalogyRows[2][4] = {
    {{1, 1, 3, 0.01, 0.2, 0.02}, {1, 1, 5, 0.01, 0.2, 0.05}, {1, 1, 5, 0.05, 0.3, 0.1}, {1, 1, 3, 0.01, 0.3, 0.05}},
    {{1, 1, 20, 0.01, 0.3, 0.3}, {1, 1, 3, 0.1, 0.05, 0.1}, {1, 1, 3, 0.1, 0.05, 0.1}, {1, 1, 3, 0.1, 0.05, 0.2}},
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::string show(double v) { return format_double(v); }
std::string show(bool v) { return v ? "true" : "false"; }

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define ANKGE_INT_FIELD(name, member)                                                                      \
  Field {                                                                                                  \
    name, [](RunConfig& c, const std::string& v) { c.member = parse_number<decltype(c.member)>(name, v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }                                        \
  }
#define ANKGE_REAL_FIELD(name, member)                                                               \
  Field {                                                                                            \
    name, [](RunConfig& c, const std::string& v) { c.member = parse_number<double>(name, v); },      \
        [](const RunConfig& c) { return show(c.member); }                                            \
  }
#define ANKGE_BOOL_FIELD(name, member)                                                               \
  Field {                                                                                            \
    name, [](RunConfig& c, const std::string& v) { c.member = parse_bool(name, v); },                \
        [](const RunConfig& c) { return show(c.member); }                                            \
  }
#define ANKGE_PATH_FIELD(name, member)                                                               \
  Field {                                                                                            \
    name, [](RunConfig& c, const std::string& v) { c.member = v; },                                  \
        [](const RunConfig& c) { return c.member.string(); }                                         \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"profile", [](RunConfig& c, const std::string& v) { c.profile = parse_profile(v); },
            [](const RunConfig& c) { return std::string(to_string(c.profile)); }},
      Field{"family", [](RunConfig& c, const std::string& v) { c.family = parse_family(v); },
            [](const RunConfig& c) { return std::string(to_string(c.family)); }},
      ANKGE_PATH_FIELD("data_dir", data_dir),
      ANKGE_PATH_FIELD("train_file", train_file),
      ANKGE_PATH_FIELD("valid_file", valid_file),
      ANKGE_PATH_FIELD("test_file", test_file),
      ANKGE_PATH_FIELD("out", out_dir),
      ANKGE_INT_FIELD("seed", seed),
      ANKGE_INT_FIELD("threads", threads),
      ANKGE_INT_FIELD("dim", base.dim),
      ANKGE_REAL_FIELD("margin", base.margin),
      ANKGE_REAL_FIELD("adversarial_temperature", base.adversarial_temperature),
      ANKGE_INT_FIELD("negative_samples", base.negative_samples),
      ANKGE_INT_FIELD("batch_size", base.batch_size),
      ANKGE_REAL_FIELD("learning_rate", base.learning_rate),
      ANKGE_INT_FIELD("epochs", base.epochs),
      ANKGE_INT_FIELD("entity_top_k", retriever.entity_top_k),
      ANKGE_INT_FIELD("relation_top_k", retriever.relation_top_k),
      ANKGE_INT_FIELD("pair_top_k", retriever.pair_top_k),
      ANKGE_INT_FIELD("entity_preselect", retriever.entity_preselect),
      ANKGE_INT_FIELD("relation_preselect", retriever.relation_preselect),
      ANKGE_BOOL_FIELD("exclude_original", retriever.exclude_original),
      ANKGE_REAL_FIELD("gamma", analogy.gamma),
      ANKGE_REAL_FIELD("analogy_learning_rate", analogy.learning_rate),
      ANKGE_INT_FIELD("analogy_epochs", analogy.epochs),
      ANKGE_INT_FIELD("analogy_batch_size", analogy.batch_size),
      Field{"similarity", [](RunConfig& c, const std::string& v) { c.analogy.similarity = parse_similarity(v); },
            [](const RunConfig& c) { return std::string(to_string(c.analogy.similarity)); }},
      ANKGE_REAL_FIELD("ent_rel_weight", ent_rel_weight),
      ANKGE_REAL_FIELD("alpha_entity", inference.alpha_entity),
      ANKGE_REAL_FIELD("alpha_relation", inference.alpha_relation),
      ANKGE_REAL_FIELD("alpha_triple", inference.alpha_triple),
      ANKGE_BOOL_FIELD("adaptive", inference.adaptive),
  };
  return table;
}

#undef ANKGE_INT_FIELD
#undef ANKGE_REAL_FIELD
#undef ANKGE_BOOL_FIELD
#undef ANKGE_PATH_FIELD

}  // namespace

std::string_view to_string(Profile profile) {
  switch (profile) {
    case Profile::FB15k237: return "fb15k-237";
    case Profile::WN18RR: return "wn18rr";
    case Profile::Custom: return "custom";
  }
  return "custom";
}

Profile parse_profile(std::string_view name) {
  if (name == "fb15k-237") return Profile::FB15k237;
  if (name == "wn18rr") return Profile::WN18RR;
  if (name == "custom") return Profile::Custom;
  throw std::invalid_argument("unknown profile: " + std::string(name));
}

std::filesystem::path RunConfig::train_path() const { return train_file.empty() ? data_dir / "train.txt" : train_file; }
std::filesystem::path RunConfig::valid_path() const { return valid_file.empty() ? data_dir / "valid.txt" : valid_file; }
std::filesystem::path RunConfig::test_path() const { return test_file.empty() ? data_dir / "test.txt" : test_file; }

RunConfig default_config(Profile profile, ModelFamily family) {
  RunConfig c;
  c.profile = profile;
  c.family = family;
  const int p = profile == Profile::WN18RR ? 1 : 0;
  const int f = static_cast<int>(family);
  const BaseRow& b = kBaseRows[p][f];
  c.base.dim = b.dim;
  c.base.margin = b.margin;
  c.base.adversarial_temperature = b.temperature;
  c.base.negative_samples = b.negatives;
  c.base.batch_size = b.batch;
  c.base.learning_rate = 1e-4;
  c.base.epochs = 100;

  const AnalogyRow& a = kAnalogyRows[p][f];
  c.retriever.entity_top_k = a.ne;
  c.retriever.relation_top_k = a.nr;
  c.retriever.pair_top_k = a.nt;
  c.inference.entity_top_k = a.ne;
  c.inference.relation_top_k = a.nr;
  c.inference.pair_top_k = a.nt;
  c.inference.alpha_entity = a.alpha_e;
  c.inference.alpha_relation = a.alpha_r;
  c.inference.alpha_triple = a.alpha_t;

  c.analogy.gamma = 10.0;
  c.analogy.learning_rate = 1e-4;
  c.analogy.epochs = 10;
  c.analogy.batch_size = 1024;
  c.ent_rel_weight = p == 1 ? 0.0 : 1.0;
  if (profile == Profile::WN18RR && family == ModelFamily::TransE) {
    c.inference.adaptive = false;
    c.analogy.similarity = Similarity::Cosine;
  }
  return c;
}

std::map<std::string, std::string> parse_key_values(std::string_view text, std::string_view source) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(std::string(source) + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(std::string(source) + ":" + std::to_string(line_no) + ": empty key");
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

RunConfig make_config(const std::map<std::string, std::string>& values) {
  Profile profile = Profile::FB15k237;
  ModelFamily family = ModelFamily::HAKE;
  if (auto it = values.find("profile"); it != values.end()) profile = parse_profile(it->second);
  if (auto it = values.find("family"); it != values.end()) family = parse_family(it->second);
  RunConfig c = default_config(profile, family);
  for (const auto& [key, value] : values) {
    bool known = false;
    for (const Field& f : fields()) {
      if (f.key == key) {
        f.set(c, value);
        known = true;
        break;
      }
    }
    if (!known) throw std::invalid_argument("unknown config key '" + key + "'");
  }
  // Retrieval sizes double as the adaptive-weight denominators.
  c.inference.entity_top_k = c.retriever.entity_top_k;
  c.inference.relation_top_k = c.retriever.relation_top_k;
  c.inference.pair_top_k = c.retriever.pair_top_k;
  c.base.seed = c.seed;
  c.analogy.seed = c.seed;
  return c;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const Field& f : fields()) k.push_back(f.key);
    return k;
  }();
  return keys;
}

std::string echo_config(const RunConfig& config) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

std::string config_digest(const RunConfig& config) {
  Digest d;
  for (const Field& f : fields()) {
    if (f.key == "out" || f.key == "threads") continue;
    d.update(f.key);
    d.update("=");
    d.update(f.get(config));
    d.update("\n");
  }
  return d.hex();
}

}  // namespace ankge
