#include "ankge/synthetic.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "ankge/errors.hpp"

namespace ankge {

SyntheticSplits generate_synthetic(const SyntheticSpec& spec) {
  if (spec.num_types < 1 || spec.entities_per_type < 2 || spec.relation_families < 1 ||
      spec.relations_per_family < 1 || spec.fanout < 1 || spec.fanout > spec.entities_per_type) {
    throw std::invalid_argument("invalid synthetic graph specification");
  }
  std::mt19937_64 rng(spec.seed);
  const int per = spec.entities_per_type;
  auto entity_name = [per](int type, int pos) {
    return "t" + std::to_string(type) + "_e" + std::to_string(((pos % per) + per) % per);
  };

  std::set<std::tuple<std::string, std::string, std::string>> edges;
  std::uniform_int_distribution<int> pick_type(0, spec.num_types - 1);
  std::uniform_int_distribution<int> pick_pos(0, per - 1);
  std::uniform_int_distribution<int> pick_stride(1, 3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int f = 0; f < spec.relation_families; ++f) {
    const int src = pick_type(rng);
    const int dst = pick_type(rng);
    const int stride = pick_stride(rng);
    const int base_shift = pick_pos(rng);
    for (int k = 0; k < spec.relations_per_family; ++k) {
      const std::string rel = "f" + std::to_string(f) + "_r" + std::to_string(k);
      const int shift = base_shift + k * spec.sibling_offset;
      for (int i = 0; i < per; ++i) {
        for (int j = 0; j < spec.fanout; ++j) {
          if (unit(rng) < spec.drop_rate) continue;
          int pos = i * stride + shift + j;
          if (unit(rng) < spec.noise) pos = pick_pos(rng);
          edges.emplace(entity_name(src, i), rel, entity_name(dst, pos));
        }
      }
    }
  }

  std::vector<RawTriple> all;
  for (const auto& [h, r, t] : edges) all.push_back({h, r, t});
  std::shuffle(all.begin(), all.end(), rng);

  const auto n = all.size();
  const auto n_test = static_cast<std::size_t>(spec.test_fraction * static_cast<double>(n));
  const auto n_valid = static_cast<std::size_t>(spec.valid_fraction * static_cast<double>(n));
  SyntheticSplits out;
  std::unordered_set<std::string> seen_entities, seen_relations;
  std::vector<RawTriple> held;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_test + n_valid) {
      held.push_back(all[i]);
    } else {
      out.train.push_back(all[i]);
      seen_entities.insert(all[i].head);
      seen_entities.insert(all[i].tail);
      seen_relations.insert(all[i].relation);
    }
  }
  // Held-out triples whose symbols never occur in train go back to train.
  std::size_t placed = 0;
  for (const RawTriple& t : held) {
    const bool known = seen_entities.contains(t.head) && seen_entities.contains(t.tail) &&
                       seen_relations.contains(t.relation);
    if (!known) {
      out.train.push_back(t);
    } else if (placed++ < n_test) {
      out.test.push_back(t);
    } else {
      out.valid.push_back(t);
    }
  }
  if (out.train.empty() || out.test.empty() || out.valid.empty()) {
    throw std::invalid_argument("synthetic graph too small to split");
  }
  return out;
}

void write_splits(const SyntheticSplits& splits, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto dump = [&](const std::vector<RawTriple>& triples, const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    for (const auto& t : triples) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
  };
  dump(splits.train, "train.txt");
  dump(splits.valid, "valid.txt");
  dump(splits.test, "test.txt");
}

}  // namespace ankge
