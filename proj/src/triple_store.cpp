#include "ankge/triple_store.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "ankge/digest.hpp"
#include "ankge/errors.hpp"

namespace ankge {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Triple> dedup_split(std::vector<Triple> triples, std::string_view split) {
  std::set<Triple> seen;
  std::vector<Triple> kept;
  kept.reserve(triples.size());
  std::size_t dropped = 0;
  for (const Triple& t : triples) {
    if (seen.insert(t).second) {
      kept.push_back(t);
    } else {
      ++dropped;
    }
  }
  if (dropped > 0) {
    std::cerr << "warning: dropped " << dropped << " duplicate triple(s) from " << split << "\n";
  }
  return kept;
}

void check_in_range(const TripleStore& store, std::span<const Triple> split, std::string_view name) {
  for (const Triple& t : split) {
    if (t.head < 0 || t.head >= store.num_entities() || t.tail < 0 || t.tail >= store.num_entities() ||
        t.relation < 0 || t.relation >= store.num_relations()) {
      throw DataError("triple id out of vocabulary range in " + std::string(name));
    }
  }
}

}  // namespace

std::vector<RawTriple> parse_triples(std::string_view text, std::string_view source) {
  std::vector<RawTriple> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
      std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw DataError(std::string(source) + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    out.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2])});
  }
  if (out.empty()) throw DataError(std::string(source) + ": no triples");
  return out;
}

std::vector<RawTriple> load_triples(const std::filesystem::path& path) {
  return parse_triples(read_file(path), path.string());
}

std::int32_t Vocabulary::intern(std::string_view name) {
  auto [it, inserted] = ids_.try_emplace(std::string(name), static_cast<std::int32_t>(names_.size()));
  if (inserted) names_.emplace_back(name);
  return it->second;
}

std::optional<std::int32_t> Vocabulary::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t TripleStore::digest() const {
  Digest d;
  d.update_u64(static_cast<std::uint64_t>(entities.size()));
  for (const auto& n : entities.names()) {
    d.update(n);
    d.update_u64(0);
  }
  d.update_u64(static_cast<std::uint64_t>(relations.size()));
  for (const auto& n : relations.names()) {
    d.update(n);
    d.update_u64(0);
  }
  for (const auto* split : {&train, &valid, &test}) {
    d.update_u64(split->size());
    for (const Triple& t : *split) {
      d.update_u64(pair_key(t.head, t.relation));
      d.update_u64(static_cast<std::uint32_t>(t.tail));
    }
  }
  d.update_u64(augmented ? 1 : 0);
  d.update_u64(static_cast<std::uint64_t>(raw_relation_count));
  return d.value();
}

TripleStore build_store(std::span<const RawTriple> train, std::span<const RawTriple> valid,
                        std::span<const RawTriple> test) {
  TripleStore store;
  auto ingest = [&store](std::span<const RawTriple> raw) {
    std::vector<Triple> out;
    out.reserve(raw.size());
    for (const RawTriple& r : raw) {
      Triple t;
      t.head = store.entities.intern(r.head);
      t.relation = store.relations.intern(r.relation);
      t.tail = store.entities.intern(r.tail);
      out.push_back(t);
    }
    return out;
  };
  store.train = dedup_split(ingest(train), "train");
  store.valid = dedup_split(ingest(valid), "valid");
  store.test = dedup_split(ingest(test), "test");
  store.raw_relation_count = store.relations.size();
  return store;
}

TripleStore augment_reverse(TripleStore store) {
  if (store.augmented) throw std::logic_error("triple store is already reverse-augmented");
  const std::int32_t raw = store.relations.size();
  for (std::int32_t r = 0; r < raw; ++r) {
    std::string name = store.relations.name(r) + std::string(kReverseSuffix);
    if (store.relations.find(name)) throw DataError("relation name collides with reverse marker: " + name);
    store.relations.intern(name);
  }
  for (auto* split : {&store.train, &store.valid, &store.test}) {
    const std::size_t n = split->size();
    split->reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const Triple t = (*split)[i];
      split->push_back({t.tail, t.relation + raw, t.head});
    }
  }
  store.raw_relation_count = raw;
  store.augmented = true;
  return store;
}

TripleStore load_dataset(const std::filesystem::path& dir) {
  auto train = load_triples(dir / "train.txt");
  auto valid = load_triples(dir / "valid.txt");
  auto test = load_triples(dir / "test.txt");
  return augment_reverse(build_store(train, valid, test));
}

void write_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::int32_t i = 0; i < vocab.size(); ++i) out << i << '\t' << vocab.name(i) << '\n';
}

namespace {

Vocabulary read_vocabulary(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::istringstream in(text);
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(path.string() + ":" + std::to_string(line_no) + ": missing tab");
    std::int32_t id = std::stoi(line.substr(0, tab));
    if (id != vocab.size() || vocab.intern(line.substr(tab + 1)) != id) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": ids must be dense and unique");
    }
  }
  return vocab;
}

void write_id_triples(std::span<const Triple> triples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const Triple& t : triples) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
}

std::vector<Triple> read_id_triples(const std::filesystem::path& path) {
  std::vector<Triple> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  Triple t;
  while (in >> t.head >> t.relation >> t.tail) out.push_back(t);
  if (!in.eof()) throw DataError(path.string() + ": malformed id triple");
  return out;
}

}  // namespace

void save_store(const TripleStore& store, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_vocabulary(store.entities, dir / "entities.tsv");
  write_vocabulary(store.relations, dir / "relations.tsv");
  write_id_triples(store.train, dir / "train.ids");
  write_id_triples(store.valid, dir / "valid.ids");
  write_id_triples(store.test, dir / "test.ids");
  std::ofstream meta(dir / "store.meta");
  meta << "augmented " << (store.augmented ? 1 : 0) << "\nraw_relations " << store.raw_relation_count << "\n";
}

TripleStore load_store(const std::filesystem::path& dir) {
  TripleStore store;
  store.entities = read_vocabulary(dir / "entities.tsv");
  store.relations = read_vocabulary(dir / "relations.tsv");
  store.train = read_id_triples(dir / "train.ids");
  store.valid = read_id_triples(dir / "valid.ids");
  store.test = read_id_triples(dir / "test.ids");
  std::ifstream meta(dir / "store.meta");
  std::string key;
  int augmented = 0;
  if (!(meta >> key >> augmented) || key != "augmented" || !(meta >> key >> store.raw_relation_count) ||
      key != "raw_relations") {
    throw DataError((dir / "store.meta").string() + ": malformed");
  }
  store.augmented = augmented != 0;
  check_in_range(store, store.train, "train");
  check_in_range(store, store.valid, "valid");
  check_in_range(store, store.test, "test");
  return store;
}

FilterIndex::FilterIndex(const TripleStore& store) {
  if (!store.augmented) throw std::logic_error("filter index requires a reverse-augmented store");
  for (const auto* split : {&store.train, &store.valid, &store.test}) {
    for (const Triple& t : *split) tails_[pair_key(t.head, t.relation)].push_back(t.tail);
  }
  for (auto& [key, tails] : tails_) {
    std::sort(tails.begin(), tails.end());
    tails.erase(std::unique(tails.begin(), tails.end()), tails.end());
  }
}

std::span<const EntityId> FilterIndex::tails(EntityId head, RelationId relation) const {
  auto it = tails_.find(pair_key(head, relation));
  if (it == tails_.end()) return {};
  return it->second;
}

bool FilterIndex::contains(EntityId head, RelationId relation, EntityId tail) const {
  auto t = tails(head, relation);
  return std::binary_search(t.begin(), t.end(), tail);
}

CountIndex::CountIndex(const TripleStore& store) : t_(static_cast<std::size_t>(store.num_entities()), 0) {
  if (!store.augmented) throw std::logic_error("count index requires a reverse-augmented store");
  for (const Triple& t : store.train) {
    ++rt_[pair_key(t.relation, t.tail)];
    ++ht_[pair_key(t.head, t.tail)];
    ++t_[static_cast<std::size_t>(t.tail)];
  }
}

std::int64_t CountIndex::rt_count(RelationId relation, EntityId tail) const {
  auto it = rt_.find(pair_key(relation, tail));
  return it == rt_.end() ? 0 : it->second;
}

std::int64_t CountIndex::ht_count(EntityId head, EntityId tail) const {
  auto it = ht_.find(pair_key(head, tail));
  return it == ht_.end() ? 0 : it->second;
}

std::int64_t CountIndex::t_count(EntityId tail) const {
  if (tail < 0 || static_cast<std::size_t>(tail) >= t_.size()) return 0;
  return t_[static_cast<std::size_t>(tail)];
}

std::int64_t CountIndex::rt_total() const {
  std::int64_t s = 0;
  for (const auto& [k, v] : rt_) s += v;
  return s;
}

std::int64_t CountIndex::ht_total() const {
  std::int64_t s = 0;
  for (const auto& [k, v] : ht_) s += v;
  return s;
}

std::int64_t CountIndex::t_total() const {
  std::int64_t s = 0;
  for (auto v : t_) s += v;
  return s;
}

}  // namespace ankge
