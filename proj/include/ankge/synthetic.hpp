#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ankge/triple_store.hpp"

namespace ankge {

/// Generator for small knowledge graphs with shared structure. Entities are
/// split into typed groups laid out on a ring; each relation connects a source
/// type to a target type, sending the head at ring position i to the
/// `fanout` tails around (i * stride + shift). Relations are created in
/// families that share source/target types and differ only by a small shift,
/// so neighbouring heads and sibling relations reach overlapping tails.
struct SyntheticSpec {
  int num_types = 4;
  int entities_per_type = 40;
  int relation_families = 4;
  int relations_per_family = 3;
  int fanout = 3;
  // Ring shift between consecutive relations of a family; 0 makes siblings
  // share their tail sets and differ only through dropped edges.
  int sibling_offset = 1;
  // Fraction of generated edges dropped before splitting.
  double drop_rate = 0.3;
  // Fraction of edges rewired to a random tail of the target type.
  double noise = 0.05;
  double valid_fraction = 0.05;
  double test_fraction = 0.1;
  std::uint64_t seed = 1;
};

struct SyntheticSplits {
  std::vector<RawTriple> train;
  std::vector<RawTriple> valid;
  std::vector<RawTriple> test;
};

/// Every entity and relation of a valid/test triple also appears in train.
SyntheticSplits generate_synthetic(const SyntheticSpec& spec);

/// Writes train.txt / valid.txt / test.txt.
void write_splits(const SyntheticSplits& splits, const std::filesystem::path& dir);

}  // namespace ankge
