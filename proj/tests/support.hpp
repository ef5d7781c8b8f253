#pragma once

#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ankge/model.hpp"
#include "gradcheck.hpp"
#include "ankge/triple_store.hpp"

namespace test {

using gradcheck::max_relative_error;
using gradcheck::random_vector;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ankge_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline ankge::TripleStore toy_store(const std::vector<ankge::RawTriple>& train,
                                    const std::vector<ankge::RawTriple>& valid = {},
                                    const std::vector<ankge::RawTriple>& test = {}) {
  return ankge::augment_reverse(ankge::build_store(train, valid, test));
}

// Small connected KG: 5 entities, 2 relations, 8 triples.
inline std::vector<ankge::RawTriple> toy_triples() {
  return {{"a", "likes", "b"}, {"b", "likes", "c"}, {"c", "likes", "d"}, {"d", "likes", "e"},
          {"a", "knows", "c"}, {"b", "knows", "d"}, {"c", "knows", "e"}, {"e", "knows", "a"}};
}

}  // namespace test
