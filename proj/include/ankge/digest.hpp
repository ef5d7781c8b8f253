#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace ankge {

/// Incremental 64-bit FNV-1a hash. Used to tie artifacts to their upstream
/// inputs, not for anything adversarial.
class Digest {
 public:
  void update(std::span<const std::byte> bytes);
  void update(std::string_view text);
  void update(std::span<const double> values);
  void update_u64(std::uint64_t value);

  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t value);
std::string file_digest(const std::filesystem::path& path);

}  // namespace ankge
