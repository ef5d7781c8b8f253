#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ankge {

/// Text header shared by every binary artifact:
///
///   <magic>
///   key value
///   ...
///   end
///
/// followed by a little-endian payload.
class Manifest {
 public:
  explicit Manifest(std::string magic = {}) : magic_(std::move(magic)) {}

  const std::string& magic() const { return magic_; }
  void set(std::string key, std::string value);
  void set(std::string key, std::int64_t value) { set(std::move(key), std::to_string(value)); }
  bool has(std::string_view key) const;
  const std::string& get(std::string_view key) const;
  std::int64_t get_int(std::string_view key) const;
  double get_double(std::string_view key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& out) const;
  /// Throws DataError if the magic differs or the header is malformed.
  static Manifest read(std::istream& in, std::string_view expected_magic);
  /// Reads just the header of a file, whatever its magic.
  static Manifest peek(const std::filesystem::path& path);

 private:
  std::string magic_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

void write_f64(std::ostream& out, std::span<const double> values);
void read_f64(std::istream& in, std::span<double> values, std::string_view what);
void write_i32(std::ostream& out, std::int32_t value);
std::int32_t read_i32(std::istream& in, std::string_view what);
/// Throws DataError if bytes remain after the payload.
void expect_eof(std::istream& in, std::string_view what);

/// Round-trippable decimal text for a double.
std::string format_double(double value);

}  // namespace ankge
