#include "ankge/manifest.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ankge/errors.hpp"

namespace ankge {

namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
  return out;
}

std::uint32_t to_le32(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xff) << 24) | ((v & 0xff00) << 8) | ((v >> 8) & 0xff00) | (v >> 24);
}

}  // namespace

void Manifest::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

bool Manifest::has(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

const std::string& Manifest::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw DataError(magic_ + ": manifest is missing key '" + std::string(key) + "'");
}

std::int64_t Manifest::get_int(std::string_view key) const {
  const std::string& v = get(key);
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw DataError(magic_ + ": manifest key '" + std::string(key) + "' is not an integer");
  }
  return out;
}

double Manifest::get_double(std::string_view key) const {
  const std::string& v = get(key);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw DataError(magic_ + ": manifest key '" + std::string(key) + "' is not a number");
  }
  return out;
}

void Manifest::write(std::ostream& out) const {
  out << magic_ << '\n';
  for (const auto& [k, v] : entries_) out << k << ' ' << v << '\n';
  out << "end\n";
}

Manifest Manifest::read(std::istream& in, std::string_view expected_magic) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty artifact, expected " + std::string(expected_magic));
  if (!expected_magic.empty() && line != expected_magic) {
    throw DataError("expected a " + std::string(expected_magic) + " file, found header '" + line.substr(0, 64) + "'");
  }
  Manifest m(line);
  for (int guard = 0; guard < 4096; ++guard) {
    if (!std::getline(in, line)) throw DataError(m.magic_ + ": truncated manifest");
    if (line == "end") return m;
    auto space = line.find(' ');
    if (space == std::string::npos) throw DataError(m.magic_ + ": malformed manifest line '" + line + "'");
    m.entries_.emplace_back(line.substr(0, space), line.substr(space + 1));
  }
  throw DataError(m.magic_ + ": manifest too long");
}

Manifest Manifest::peek(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read(in, {});
}

void write_f64(std::ostream& out, std::span<const double> values) {
  for (double v : values) {
    const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(v));
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

void read_f64(std::istream& in, std::span<double> values, std::string_view what) {
  for (double& v : values) {
    std::uint64_t bits = 0;
    if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) {
      throw DataError(std::string(what) + ": truncated payload");
    }
    v = std::bit_cast<double>(to_le(bits));
  }
}

void write_i32(std::ostream& out, std::int32_t value) {
  const std::uint32_t bits = to_le32(static_cast<std::uint32_t>(value));
  out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
}

std::int32_t read_i32(std::istream& in, std::string_view what) {
  std::uint32_t bits = 0;
  if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits)) throw DataError(std::string(what) + ": truncated payload");
  return static_cast<std::int32_t>(to_le32(bits));
}

void expect_eof(std::istream& in, std::string_view what) {
  if (in.peek() != std::char_traits<char>::eof()) throw DataError(std::string(what) + ": trailing bytes after payload");
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace ankge
