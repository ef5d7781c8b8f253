#include "ankge/digest.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <vector>

#include "ankge/errors.hpp"

namespace ankge {

void Digest::update(std::span<const std::byte> bytes) {
  for (std::byte b : bytes) {
    state_ ^= static_cast<std::uint64_t>(b);
    state_ *= 0x100000001b3ULL;
  }
}

void Digest::update(std::string_view text) {
  update(std::as_bytes(std::span(text.data(), text.size())));
}

void Digest::update(std::span<const double> values) {
  for (double v : values) update_u64(std::bit_cast<std::uint64_t>(v));
}

void Digest::update_u64(std::uint64_t value) {
  std::byte buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<std::byte>((value >> (8 * i)) & 0xff);
  update(std::span<const std::byte>(buf, 8));
}

std::string Digest::hex() const { return to_hex(state_); }

std::string to_hex(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string() + " for hashing");
  Digest d;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    d.update(std::as_bytes(std::span(buf.data(), got)));
  }
  return d.hex();
}

}  // namespace ankge
