#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "threatmesh/error.hpp"

namespace threatmesh {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(const Bytes& b) {
  return std::string(b.begin(), b.end());
}

std::string hex_encode(const std::uint8_t* data, std::size_t len);
std::string hex_encode(const Bytes& b);
std::string hex_encode(const Digest& d);
Bytes hex_decode(std::string_view hex);
Digest digest_from_hex(std::string_view hex);
Bytes digest_bytes(const Digest& d);
Digest digest_from_bytes(const Bytes& b);

// Big-endian, length-prefixed canonical encoding. Signatures and content
// hashes cover these bytes, so the layout is fixed: integers big-endian,
// variable fields prefixed with a u32 length.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void raw(const std::uint8_t* data, std::size_t len);
  void raw(const Bytes& b) { raw(b.data(), b.size()); }
  void raw(const Digest& d) { raw(d.data(), d.size()); }
  void var_bytes(const Bytes& b);
  void str(std::string_view s);

  const Bytes& data() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t len) : data_(data), len_(len) {}
  explicit ByteReader(const Bytes& b) : ByteReader(b.data(), b.size()) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  Bytes raw(std::size_t n);
  Digest digest32();
  Bytes var_bytes();
  std::string str();

  std::size_t remaining() const { return len_ - pos_; }
  bool empty() const { return pos_ == len_; }
  void expect_end() const;

 private:
  void need(std::size_t n) const;
  const std::uint8_t* data_;
  std::size_t len_;
  std::size_t pos_ = 0;
};

}  // namespace threatmesh
