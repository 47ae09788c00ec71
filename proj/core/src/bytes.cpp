#include "threatmesh/bytes.hpp"

namespace threatmesh {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

std::string hex_encode(const std::uint8_t* data, std::size_t len) {
  std::string out;
  out.reserve(len * 2);
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back(kHexDigits[data[i] >> 4]);
    out.push_back(kHexDigits[data[i] & 0x0f]);
  }
  return out;
}

std::string hex_encode(const Bytes& b) { return hex_encode(b.data(), b.size()); }
std::string hex_encode(const Digest& d) { return hex_encode(d.data(), d.size()); }

Bytes hex_decode(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw Error(ErrorCode::malformed_encoding, "odd-length hex string");
  }
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = hex_nibble(hex[i]);
    const int lo = hex_nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::malformed_encoding, "invalid hex digit");
    }
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

Digest digest_from_hex(std::string_view hex) {
  const Bytes b = hex_decode(hex);
  if (b.size() != 32) {
    throw Error(ErrorCode::malformed_encoding, "digest must be 32 bytes");
  }
  Digest d;
  std::memcpy(d.data(), b.data(), 32);
  return d;
}

Bytes digest_bytes(const Digest& d) { return Bytes(d.begin(), d.end()); }

Digest digest_from_bytes(const Bytes& b) {
  if (b.size() != 32) {
    throw Error(ErrorCode::malformed_encoding, "digest must be 32 bytes");
  }
  Digest d;
  std::memcpy(d.data(), b.data(), 32);
  return d;
}

void ByteWriter::u16(std::uint16_t v) {
  buf_.push_back(static_cast<std::uint8_t>(v >> 8));
  buf_.push_back(static_cast<std::uint8_t>(v));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

void ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

void ByteWriter::raw(const std::uint8_t* data, std::size_t len) {
  buf_.insert(buf_.end(), data, data + len);
}

void ByteWriter::var_bytes(const Bytes& b) {
  u32(static_cast<std::uint32_t>(b.size()));
  raw(b);
}

void ByteWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void ByteReader::need(std::size_t n) const {
  if (pos_ + n > len_) {
    throw Error(ErrorCode::malformed_encoding, "truncated record");
  }
}

std::uint8_t ByteReader::u8() {
  need(1);
  return data_[pos_++];
}

std::uint16_t ByteReader::u16() {
  need(2);
  std::uint16_t v = (static_cast<std::uint16_t>(data_[pos_]) << 8) | data_[pos_ + 1];
  pos_ += 2;
  return v;
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + i];
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_ + i];
  pos_ += 8;
  return v;
}

Bytes ByteReader::raw(std::size_t n) {
  need(n);
  Bytes out(data_ + pos_, data_ + pos_ + n);
  pos_ += n;
  return out;
}

Digest ByteReader::digest32() {
  need(32);
  Digest d;
  std::memcpy(d.data(), data_ + pos_, 32);
  pos_ += 32;
  return d;
}

Bytes ByteReader::var_bytes() {
  const std::uint32_t n = u32();
  return raw(n);
}

std::string ByteReader::str() {
  const std::uint32_t n = u32();
  need(n);
  std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
  pos_ += n;
  return s;
}

void ByteReader::expect_end() const {
  if (!empty()) {
    throw Error(ErrorCode::malformed_encoding, "trailing bytes after record");
  }
}

}  // namespace threatmesh
