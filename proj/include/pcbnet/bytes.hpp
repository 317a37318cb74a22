#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <pcbnet/errors.hpp>

namespace pcbnet::detail {

// Little-endian byte packing shared by the binary file formats.

inline void put_u16_le(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

inline void put_u32_le(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
  }
}

inline void put_u64_le(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
  }
}

inline void put_f32_le(std::vector<unsigned char>& out, float v) {
  put_u32_le(out, std::bit_cast<std::uint32_t>(v));
}

inline void put_f64_le(std::vector<unsigned char>& out, double v) {
  put_u64_le(out, std::bit_cast<std::uint64_t>(v));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  }
  return v;
}

inline std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  }
  return v;
}

// Sequential reader that reports truncation with the failing byte offset.
class ByteCursor {
public:
  ByteCursor(const unsigned char* data, std::size_t size, std::string what)
      : data_(data), size_(size), what_(std::move(what)) {}

  std::size_t position() const noexcept { return pos_; }
  bool at_end() const noexcept { return pos_ == size_; }

  const unsigned char* take(std::size_t n) {
    if (size_ - pos_ < n) {
      throw FormatError(what_ + " truncated", pos_);
    }
    const unsigned char* p = data_ + pos_;
    pos_ += n;
    return p;
  }

  std::uint8_t u8() { return *take(1); }
  std::uint16_t u16() {
    const unsigned char* p = take(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t u32() { return get_u32_le(take(4)); }
  std::uint64_t u64() { return get_u64_le(take(8)); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

private:
  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string what_;
};

}  // namespace pcbnet::detail
