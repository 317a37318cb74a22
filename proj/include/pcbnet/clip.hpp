#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <pcbnet/bytes.hpp>
#include <pcbnet/errors.hpp>
#include <pcbnet/tensor.hpp>

namespace pcbnet {

// A fixed-depth grayscale frame volume with its binary label: 1 = Suspicious,
// 0 = Normal. source_id names the originating sample (e.g. "SB_17").
struct Clip {
  Tensorf frames;  // [depth][height][width], values in [0, 1]
  int label = 0;
  std::string source_id;
  bool flipped = false;
};

// Uniform temporal subsampling of an [L][H][W] volume down to `depth` frames
// by source index floor(i * L / depth). Segments shorter than the depth are
// rejected unless loop_pad wraps them cyclically.
template <typename T>
Tensor<T> temporal_sample(const Tensor<T>& segment, std::size_t depth, bool loop_pad = false) {
  if (segment.rank() != 3) {
    throw ShapeError("temporal_sample expects [L][H][W], got " + dims_to_string(segment.dims()));
  }
  if (depth == 0) {
    throw ShapeError("temporal_sample depth must be positive");
  }
  const std::size_t length = segment.dim(0);
  const std::size_t height = segment.dim(1);
  const std::size_t width = segment.dim(2);
  if (length < depth && !loop_pad) {
    throw SegmentTooShortError(length, depth);
  }
  Tensor<T> out({depth, height, width});
  const std::size_t plane = height * width;
  for (std::size_t i = 0; i < depth; ++i) {
    const std::size_t src =
        length >= depth ? (i * length) / depth : i % length;
    std::memcpy(out.data() + i * plane, segment.data() + src * plane, plane * sizeof(T));
  }
  return out;
}

// Mirrors every frame across the vertical axis and toggles the flipped flag.
// Applying it twice restores the original clip bitwise.
inline Clip flip_horizontal(const Clip& clip) {
  Clip out;
  out.label = clip.label;
  out.source_id = clip.source_id;
  out.flipped = !clip.flipped;
  out.frames = Tensorf(clip.frames.dims());
  const std::size_t depth = clip.frames.dim(0);
  const std::size_t height = clip.frames.dim(1);
  const std::size_t width = clip.frames.dim(2);
  const float* src = clip.frames.data();
  float* dst = out.frames.data();
  for (std::size_t d = 0; d < depth; ++d) {
    for (std::size_t y = 0; y < height; ++y) {
      const std::size_t base = (d * height + y) * width;
      for (std::size_t x = 0; x < width; ++x) {
        dst[base + x] = src[base + (width - 1 - x)];
      }
    }
  }
  return out;
}

// Clip file layout (little-endian): magic "PCB1", u32 depth, u32 height,
// u32 width, u8 dtype (0 = 32-bit float), then depth*height*width floats in
// (d, h, w) row-major order.
namespace clip_format {
inline constexpr char kMagic[4] = {'P', 'C', 'B', '1'};
inline constexpr std::size_t kMagicOffset = 0;
inline constexpr std::size_t kDepthOffset = 4;
inline constexpr std::size_t kDtypeOffset = 16;
inline constexpr std::size_t kPayloadOffset = 17;
inline constexpr std::uint8_t kDtypeF32 = 0;
}  // namespace clip_format

inline std::vector<unsigned char> encode_clip(const Tensorf& frames) {
  if (frames.rank() != 3) {
    throw ShapeError("clip tensor must be [D][H][W], got " + dims_to_string(frames.dims()));
  }
  std::vector<unsigned char> out;
  out.reserve(clip_format::kPayloadOffset + frames.element_count() * 4);
  out.insert(out.end(), clip_format::kMagic, clip_format::kMagic + 4);
  detail::put_u32_le(out, static_cast<std::uint32_t>(frames.dim(0)));
  detail::put_u32_le(out, static_cast<std::uint32_t>(frames.dim(1)));
  detail::put_u32_le(out, static_cast<std::uint32_t>(frames.dim(2)));
  out.push_back(clip_format::kDtypeF32);
  const std::size_t payload_bytes = frames.element_count() * 4;
  const std::size_t header = out.size();
  out.resize(header + payload_bytes);
  std::memcpy(out.data() + header, frames.data(), payload_bytes);
  return out;
}

inline Tensorf decode_clip(const std::vector<unsigned char>& bytes) {
  using namespace clip_format;
  if (bytes.size() < kPayloadOffset) {
    throw FormatError("clip file truncated before payload", bytes.size());
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("bad clip magic", kMagicOffset);
  }
  const std::uint32_t depth = detail::get_u32_le(bytes.data() + kDepthOffset);
  const std::uint32_t height = detail::get_u32_le(bytes.data() + kDepthOffset + 4);
  const std::uint32_t width = detail::get_u32_le(bytes.data() + kDepthOffset + 8);
  if (depth == 0 || height == 0 || width == 0) {
    throw FormatError("clip header has a zero extent", kDepthOffset);
  }
  if (bytes[kDtypeOffset] != kDtypeF32) {
    throw FormatError("unsupported clip dtype " + std::to_string(bytes[kDtypeOffset]),
                      kDtypeOffset);
  }
  const std::uint64_t elems =
      std::uint64_t{depth} * std::uint64_t{height} * std::uint64_t{width};
  const std::uint64_t expected = kPayloadOffset + elems * 4;
  if (bytes.size() != expected) {
    throw FormatError("clip payload holds " + std::to_string(bytes.size() - kPayloadOffset) +
                          " bytes, header implies " + std::to_string(elems * 4),
                      kPayloadOffset);
  }
  Tensorf frames({depth, height, width});
  std::memcpy(frames.data(), bytes.data() + kPayloadOffset, elems * 4);
  return frames;
}

inline void write_clip(const std::filesystem::path& path, const Tensorf& frames) {
  const std::vector<unsigned char> bytes = encode_clip(frames);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open clip file for writing: " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("failed writing clip file: " + path.string());
  }
}

inline Tensorf read_clip(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open clip file: " + path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return decode_clip(bytes);
}

}  // namespace pcbnet
