#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include <doctest.h>
#include <pcbnet/clip.hpp>
#include <pcbnet/errors.hpp>
#include <pcbnet/image.hpp>
#include <pcbnet/rng.hpp>
#include <pcbnet/tensor.hpp>

#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using pcbnet::Rng;
using pcbnet::Tensor;
using pcbnet::Tensorf;

TEST_CASE("grayscale: pure colors follow the luma weights") {
  Tensorf white({3, 2, 2}, 1.0f);
  auto gray = pcbnet::to_grayscale(white);
  REQUIRE(gray.dims() == std::vector<std::size_t>{2, 2});
  for (float v : gray.values()) {
    CHECK(v == doctest::Approx(1.0f).epsilon(1e-6));
  }

  Tensorf black({3, 2, 2}, 0.0f);
  for (float v : pcbnet::to_grayscale(black).values()) {
    CHECK(v == 0.0f);
  }

  Tensorf red({3, 1, 1});
  red(0, 0, 0) = 1.0f;
  CHECK(pcbnet::to_grayscale(red)(0, 0) == doctest::Approx(0.299f).epsilon(1e-6));
  Tensorf green({3, 1, 1});
  green(1, 0, 0) = 1.0f;
  CHECK(pcbnet::to_grayscale(green)(0, 0) == doctest::Approx(0.587f).epsilon(1e-6));
  Tensorf blue({3, 1, 1});
  blue(2, 0, 0) = 1.0f;
  CHECK(pcbnet::to_grayscale(blue)(0, 0) == doctest::Approx(0.114f).epsilon(1e-6));
}

TEST_CASE("grayscale: rejects bad shapes and out-of-range pixels") {
  Tensorf two_channel({2, 4, 4});
  CHECK_THROWS_AS(pcbnet::to_grayscale(two_channel), pcbnet::ShapeError);
  Tensorf flat({3, 4});
  CHECK_THROWS_AS(pcbnet::to_grayscale(flat), pcbnet::ShapeError);
  Tensorf hot({3, 2, 2}, 0.5f);
  hot(1, 1, 1) = 1.5f;
  CHECK_THROWS_WITH_AS(pcbnet::to_grayscale(hot), doctest::Contains("outside [0, 1]"),
                       pcbnet::ValidationError);
  hot(1, 1, 1) = -0.1f;
  CHECK_THROWS_AS(pcbnet::to_grayscale(hot), pcbnet::ValidationError);
}

TEST_CASE("resize: constant frames stay constant at any scale") {
  Tensorf frame({6, 9}, 0.375f);
  for (auto [w, h] : {std::pair<std::size_t, std::size_t>{3, 2}, {9, 6}, {13, 5}, {1, 1}}) {
    auto out = pcbnet::resize_bilinear(frame, w, h);
    REQUIRE(out.dims() == std::vector<std::size_t>{h, w});
    for (float v : out.values()) {
      CHECK(v == doctest::Approx(0.375f).epsilon(1e-6));
    }
  }
}

TEST_CASE("resize: identity scale copies the frame exactly") {
  Rng rng(31, 0);
  Tensorf frame({7, 11});
  pcbnet::fill_uniform(frame, rng, 0.0f, 1.0f);
  auto out = pcbnet::resize_bilinear(frame, 11, 7);
  CHECK(out == frame);
}

TEST_CASE("resize: downscale matches the direct bilinear formula") {
  Rng rng(32, 0);
  Tensorf frame({8, 8});
  pcbnet::fill_uniform(frame, rng, 0.0f, 1.0f);
  auto got = pcbnet::resize_bilinear(frame, 4, 4);
  auto want = oracle::resize_bilinear_naive(frame, 4, 4);
  CHECK(oracle::max_scaled_error(got, want) < 1e-6);

  Tensorf tall({12, 5});
  pcbnet::fill_uniform(tall, rng, 0.0f, 1.0f);
  auto got2 = pcbnet::resize_bilinear(tall, 9, 5);  // mixed up- and downscale
  auto want2 = oracle::resize_bilinear_naive(tall, 9, 5);
  CHECK(oracle::max_scaled_error(got2, want2) < 1e-6);
}

TEST_CASE("resize: interpolation never leaves the input range") {
  Rng rng(33, 0);
  Tensorf frame({240, 320});
  pcbnet::fill_uniform(frame, rng, 0.0f, 1.0f);
  auto out = pcbnet::resize_bilinear(frame, 80, 60);
  REQUIRE(out.dims() == std::vector<std::size_t>{60, 80});
  for (float v : out.values()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("resize: zero target extent is rejected") {
  Tensorf frame({4, 4});
  CHECK_THROWS_AS(pcbnet::resize_bilinear(frame, 0, 4), pcbnet::ShapeError);
  CHECK_THROWS_AS(pcbnet::resize_bilinear(frame, 4, 0), pcbnet::ShapeError);
}

namespace {

// Volume whose frame f is the constant value f, so sampled output frames
// reveal exactly which source frame they came from.
Tensorf indexed_volume(std::size_t length) {
  Tensorf volume({length, 2, 3});
  for (std::size_t f = 0; f < length; ++f) {
    for (std::size_t i = 0; i < 6; ++i) {
      volume[f * 6 + i] = static_cast<float>(f);
    }
  }
  return volume;
}

}  // namespace

TEST_CASE("temporal_sample: equal length is the identity") {
  auto volume = indexed_volume(10);
  auto out = pcbnet::temporal_sample(volume, 10);
  CHECK(out == volume);
}

TEST_CASE("temporal_sample: longer segments subsample uniformly") {
  auto out = pcbnet::temporal_sample(indexed_volume(20), 10);
  REQUIRE(out.dims() == std::vector<std::size_t>{10, 2, 3});
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(out(i, 0, 0) == static_cast<float>(2 * i));
  }
}

TEST_CASE("temporal_sample: short segments are rejected with both lengths") {
  try {
    pcbnet::temporal_sample(indexed_volume(5), 10);
    FAIL("expected SegmentTooShortError");
  } catch (const pcbnet::SegmentTooShortError& e) {
    CHECK(e.length() == 5);
    CHECK(e.depth() == 10);
  }
}

TEST_CASE("temporal_sample: loop padding wraps short segments") {
  auto out = pcbnet::temporal_sample(indexed_volume(4), 10, true);
  REQUIRE(out.dim(0) == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(out(i, 1, 2) == static_cast<float>(i % 4));
  }
}

TEST_CASE("temporal_sample: zero depth and bad rank are rejected") {
  CHECK_THROWS_AS(pcbnet::temporal_sample(indexed_volume(4), 0), pcbnet::ShapeError);
  Tensorf flat({4, 4});
  CHECK_THROWS_AS(pcbnet::temporal_sample(flat, 2), pcbnet::ShapeError);
}

TEST_CASE("temporal_sample: source indices start at zero and never decrease") {
  Rng rng(34, 0);
  for (int iter = 0; iter < 50; ++iter) {
    const std::size_t depth = 1 + rng.below(30);
    const std::size_t length = depth + rng.below(100);
    auto out = pcbnet::temporal_sample(indexed_volume(length), depth);
    CHECK(out(0, 0, 0) == 0.0f);
    for (std::size_t i = 1; i < depth; ++i) {
      CHECK(out(i, 0, 0) >= out(i - 1, 0, 0));
      CHECK(out(i, 0, 0) < static_cast<float>(length));
    }
  }
}

TEST_CASE("flip: mirrors coordinates and toggles the flag") {
  Rng rng(35, 0);
  pcbnet::Clip clip;
  clip.frames = Tensorf({3, 4, 5});
  pcbnet::fill_uniform(clip.frames, rng, 0.0f, 1.0f);
  clip.label = 1;
  clip.source_id = "SB_03";

  auto flipped = pcbnet::flip_horizontal(clip);
  CHECK(flipped.label == 1);
  CHECK(flipped.source_id == "SB_03");
  CHECK(flipped.flipped);
  for (std::size_t d = 0; d < 3; ++d) {
    for (std::size_t y = 0; y < 4; ++y) {
      for (std::size_t x = 0; x < 5; ++x) {
        CHECK(flipped.frames(d, y, x) == clip.frames(d, y, 4 - x));
      }
    }
  }

  auto twice = pcbnet::flip_horizontal(flipped);
  CHECK_FALSE(twice.flipped);
  CHECK(twice.frames == clip.frames);  // involution, bit for bit
}

TEST_CASE("flip: horizontally symmetric frames are fixed points") {
  pcbnet::Clip clip;
  clip.frames = Tensorf({1, 1, 5});
  clip.frames(0, 0, 0) = 0.1f;
  clip.frames(0, 0, 1) = 0.2f;
  clip.frames(0, 0, 2) = 0.9f;
  clip.frames(0, 0, 3) = 0.2f;
  clip.frames(0, 0, 4) = 0.1f;
  auto flipped = pcbnet::flip_horizontal(clip);
  CHECK(flipped.frames == clip.frames);
}

TEST_CASE("clip format: encode-decode-encode is byte stable") {
  Rng rng(36, 0);
  Tensorf frames({4, 3, 5});
  pcbnet::fill_uniform(frames, rng, 0.0f, 1.0f);
  const auto bytes = pcbnet::encode_clip(frames);
  CHECK(bytes.size() == 17 + 4 * 3 * 5 * 4);
  const auto decoded = pcbnet::decode_clip(bytes);
  CHECK(decoded == frames);
  CHECK(pcbnet::encode_clip(decoded) == bytes);
}

TEST_CASE("clip format: file round-trip") {
  testutil::TempDir dir("clip");
  Rng rng(37, 0);
  Tensorf frames({2, 4, 4});
  pcbnet::fill_uniform(frames, rng, 0.0f, 1.0f);
  const auto path = dir.path() / "SB_01.clip";
  pcbnet::write_clip(path, frames);
  CHECK(pcbnet::read_clip(path) == frames);
}

TEST_CASE("clip format: corruption is reported with the byte offset") {
  Rng rng(38, 0);
  Tensorf frames({2, 2, 2});
  pcbnet::fill_uniform(frames, rng, 0.0f, 1.0f);
  const auto good = pcbnet::encode_clip(frames);

  const auto offset_of = [](auto&& fn) -> std::uint64_t {
    try {
      fn();
    } catch (const pcbnet::FormatError& e) {
      REQUIRE(e.byte_offset().has_value());
      return *e.byte_offset();
    }
    FAIL("expected FormatError");
    return ~std::uint64_t{0};
  };

  SUBCASE("truncation before the payload") {
    std::vector<unsigned char> bytes(good.begin(), good.begin() + 9);
    CHECK(offset_of([&] { pcbnet::decode_clip(bytes); }) == bytes.size());
  }
  SUBCASE("bad magic") {
    auto bytes = good;
    bytes[1] = 'X';
    CHECK(offset_of([&] { pcbnet::decode_clip(bytes); }) == 0);
  }
  SUBCASE("zero extent in the header") {
    auto bytes = good;
    bytes[4] = bytes[5] = bytes[6] = bytes[7] = 0;  // depth = 0
    CHECK(offset_of([&] { pcbnet::decode_clip(bytes); }) == 4);
  }
  SUBCASE("unknown dtype") {
    auto bytes = good;
    bytes[16] = 7;
    CHECK(offset_of([&] { pcbnet::decode_clip(bytes); }) == 16);
  }
  SUBCASE("payload shorter than the header implies") {
    std::vector<unsigned char> bytes(good.begin(), good.end() - 4);
    CHECK(offset_of([&] { pcbnet::decode_clip(bytes); }) == 17);
  }
  SUBCASE("trailing bytes after the payload") {
    auto bytes = good;
    bytes.push_back(0xAB);
    CHECK(offset_of([&] { pcbnet::decode_clip(bytes); }) == 17);
  }
}

TEST_CASE("clip format: encode requires a frame volume") {
  Tensorf flat({4, 4});
  CHECK_THROWS_AS(pcbnet::encode_clip(flat), pcbnet::ShapeError);
}

TEST_CASE("clip format: missing file raises an io error") {
  testutil::TempDir dir("clip_missing");
  CHECK_THROWS_AS(pcbnet::read_clip(dir.path() / "absent.clip"), pcbnet::IoError);
}
