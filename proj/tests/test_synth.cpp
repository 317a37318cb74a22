#include <algorithm>
#include <filesystem>

#include <doctest.h>
#include <pcbnet/clip.hpp>
#include <pcbnet/errors.hpp>
#include <pcbnet/synth.hpp>

#include "support/temp_dir.hpp"

TEST_CASE("synth: generation is seed-deterministic") {
  const auto a = pcbnet::synth_generate(3, 16, 12, 8, 42);
  const auto b = pcbnet::synth_generate(3, 16, 12, 8, 42);
  REQUIRE(a.suspicious.size() == 3);
  REQUIRE(a.normal.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.suspicious[i].frames == b.suspicious[i].frames);
    CHECK(a.normal[i].frames == b.normal[i].frames);
    CHECK(a.suspicious[i].source_id == b.suspicious[i].source_id);
  }
  const auto c = pcbnet::synth_generate(3, 16, 12, 8, 43);
  CHECK_FALSE(a.suspicious[0].frames == c.suspicious[0].frames);
  CHECK_FALSE(a.normal[0].frames == c.normal[0].frames);
}

TEST_CASE("synth: clips carry labels, padded ids, and in-range pixels") {
  const auto pools = pcbnet::synth_generate(12, 16, 12, 8, 7);
  REQUIRE(pools.suspicious.size() == 12);
  CHECK(pools.suspicious[0].source_id == "SB_01");
  CHECK(pools.suspicious[9].source_id == "SB_10");
  CHECK(pools.suspicious[11].source_id == "SB_12");
  CHECK(pools.normal[0].source_id == "NB_01");
  for (const auto& clip : pools.suspicious) {
    CHECK(clip.label == 1);
    CHECK_FALSE(clip.flipped);
    CHECK(clip.frames.dims() == std::vector<std::size_t>{8, 12, 16});
    for (float v : clip.frames.values()) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
  }
  for (const auto& clip : pools.normal) {
    CHECK(clip.label == 0);
  }

  const auto large = pcbnet::synth_generate(100, 16, 12, 8, 7);
  CHECK(large.suspicious[0].source_id == "SB_001");
  CHECK(large.suspicious[99].source_id == "SB_100");
}

TEST_CASE("synth: undersized requests are rejected") {
  CHECK_THROWS_AS(pcbnet::synth_generate(1, 15, 12, 8, 0), pcbnet::ValidationError);
  CHECK_THROWS_AS(pcbnet::synth_generate(1, 16, 11, 8, 0), pcbnet::ValidationError);
  CHECK_THROWS_AS(pcbnet::synth_generate(1, 16, 12, 7, 0), pcbnet::ValidationError);
  CHECK_THROWS_AS(pcbnet::synth_generate(0, 16, 12, 8, 0), pcbnet::ValidationError);
}

TEST_CASE("synth: classes separate on mean centroid displacement") {
  const auto pools = pcbnet::synth_generate(50, 32, 24, 10, 11);
  double min_normal = 1e9;
  double max_suspicious = 0.0;
  double normal_mean = 0.0;
  double suspicious_mean = 0.0;
  for (const auto& clip : pools.normal) {
    const double d = pcbnet::mean_centroid_displacement(clip.frames);
    min_normal = std::min(min_normal, d);
    normal_mean += d;
  }
  for (const auto& clip : pools.suspicious) {
    const double d = pcbnet::mean_centroid_displacement(clip.frames);
    max_suspicious = std::max(max_suspicious, d);
    suspicious_mean += d;
  }
  normal_mean /= 50.0;
  suspicious_mean /= 50.0;
  INFO("normal mean " << normal_mean << " min " << min_normal << "; suspicious mean "
                      << suspicious_mean << " max " << max_suspicious);
  CHECK(normal_mean - suspicious_mean > 1.5);  // class means sit well apart
  CHECK(min_normal > max_suspicious);          // and the ranges do not overlap
}

TEST_CASE("synth: pools write under class directories and read back bitwise") {
  testutil::TempDir dir("synth");
  const auto pools = pcbnet::synth_generate(3, 16, 12, 8, 5);
  pcbnet::write_synth_pools(pools, dir.path());
  CHECK(std::filesystem::exists(dir.path() / "suspicious" / "SB_01.clip"));
  CHECK(std::filesystem::exists(dir.path() / "suspicious" / "SB_03.clip"));
  CHECK(std::filesystem::exists(dir.path() / "normal" / "NB_02.clip"));
  for (const auto& clip : pools.suspicious) {
    CHECK(pcbnet::read_clip(dir.path() / "suspicious" / (clip.source_id + ".clip")) ==
          clip.frames);
  }
  for (const auto& clip : pools.normal) {
    CHECK(pcbnet::read_clip(dir.path() / "normal" / (clip.source_id + ".clip")) == clip.frames);
  }
}
