#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <pcbnet/clip.hpp>
#include <pcbnet/errors.hpp>
#include <pcbnet/rng.hpp>
#include <pcbnet/tensor.hpp>

namespace pcbnet {

// Synthetic stand-in data for desk-scale training: both classes render the
// same bright blob on a dark noisy background and differ only in its motion.
// Normal clips cross the frame at constant velocity; suspicious clips drift
// to a fixed target, loiter around it with pauses, and retreat. The classes
// separate on mean per-frame centroid displacement.

struct SynthPools {
  std::vector<Clip> suspicious;
  std::vector<Clip> normal;
};

inline constexpr std::size_t kSynthMinWidth = 16;
inline constexpr std::size_t kSynthMinHeight = 12;
inline constexpr std::size_t kSynthMinDepth = 8;

namespace detail {

inline constexpr double kSynthBackground = 0.06;
inline constexpr double kSynthAmplitude = 0.85;
inline constexpr double kSynthNoiseSigma = 0.05;

struct BlobPath {
  std::vector<double> x;
  std::vector<double> y;
};

inline void render_blob_clip(const BlobPath& path, std::size_t height, std::size_t width,
                             Rng& rng, Tensorf& frames) {
  const double sigma = std::max(1.1, static_cast<double>(std::min(width, height)) / 12.0);
  const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);
  float* out = frames.data();
  for (std::size_t d = 0; d < path.x.size(); ++d) {
    const double cx = path.x[d];
    const double cy = path.y[d];
    for (std::size_t yy = 0; yy < height; ++yy) {
      for (std::size_t xx = 0; xx < width; ++xx) {
        const double dx = static_cast<double>(xx) - cx;
        const double dy = static_cast<double>(yy) - cy;
        double v = kSynthBackground +
                   kSynthAmplitude * std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq);
        v += rng.normal() * kSynthNoiseSigma;
        *out++ = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
}

inline double clamp_coord(double v, double extent) { return std::clamp(v, 1.0, extent - 2.0); }

// Constant-velocity crossing spanning the full frame width, with a per-clip
// vertical drift.
inline BlobPath normal_path(std::size_t width, std::size_t height, std::size_t depth, Rng& rng) {
  BlobPath path;
  const bool rightward = rng.next_u64() % 2 == 0;
  const double x_start = rightward ? 1.0 : static_cast<double>(width) - 2.0;
  const double x_end = rightward ? static_cast<double>(width) - 2.0 : 1.0;
  const double vx = (x_end - x_start) / static_cast<double>(depth - 1);
  const double vy = rng.uniform(0.5, 1.2) * (rng.next_u64() % 2 == 0 ? 1.0 : -1.0);
  const double y_start = rng.uniform(0.3 * static_cast<double>(height),
                                     0.7 * static_cast<double>(height));
  for (std::size_t t = 0; t < depth; ++t) {
    path.x.push_back(clamp_coord(x_start + vx * static_cast<double>(t), width));
    path.y.push_back(clamp_coord(y_start + vy * static_cast<double>(t), height));
  }
  return path;
}

// Approach, loiter with held frames, retreat. The whole path stays close to
// the target so total displacement is a fraction of a crossing.
inline BlobPath suspicious_path(std::size_t width, std::size_t height, std::size_t depth,
                                Rng& rng) {
  BlobPath path;
  const double w = static_cast<double>(width);
  const double h = static_cast<double>(height);
  const double tx = rng.uniform(0.35 * w, 0.65 * w);
  const double ty = rng.uniform(0.35 * h, 0.65 * h);
  const std::size_t approach_n = std::max<std::size_t>(2, depth / 4);
  const std::size_t retreat_n = std::max<std::size_t>(1, depth / 8);
  const std::size_t loiter_n = depth - approach_n - retreat_n;

  const double start_angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  const double start_dist = 0.15 * w;
  const double sx = clamp_coord(tx + start_dist * std::cos(start_angle), w);
  const double sy = clamp_coord(ty + 0.6 * start_dist * std::sin(start_angle), h);

  for (std::size_t t = 0; t < approach_n; ++t) {
    const double f = static_cast<double>(t + 1) / static_cast<double>(approach_n);
    path.x.push_back(clamp_coord(sx + (tx - sx) * f, w));
    path.y.push_back(clamp_coord(sy + (ty - sy) * f, h));
  }
  double phase = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  double ox = 0.0;
  double oy = 0.0;
  for (std::size_t t = 0; t < loiter_n; ++t) {
    if (t % 2 == 0) {  // move on even loiter frames, hold on odd ones (pauses)
      phase += rng.uniform(1.2, 2.4);
      const double radius = rng.uniform(0.4, 0.9);
      ox = radius * std::cos(phase);
      oy = 0.6 * radius * std::sin(phase);
    }
    path.x.push_back(clamp_coord(tx + ox, w));
    path.y.push_back(clamp_coord(ty + oy, h));
  }
  double rx = path.x.back();
  double ry = path.y.back();
  const double retreat_angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  for (std::size_t t = 0; t < retreat_n; ++t) {
    rx += 1.8 * std::cos(retreat_angle);
    ry += 1.2 * std::sin(retreat_angle);
    path.x.push_back(clamp_coord(rx, w));
    path.y.push_back(clamp_coord(ry, h));
  }
  return path;
}

inline std::string padded_index(std::size_t index, std::size_t count) {
  std::size_t digits = 1;
  for (std::size_t v = count; v >= 10; v /= 10) {
    ++digits;
  }
  digits = std::max<std::size_t>(digits, 2);
  std::string s = std::to_string(index);
  return std::string(digits - s.size(), '0') + s;
}

}  // namespace detail

inline SynthPools synth_generate(std::size_t n_per_class, std::size_t width, std::size_t height,
                                 std::size_t depth, std::uint64_t seed) {
  if (width < kSynthMinWidth || height < kSynthMinHeight || depth < kSynthMinDepth) {
    throw ValidationError("synthetic clips need at least " + std::to_string(kSynthMinWidth) +
                          "x" + std::to_string(kSynthMinHeight) + " pixels and " +
                          std::to_string(kSynthMinDepth) + " frames");
  }
  if (n_per_class == 0) {
    throw ValidationError("synthetic pool size must be positive");
  }
  SynthPools pools;
  for (std::size_t i = 1; i <= n_per_class; ++i) {
    Rng rng(seed, 1'000'000 + i);
    Clip clip;
    clip.label = 1;
    clip.source_id = "SB_" + detail::padded_index(i, n_per_class);
    clip.frames = Tensorf({depth, height, width});
    detail::render_blob_clip(detail::suspicious_path(width, height, depth, rng), height, width,
                             rng, clip.frames);
    pools.suspicious.push_back(std::move(clip));
  }
  for (std::size_t i = 1; i <= n_per_class; ++i) {
    Rng rng(seed, 2'000'000 + i);
    Clip clip;
    clip.label = 0;
    clip.source_id = "NB_" + detail::padded_index(i, n_per_class);
    clip.frames = Tensorf({depth, height, width});
    detail::render_blob_clip(detail::normal_path(width, height, depth, rng), height, width, rng,
                             clip.frames);
    pools.normal.push_back(std::move(clip));
  }
  return pools;
}

// Writes pools as clip files under <out>/suspicious and <out>/normal, named
// by source id.
inline void write_synth_pools(const SynthPools& pools, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "suspicious");
  std::filesystem::create_directories(out_dir / "normal");
  for (const Clip& clip : pools.suspicious) {
    write_clip(out_dir / "suspicious" / (clip.source_id + ".clip"), clip.frames);
  }
  for (const Clip& clip : pools.normal) {
    write_clip(out_dir / "normal" / (clip.source_id + ".clip"), clip.frames);
  }
}

// Mean per-frame displacement of the thresholded brightness centroid; the
// statistic the two classes separate on.
inline double mean_centroid_displacement(const Tensorf& frames, float threshold = 0.35f) {
  const std::size_t depth = frames.dim(0);
  const std::size_t height = frames.dim(1);
  const std::size_t width = frames.dim(2);
  double prev_x = 0.0;
  double prev_y = 0.0;
  double total = 0.0;
  std::size_t steps = 0;
  for (std::size_t d = 0; d < depth; ++d) {
    double mass = 0.0;
    double mx = 0.0;
    double my = 0.0;
    const float* plane = frames.data() + d * height * width;
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const float v = plane[y * width + x];
        if (v > threshold) {
          mass += v;
          mx += v * static_cast<double>(x);
          my += v * static_cast<double>(y);
        }
      }
    }
    if (mass == 0.0) {
      continue;
    }
    const double cx = mx / mass;
    const double cy = my / mass;
    if (d > 0) {
      total += std::hypot(cx - prev_x, cy - prev_y);
      ++steps;
    }
    prev_x = cx;
    prev_y = cy;
  }
  return steps == 0 ? 0.0 : total / static_cast<double>(steps);
}

}  // namespace pcbnet
