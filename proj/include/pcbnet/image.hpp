#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include <pcbnet/errors.hpp>
#include <pcbnet/tensor.hpp>

namespace pcbnet {

// ITU-R BT.601 luma. Input [3][H][W] with channels R, G, B in [0, 1].
template <typename T>
Tensor<T> to_grayscale(const Tensor<T>& rgb) {
  if (rgb.rank() != 3 || rgb.dim(0) != 3) {
    throw ShapeError("to_grayscale expects [3][H][W], got " + dims_to_string(rgb.dims()));
  }
  const std::size_t height = rgb.dim(1);
  const std::size_t width = rgb.dim(2);
  const std::size_t plane = height * width;
  const T* r = rgb.data();
  const T* g = r + plane;
  const T* b = g + plane;
  for (std::size_t i = 0; i < 3 * plane; ++i) {
    if (!(r[i] >= T{0} && r[i] <= T{1})) {
      throw ValidationError("to_grayscale pixel value " + std::to_string(static_cast<double>(r[i])) +
                            " outside [0, 1]");
    }
  }
  Tensor<T> out({height, width});
  T* o = out.data();
  for (std::size_t i = 0; i < plane; ++i) {
    o[i] = static_cast<T>(0.299) * r[i] + static_cast<T>(0.587) * g[i] +
           static_cast<T>(0.114) * b[i];
  }
  return out;
}

// Bilinear resampling with half-pixel center alignment: output pixel centers
// map to source coordinate (i + 0.5) * src / dst - 0.5, clamped at the border.
template <typename T>
Tensor<T> resize_bilinear(const Tensor<T>& frame, std::size_t target_width,
                          std::size_t target_height) {
  if (frame.rank() != 2) {
    throw ShapeError("resize expects [H][W], got " + dims_to_string(frame.dims()));
  }
  if (target_width == 0 || target_height == 0) {
    throw ShapeError("resize target extent is zero");
  }
  const std::size_t src_h = frame.dim(0);
  const std::size_t src_w = frame.dim(1);
  Tensor<T> out({target_height, target_width});
  const double scale_y = static_cast<double>(src_h) / static_cast<double>(target_height);
  const double scale_x = static_cast<double>(src_w) / static_cast<double>(target_width);
  const T* src = frame.data();
  T* dst = out.data();
  for (std::size_t y = 0; y < target_height; ++y) {
    const double sy = std::max(0.0, (static_cast<double>(y) + 0.5) * scale_y - 0.5);
    std::size_t y0 = std::min(static_cast<std::size_t>(sy), src_h - 1);
    const std::size_t y1 = std::min(y0 + 1, src_h - 1);
    const double fy = std::min(sy - static_cast<double>(y0), 1.0);
    for (std::size_t x = 0; x < target_width; ++x) {
      const double sx = std::max(0.0, (static_cast<double>(x) + 0.5) * scale_x - 0.5);
      std::size_t x0 = std::min(static_cast<std::size_t>(sx), src_w - 1);
      const std::size_t x1 = std::min(x0 + 1, src_w - 1);
      const double fx = std::min(sx - static_cast<double>(x0), 1.0);
      const double top = static_cast<double>(src[y0 * src_w + x0]) * (1.0 - fx) +
                         static_cast<double>(src[y0 * src_w + x1]) * fx;
      const double bottom = static_cast<double>(src[y1 * src_w + x0]) * (1.0 - fx) +
                            static_cast<double>(src[y1 * src_w + x1]) * fx;
      dst[y * target_width + x] = static_cast<T>(top * (1.0 - fy) + bottom * fy);
    }
  }
  return out;
}

}  // namespace pcbnet
