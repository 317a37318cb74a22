#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include <pcbnet/errors.hpp>
#include <pcbnet/gemm.hpp>
#include <pcbnet/tensor.hpp>

namespace pcbnet {

// Layer kernels with exact forward and backward contracts. Activations are
// [batch][channels][depth][height][width]; convolutions are 3x3x3, stride 1,
// zero padding 1, so output volumes keep the input's spatial extents.

inline constexpr std::size_t kConvKernelExtent = 3;
inline constexpr std::size_t kConvTapsPerChannel =
    kConvKernelExtent * kConvKernelExtent * kConvKernelExtent;

template <typename T>
struct ConvParams {
  Tensor<T> weights;  // [out_c][in_c][3][3][3]
  Tensor<T> bias;     // [out_c]
};

template <typename T>
ConvParams<T> make_conv_params(std::size_t out_channels, std::size_t in_channels) {
  return ConvParams<T>{
      Tensor<T>({out_channels, in_channels, kConvKernelExtent, kConvKernelExtent,
                 kConvKernelExtent}),
      Tensor<T>({out_channels})};
}

namespace detail {

// Upper bound on im2col scratch elements; depth chunking keeps buffers under
// this regardless of resolution.
inline constexpr std::size_t kConvChunkBudget = std::size_t{1} << 24;

inline void expect_rank(const char* what, std::size_t got, std::size_t want) {
  if (got != want) {
    throw ShapeError(std::string(what) + ": expected rank " + std::to_string(want) + ", got rank " +
                     std::to_string(got));
  }
}

template <typename T>
void expect_dims(const char* what, const Tensor<T>& t, const std::vector<std::size_t>& want) {
  if (t.dims() != want) {
    throw ShapeError(std::string(what) + ": expected dims " + dims_to_string(want) + ", got " +
                     dims_to_string(t.dims()));
  }
}

// Fills `col` with the receptive-field matrix for output depths [d0, d0+dn):
// row ((ci*3 + kd)*3 + kh)*3 + kw, column (d - d0)*H*W + h*W + w holds
// input[ci][d + kd - 1][h + kh - 1][w + kw - 1], zero outside the volume.
template <typename T>
void im2col_chunk(const T* in, std::size_t channels, std::size_t depth, std::size_t height,
                  std::size_t width, std::size_t d0, std::size_t dn, T* col) {
  const std::size_t plane = height * width;
  const std::size_t cols = dn * plane;
  for (std::size_t ci = 0; ci < channels; ++ci) {
    for (std::size_t kd = 0; kd < 3; ++kd) {
      for (std::size_t kh = 0; kh < 3; ++kh) {
        for (std::size_t kw = 0; kw < 3; ++kw) {
          const std::size_t row = (((ci * 3 + kd) * 3 + kh) * 3 + kw);
          T* dst_row = col + row * cols;
          for (std::size_t di = 0; di < dn; ++di) {
            T* dst = dst_row + di * plane;
            const std::ptrdiff_t sd = static_cast<std::ptrdiff_t>(d0 + di + kd) - 1;
            if (sd < 0 || sd >= static_cast<std::ptrdiff_t>(depth)) {
              std::memset(dst, 0, plane * sizeof(T));
              continue;
            }
            const T* src_plane = in + (ci * depth + static_cast<std::size_t>(sd)) * plane;
            for (std::size_t h = 0; h < height; ++h) {
              T* dst_line = dst + h * width;
              const std::ptrdiff_t sh = static_cast<std::ptrdiff_t>(h + kh) - 1;
              if (sh < 0 || sh >= static_cast<std::ptrdiff_t>(height)) {
                std::memset(dst_line, 0, width * sizeof(T));
                continue;
              }
              const T* src = src_plane + static_cast<std::size_t>(sh) * width;
              if (kw == 0) {
                dst_line[0] = T{0};
                std::memcpy(dst_line + 1, src, (width - 1) * sizeof(T));
              } else if (kw == 1) {
                std::memcpy(dst_line, src, width * sizeof(T));
              } else {
                std::memcpy(dst_line, src + 1, (width - 1) * sizeof(T));
                dst_line[width - 1] = T{0};
              }
            }
          }
        }
      }
    }
  }
}

// Scatter-add mirror of im2col_chunk: accumulates `col` back into grad_in.
template <typename T>
void col2im_add_chunk(const T* col, std::size_t channels, std::size_t depth, std::size_t height,
                      std::size_t width, std::size_t d0, std::size_t dn, T* grad_in) {
  const std::size_t plane = height * width;
  const std::size_t cols = dn * plane;
  for (std::size_t ci = 0; ci < channels; ++ci) {
    for (std::size_t kd = 0; kd < 3; ++kd) {
      for (std::size_t kh = 0; kh < 3; ++kh) {
        for (std::size_t kw = 0; kw < 3; ++kw) {
          const std::size_t row = (((ci * 3 + kd) * 3 + kh) * 3 + kw);
          const T* src_row = col + row * cols;
          for (std::size_t di = 0; di < dn; ++di) {
            const T* src = src_row + di * plane;
            const std::ptrdiff_t sd = static_cast<std::ptrdiff_t>(d0 + di + kd) - 1;
            if (sd < 0 || sd >= static_cast<std::ptrdiff_t>(depth)) {
              continue;
            }
            T* dst_plane = grad_in + (ci * depth + static_cast<std::size_t>(sd)) * plane;
            for (std::size_t h = 0; h < height; ++h) {
              const T* src_line = src + h * width;
              const std::ptrdiff_t sh = static_cast<std::ptrdiff_t>(h + kh) - 1;
              if (sh < 0 || sh >= static_cast<std::ptrdiff_t>(height)) {
                continue;
              }
              T* dst = dst_plane + static_cast<std::size_t>(sh) * width;
              if (kw == 0) {
                for (std::size_t w = 1; w < width; ++w) {
                  dst[w - 1] += src_line[w];
                }
              } else if (kw == 1) {
                for (std::size_t w = 0; w < width; ++w) {
                  dst[w] += src_line[w];
                }
              } else {
                for (std::size_t w = 1; w < width; ++w) {
                  dst[w] += src_line[w - 1];
                }
              }
            }
          }
        }
      }
    }
  }
}

inline std::size_t conv_chunk_depth(std::size_t rows, std::size_t plane, std::size_t depth) {
  const std::size_t per_depth = rows * plane;
  if (per_depth == 0) {
    return depth;
  }
  return std::clamp<std::size_t>(kConvChunkBudget / per_depth, 1, depth);
}

}  // namespace detail

template <typename T>
struct ConvScratch {
  std::vector<T> col;

  T* ensure(std::size_t elems) {
    if (col.size() < elems) {
      col.resize(elems);
    }
    return col.data();
  }
};

template <typename T>
void check_conv_args(const Tensor<T>& input, const ConvParams<T>& params) {
  detail::expect_rank("conv3d input", input.rank(), 5);
  detail::expect_rank("conv3d weights", params.weights.rank(), 5);
  detail::expect_rank("conv3d bias", params.bias.rank(), 1);
  const std::size_t in_c = input.dim(1);
  const std::size_t out_c = params.weights.dim(0);
  detail::expect_dims("conv3d weights", params.weights,
                      {out_c, in_c, kConvKernelExtent, kConvKernelExtent, kConvKernelExtent});
  detail::expect_dims("conv3d bias", params.bias, {out_c});
}

template <typename T>
Tensor<T> conv3d_forward(const Tensor<T>& input, const ConvParams<T>& params,
                         ConvScratch<T>& scratch) {
  check_conv_args(input, params);
  if (!all_finite(input)) {
    throw NumericError("conv3d input contains non-finite values");
  }
  const std::size_t batch = input.dim(0);
  const std::size_t in_c = input.dim(1);
  const std::size_t depth = input.dim(2);
  const std::size_t height = input.dim(3);
  const std::size_t width = input.dim(4);
  const std::size_t out_c = params.weights.dim(0);
  const std::size_t rows = in_c * kConvTapsPerChannel;
  const std::size_t plane = height * width;
  const std::size_t volume = depth * plane;

  Tensor<T> output({batch, out_c, depth, height, width});
  const std::size_t dchunk = detail::conv_chunk_depth(rows, plane, depth);
  T* col = scratch.ensure(rows * dchunk * plane);
  for (std::size_t n = 0; n < batch; ++n) {
    const T* in = input.data() + n * in_c * volume;
    T* out = output.data() + n * out_c * volume;
    for (std::size_t d0 = 0; d0 < depth; d0 += dchunk) {
      const std::size_t dn = std::min(dchunk, depth - d0);
      detail::im2col_chunk(in, in_c, depth, height, width, d0, dn, col);
      detail::gemm(detail::Trans::no, detail::Trans::no, out_c, dn * plane, rows,
                   params.weights.data(), rows, col, dn * plane, T{0}, out + d0 * plane, volume);
    }
    for (std::size_t oc = 0; oc < out_c; ++oc) {
      T* span = out + oc * volume;
      const T b = params.bias.data()[oc];
      for (std::size_t i = 0; i < volume; ++i) {
        span[i] += b;
      }
    }
  }
  return output;
}

template <typename T>
struct Conv3dGrads {
  Tensor<T> grad_weights;
  Tensor<T> grad_bias;
  Tensor<T> grad_input;  // empty when not requested
};

template <typename T>
Conv3dGrads<T> conv3d_backward(const Tensor<T>& input, const ConvParams<T>& params,
                               const Tensor<T>& grad_output, ConvScratch<T>& scratch,
                               bool want_grad_input = true) {
  check_conv_args(input, params);
  const std::size_t batch = input.dim(0);
  const std::size_t in_c = input.dim(1);
  const std::size_t depth = input.dim(2);
  const std::size_t height = input.dim(3);
  const std::size_t width = input.dim(4);
  const std::size_t out_c = params.weights.dim(0);
  detail::expect_dims("conv3d grad_output", grad_output, {batch, out_c, depth, height, width});
  const std::size_t rows = in_c * kConvTapsPerChannel;
  const std::size_t plane = height * width;
  const std::size_t volume = depth * plane;

  Conv3dGrads<T> grads;
  grads.grad_weights =
      Tensor<T>({out_c, in_c, kConvKernelExtent, kConvKernelExtent, kConvKernelExtent});
  grads.grad_bias = Tensor<T>({out_c});
  if (want_grad_input) {
    grads.grad_input = Tensor<T>({batch, in_c, depth, height, width});
  }

  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t oc = 0; oc < out_c; ++oc) {
      const T* span = grad_output.data() + (n * out_c + oc) * volume;
      T acc{0};
      for (std::size_t i = 0; i < volume; ++i) {
        acc += span[i];
      }
      grads.grad_bias.data()[oc] += acc;
    }
  }

  const std::size_t dchunk = detail::conv_chunk_depth(rows, plane, depth);
  T* col = scratch.ensure(rows * dchunk * plane);
  bool first = true;
  for (std::size_t n = 0; n < batch; ++n) {
    const T* in = input.data() + n * in_c * volume;
    const T* gout = grad_output.data() + n * out_c * volume;
    for (std::size_t d0 = 0; d0 < depth; d0 += dchunk) {
      const std::size_t dn = std::min(dchunk, depth - d0);
      const std::size_t chunk_cols = dn * plane;
      detail::im2col_chunk(in, in_c, depth, height, width, d0, dn, col);
      detail::gemm(detail::Trans::no, detail::Trans::yes, out_c, rows, chunk_cols,
                   gout + d0 * plane, volume, col, chunk_cols, first ? T{0} : T{1},
                   grads.grad_weights.data(), rows);
      first = false;
      if (want_grad_input) {
        // Reuses the col buffer: its forward contents were consumed above.
        detail::gemm(detail::Trans::yes, detail::Trans::no, rows, chunk_cols, out_c,
                     params.weights.data(), rows, gout + d0 * plane, volume, T{0}, col,
                     chunk_cols);
        detail::col2im_add_chunk(col, in_c, depth, height, width, d0, dn,
                                 grads.grad_input.data() + n * in_c * volume);
      }
    }
  }
  return grads;
}

// 2x2x2 max pooling, stride 2; trailing odd extents are dropped. Ties keep the
// earliest element in (depth, height, width) scan order.
template <typename T>
struct MaxPool3dResult {
  Tensor<T> output;
  std::vector<std::uint32_t> argmax;  // flat indices into the pooled input
  std::array<std::size_t, 5> input_dims{};
};

template <typename T>
MaxPool3dResult<T> maxpool3d_forward(const Tensor<T>& input) {
  detail::expect_rank("maxpool3d input", input.rank(), 5);
  const std::size_t batch = input.dim(0);
  const std::size_t channels = input.dim(1);
  const std::size_t depth = input.dim(2);
  const std::size_t height = input.dim(3);
  const std::size_t width = input.dim(4);
  const std::size_t out_d = depth / 2;
  const std::size_t out_h = height / 2;
  const std::size_t out_w = width / 2;
  if (out_d == 0 || out_h == 0 || out_w == 0) {
    throw ShapeError("maxpool3d input " + dims_to_string(input.dims()) +
                     " pools to an empty volume");
  }
  if (input.element_count() > std::numeric_limits<std::uint32_t>::max()) {
    throw ShapeError("maxpool3d input too large for 32-bit argmax indices");
  }

  MaxPool3dResult<T> result;
  result.input_dims = {batch, channels, depth, height, width};
  result.output = Tensor<T>({batch, channels, out_d, out_h, out_w});
  result.argmax.resize(result.output.element_count());
  const T* in = input.data();
  T* out = result.output.data();
  std::size_t o = 0;
  for (std::size_t nc = 0; nc < batch * channels; ++nc) {
    const std::size_t base = nc * depth * height * width;
    for (std::size_t od = 0; od < out_d; ++od) {
      for (std::size_t oh = 0; oh < out_h; ++oh) {
        for (std::size_t ow = 0; ow < out_w; ++ow) {
          T best{};
          std::size_t best_idx = 0;
          bool have = false;
          for (std::size_t kd = 0; kd < 2; ++kd) {
            for (std::size_t kh = 0; kh < 2; ++kh) {
              for (std::size_t kw = 0; kw < 2; ++kw) {
                const std::size_t idx =
                    base + ((od * 2 + kd) * height + oh * 2 + kh) * width + ow * 2 + kw;
                const T v = in[idx];
                if (!have || v > best) {
                  best = v;
                  best_idx = idx;
                  have = true;
                }
              }
            }
          }
          out[o] = best;
          result.argmax[o] = static_cast<std::uint32_t>(best_idx);
          ++o;
        }
      }
    }
  }
  return result;
}

template <typename T>
Tensor<T> maxpool3d_backward(const MaxPool3dResult<T>& cache, const Tensor<T>& grad_output) {
  detail::expect_dims("maxpool3d grad_output", grad_output, cache.output.dims());
  Tensor<T> grad_input(std::vector<std::size_t>(cache.input_dims.begin(), cache.input_dims.end()));
  const T* g = grad_output.data();
  T* gi = grad_input.data();
  for (std::size_t i = 0; i < cache.argmax.size(); ++i) {
    gi[cache.argmax[i]] += g[i];
  }
  return grad_input;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& input) {
  Tensor<T> out = input;
  T* p = out.data();
  const std::size_t n = out.element_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] < T{0}) {
      p[i] = T{0};
    }
  }
  return out;
}

// Gradient is masked wherever the pre-activation was <= 0; an input of exactly
// zero passes no gradient.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out) {
  detail::expect_dims("relu grad_out", grad_out, input.dims());
  Tensor<T> grad = grad_out;
  T* g = grad.data();
  const T* x = input.data();
  const std::size_t n = grad.element_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] <= T{0}) {
      g[i] = T{0};
    }
  }
  return grad;
}

template <typename T>
void relu_inplace(Tensor<T>& t) {
  T* p = t.data();
  const std::size_t n = t.element_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] < T{0}) {
      p[i] = T{0};
    }
  }
}

// In-place variant keyed off the activated output; max(0,x) > 0 exactly where
// x > 0, so the mask is identical to relu_backward's.
template <typename T>
void relu_backward_inplace(Tensor<T>& grad, const Tensor<T>& activated) {
  detail::expect_dims("relu grad", grad, activated.dims());
  T* g = grad.data();
  const T* a = activated.data();
  const std::size_t n = grad.element_count();
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] <= T{0}) {
      g[i] = T{0};
    }
  }
}

template <typename T>
void check_dense_args(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias) {
  detail::expect_rank("dense input", input.rank(), 2);
  detail::expect_rank("dense weights", weights.rank(), 2);
  detail::expect_rank("dense bias", bias.rank(), 1);
  if (weights.dim(0) != input.dim(1)) {
    throw ShapeError("dense weights expect " + std::to_string(weights.dim(0)) +
                     " input features, got " + std::to_string(input.dim(1)));
  }
  detail::expect_dims("dense bias", bias, {weights.dim(1)});
}

// Weights are [in_features][out_features]; output row i is input row i times the
// weight matrix plus bias.
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias) {
  check_dense_args(input, weights, bias);
  const std::size_t batch = input.dim(0);
  const std::size_t in_f = input.dim(1);
  const std::size_t out_f = weights.dim(1);
  Tensor<T> output({batch, out_f});
  detail::gemm(detail::Trans::no, detail::Trans::no, batch, out_f, in_f, input.data(), in_f,
               weights.data(), out_f, T{0}, output.data(), out_f);
  const T* b = bias.data();
  for (std::size_t i = 0; i < batch; ++i) {
    T* row = output.data() + i * out_f;
    for (std::size_t j = 0; j < out_f; ++j) {
      row[j] += b[j];
    }
  }
  return output;
}

template <typename T>
struct DenseGrads {
  Tensor<T> grad_weights;
  Tensor<T> grad_bias;
  Tensor<T> grad_input;
};

template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& input, const Tensor<T>& weights,
                             const Tensor<T>& bias, const Tensor<T>& grad_output) {
  check_dense_args(input, weights, bias);
  const std::size_t batch = input.dim(0);
  const std::size_t in_f = input.dim(1);
  const std::size_t out_f = weights.dim(1);
  detail::expect_dims("dense grad_output", grad_output, {batch, out_f});

  DenseGrads<T> grads;
  grads.grad_weights = Tensor<T>({in_f, out_f});
  grads.grad_bias = Tensor<T>({out_f});
  grads.grad_input = Tensor<T>({batch, in_f});
  detail::gemm(detail::Trans::yes, detail::Trans::no, in_f, out_f, batch, input.data(), in_f,
               grad_output.data(), out_f, T{0}, grads.grad_weights.data(), out_f);
  detail::gemm(detail::Trans::no, detail::Trans::yes, batch, in_f, out_f, grad_output.data(), out_f,
               weights.data(), out_f, T{0}, grads.grad_input.data(), in_f);
  T* gb = grads.grad_bias.data();
  for (std::size_t i = 0; i < batch; ++i) {
    const T* row = grad_output.data() + i * out_f;
    for (std::size_t j = 0; j < out_f; ++j) {
      gb[j] += row[j];
    }
  }
  return grads;
}

// Binary softmax cross-entropy, mean over the batch. grad is
// (probabilities - onehot) / batch, the gradient of the mean loss in logits.
template <typename T>
struct SoftmaxLossResult {
  double loss = 0.0;
  Tensor<T> probabilities;
  Tensor<T> grad;
};

template <typename T>
SoftmaxLossResult<T> softmax_cross_entropy(const Tensor<T>& logits,
                                           const std::vector<int>& labels) {
  detail::expect_rank("softmax logits", logits.rank(), 2);
  const std::size_t batch = logits.dim(0);
  const std::size_t classes = logits.dim(1);
  if (classes != 2) {
    throw ShapeError("softmax_cross_entropy expects exactly 2 classes, got " +
                     std::to_string(classes));
  }
  if (labels.size() != batch) {
    throw ShapeError("softmax labels: expected " + std::to_string(batch) + " entries, got " +
                     std::to_string(labels.size()));
  }
  SoftmaxLossResult<T> result;
  result.probabilities = Tensor<T>({batch, classes});
  result.grad = Tensor<T>({batch, classes});
  double total = 0.0;
  const T inv_batch = T{1} / static_cast<T>(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const int label = labels[i];
    if (label != 0 && label != 1) {
      throw ValidationError("softmax label " + std::to_string(label) + " is not in {0, 1}");
    }
    const T* row = logits.data() + i * classes;
    T* prow = result.probabilities.data() + i * classes;
    T* grow = result.grad.data() + i * classes;
    T max_logit = row[0];
    for (std::size_t j = 1; j < classes; ++j) {
      max_logit = std::max(max_logit, row[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < classes; ++j) {
      denom += std::exp(static_cast<double>(row[j] - max_logit));
    }
    total += std::log(denom) - static_cast<double>(row[label] - max_logit);
    for (std::size_t j = 0; j < classes; ++j) {
      const double p = std::exp(static_cast<double>(row[j] - max_logit)) / denom;
      prow[j] = static_cast<T>(p);
      grow[j] = prow[j] * inv_batch;
    }
    grow[label] -= inv_batch;
  }
  result.loss = total / static_cast<double>(batch);
  return result;
}

}  // namespace pcbnet
