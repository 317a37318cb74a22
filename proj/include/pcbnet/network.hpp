#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <pcbnet/adam.hpp>
#include <pcbnet/bytes.hpp>
#include <pcbnet/errors.hpp>
#include <pcbnet/kernels.hpp>
#include <pcbnet/rng.hpp>
#include <pcbnet/tensor.hpp>

namespace pcbnet {

// Binary suspicious-behaviour classifier: conv(1->f0), conv(f0->f1), pool,
// conv(f1->f2), conv(f2->f3), pool, dense(->dense_width), dense(->2), with
// ReLU after every layer except the logits head.

struct NetworkConfig {
  std::size_t depth = 10;
  std::size_t height = 60;
  std::size_t width = 80;
  std::array<std::size_t, 4> conv_filters{32, 32, 64, 64};
  std::size_t dense_width = 512;
  double learning_rate = 1e-4;
  std::size_t batch_size = 8;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

inline constexpr std::size_t kOutputClasses = 2;
inline constexpr std::size_t kParameterWarningThreshold = 50'000'000;

// Spatial extents after the two 2x2x2 pools (floor division twice).
inline std::array<std::size_t, 3> pooled_extents(const NetworkConfig& c) {
  return {c.depth / 2 / 2, c.height / 2 / 2, c.width / 2 / 2};
}

inline std::size_t flatten_width(const NetworkConfig& c) {
  const auto p = pooled_extents(c);
  return c.conv_filters[3] * p[0] * p[1] * p[2];
}

inline void validate_network_config(const NetworkConfig& c) {
  for (std::size_t f : c.conv_filters) {
    if (f == 0) {
      throw ConfigError("conv filter counts must be positive");
    }
  }
  if (c.dense_width == 0) {
    throw ConfigError("dense width must be positive");
  }
  if (c.batch_size == 0) {
    throw ConfigError("batch size must be positive");
  }
  if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate)) {
    throw ConfigError("learning rate must be finite and non-negative");
  }
  if (c.depth == 0 || c.height == 0 || c.width == 0) {
    throw ConfigError("input extents must be positive");
  }
  if (flatten_width(c) == 0) {
    throw ConfigError("input " + std::to_string(c.depth) + "x" + std::to_string(c.height) + "x" +
                      std::to_string(c.width) +
                      " collapses to zero after pooling; every extent must be at least 4");
  }
}

inline std::size_t parameter_count(const NetworkConfig& c) {
  const auto& f = c.conv_filters;
  std::size_t total = f[0] * (1 * kConvTapsPerChannel) + f[0];
  total += f[1] * (f[0] * kConvTapsPerChannel) + f[1];
  total += f[2] * (f[1] * kConvTapsPerChannel) + f[2];
  total += f[3] * (f[2] * kConvTapsPerChannel) + f[3];
  total += c.dense_width * flatten_width(c) + c.dense_width;
  total += kOutputClasses * c.dense_width + kOutputClasses;
  return total;
}

inline std::vector<std::string> config_warnings(const NetworkConfig& c) {
  std::vector<std::string> warnings;
  const std::size_t params = parameter_count(c);
  if (params > kParameterWarningThreshold) {
    warnings.push_back("network has " + std::to_string(params) + " parameters (threshold " +
                       std::to_string(kParameterWarningThreshold) +
                       "); training will be slow and memory-hungry");
  }
  return warnings;
}

inline constexpr std::size_t kNetworkParamCount = 12;

inline constexpr std::array<const char*, kNetworkParamCount> kNetworkParamNames{
    "conv1.weights", "conv1.bias", "conv2.weights", "conv2.bias",
    "conv3.weights", "conv3.bias", "conv4.weights", "conv4.bias",
    "fc1.weights",   "fc1.bias",   "fc2.weights",   "fc2.bias",
};

template <typename T>
struct Network {
  NetworkConfig config;
  ConvParams<T> conv1, conv2, conv3, conv4;
  Tensor<T> fc1_weights, fc1_bias;  // fc weights are [in][out]
  Tensor<T> fc2_weights, fc2_bias;
  std::array<AdamState<T>, kNetworkParamCount> adam;
  std::uint64_t step_count = 0;
  bool training = false;
  std::vector<std::string> warnings;
  mutable ConvScratch<T> scratch;
};

template <typename T>
std::array<Tensor<T>*, kNetworkParamCount> param_tensors(Network<T>& net) {
  return {&net.conv1.weights, &net.conv1.bias, &net.conv2.weights, &net.conv2.bias,
          &net.conv3.weights, &net.conv3.bias, &net.conv4.weights, &net.conv4.bias,
          &net.fc1_weights,   &net.fc1_bias,   &net.fc2_weights,   &net.fc2_bias};
}

template <typename T>
std::array<const Tensor<T>*, kNetworkParamCount> param_tensors(const Network<T>& net) {
  return {&net.conv1.weights, &net.conv1.bias, &net.conv2.weights, &net.conv2.bias,
          &net.conv3.weights, &net.conv3.bias, &net.conv4.weights, &net.conv4.bias,
          &net.fc1_weights,   &net.fc1_bias,   &net.fc2_weights,   &net.fc2_bias};
}

namespace detail {

// Allocates all parameter tensors at their configured shapes, leaving values
// zero. Seed streams 200.. are reserved for parameter initialisation.
template <typename T>
Network<T> allocate_network(const NetworkConfig& config) {
  validate_network_config(config);
  Network<T> net;
  net.config = config;
  const auto& f = config.conv_filters;
  net.conv1 = make_conv_params<T>(f[0], 1);
  net.conv2 = make_conv_params<T>(f[1], f[0]);
  net.conv3 = make_conv_params<T>(f[2], f[1]);
  net.conv4 = make_conv_params<T>(f[3], f[2]);
  net.fc1_weights = Tensor<T>({flatten_width(config), config.dense_width});
  net.fc1_bias = Tensor<T>({config.dense_width});
  net.fc2_weights = Tensor<T>({config.dense_width, kOutputClasses});
  net.fc2_bias = Tensor<T>({kOutputClasses});
  for (auto& state : net.adam) {
    state.learning_rate = static_cast<T>(config.learning_rate);
  }
  return net;
}

inline constexpr std::uint64_t kInitStreamBase = 200;

template <typename T>
std::size_t fan_in_of(const Tensor<T>& weights) {
  if (weights.rank() == 5) {
    return weights.dim(1) * kConvTapsPerChannel;
  }
  return weights.dim(0);
}

}  // namespace detail

// Fan-in-scaled uniform initialisation for weights, zero biases. Each weight
// tensor draws from its own seed stream so layer shapes stay independent.
template <typename T>
Network<T> build_network(const NetworkConfig& config) {
  Network<T> net = detail::allocate_network<T>(config);
  auto params = param_tensors(net);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rank() == 1) {
      continue;  // bias stays zero
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(detail::fan_in_of(*params[i])));
    Rng rng(config.seed, detail::kInitStreamBase + i);
    fill_uniform(*params[i], rng, static_cast<T>(-bound), static_cast<T>(bound));
  }
  net.warnings = config_warnings(config);
  return net;
}

template <typename T>
struct ForwardCache {
  Tensor<T> input;
  Tensor<T> act1, act2;
  MaxPool3dResult<T> pool1;
  Tensor<T> act3, act4;
  MaxPool3dResult<T> pool2;
  Tensor<T> flat;
  Tensor<T> act5;
};

template <typename T>
Tensor<T> forward(const Network<T>& net, const Tensor<T>& batch, ForwardCache<T>* cache = nullptr) {
  detail::expect_rank("network batch", batch.rank(), 5);
  const NetworkConfig& c = net.config;
  detail::expect_dims("network batch", batch, {batch.dim(0), 1, c.depth, c.height, c.width});

  Tensor<T> act1 = conv3d_forward(batch, net.conv1, net.scratch);
  relu_inplace(act1);
  Tensor<T> act2 = conv3d_forward(act1, net.conv2, net.scratch);
  relu_inplace(act2);
  MaxPool3dResult<T> pool1 = maxpool3d_forward(act2);
  Tensor<T> act3 = conv3d_forward(pool1.output, net.conv3, net.scratch);
  relu_inplace(act3);
  Tensor<T> act4 = conv3d_forward(act3, net.conv4, net.scratch);
  relu_inplace(act4);
  MaxPool3dResult<T> pool2 = maxpool3d_forward(act4);
  Tensor<T> flat = pool2.output.reshaped({batch.dim(0), flatten_width(c)});
  Tensor<T> act5 = dense_forward(flat, net.fc1_weights, net.fc1_bias);
  relu_inplace(act5);
  Tensor<T> logits = dense_forward(act5, net.fc2_weights, net.fc2_bias);

  if (cache != nullptr) {
    cache->input = batch;
    cache->act1 = std::move(act1);
    cache->act2 = std::move(act2);
    cache->pool1 = std::move(pool1);
    cache->act3 = std::move(act3);
    cache->act4 = std::move(act4);
    cache->pool2 = std::move(pool2);
    cache->flat = std::move(flat);
    cache->act5 = std::move(act5);
  }
  return logits;
}

// Gradients in param_tensors order.
template <typename T>
using NetworkGrads = std::array<Tensor<T>, kNetworkParamCount>;

template <typename T>
NetworkGrads<T> backward(const Network<T>& net, const ForwardCache<T>& cache,
                         const Tensor<T>& grad_logits) {
  NetworkGrads<T> grads;

  DenseGrads<T> d2 = dense_backward(cache.act5, net.fc2_weights, net.fc2_bias, grad_logits);
  grads[10] = std::move(d2.grad_weights);
  grads[11] = std::move(d2.grad_bias);
  relu_backward_inplace(d2.grad_input, cache.act5);

  DenseGrads<T> d1 = dense_backward(cache.flat, net.fc1_weights, net.fc1_bias, d2.grad_input);
  grads[8] = std::move(d1.grad_weights);
  grads[9] = std::move(d1.grad_bias);

  Tensor<T> grad_pool2 = d1.grad_input.reshaped(cache.pool2.output.dims());
  Tensor<T> grad_act4 = maxpool3d_backward(cache.pool2, grad_pool2);
  relu_backward_inplace(grad_act4, cache.act4);

  Conv3dGrads<T> c4 = conv3d_backward(cache.act3, net.conv4, grad_act4, net.scratch);
  grads[6] = std::move(c4.grad_weights);
  grads[7] = std::move(c4.grad_bias);
  relu_backward_inplace(c4.grad_input, cache.act3);

  Conv3dGrads<T> c3 = conv3d_backward(cache.pool1.output, net.conv3, c4.grad_input, net.scratch);
  grads[4] = std::move(c3.grad_weights);
  grads[5] = std::move(c3.grad_bias);

  Tensor<T> grad_act2 = maxpool3d_backward(cache.pool1, c3.grad_input);
  relu_backward_inplace(grad_act2, cache.act2);

  Conv3dGrads<T> c2 = conv3d_backward(cache.act1, net.conv2, grad_act2, net.scratch);
  grads[2] = std::move(c2.grad_weights);
  grads[3] = std::move(c2.grad_bias);
  relu_backward_inplace(c2.grad_input, cache.act1);

  Conv3dGrads<T> c1 =
      conv3d_backward(cache.input, net.conv1, c2.grad_input, net.scratch, /*want_grad_input=*/false);
  grads[0] = std::move(c1.grad_weights);
  grads[1] = std::move(c1.grad_bias);

  return grads;
}

// Argmax prediction; class 1 is Suspicious. Ties resolve to class 0, matching
// first-maximum argmax.
template <typename T>
int predict_label(const T* logit_row) {
  return logit_row[1] > logit_row[0] ? 1 : 0;
}

template <typename T>
struct TrainSample {
  const Tensor<T>* volume = nullptr;  // [depth][height][width]
  int label = 0;                      // 0 normal, 1 suspicious
  std::string name;
};

namespace detail {

template <typename T>
Tensor<T> assemble_batch(const NetworkConfig& c, const std::vector<TrainSample<T>>& samples,
                         const std::vector<std::size_t>& order, std::size_t first,
                         std::size_t count, std::vector<int>& labels) {
  Tensor<T> batch({count, 1, c.depth, c.height, c.width});
  const std::size_t volume = c.depth * c.height * c.width;
  labels.clear();
  for (std::size_t b = 0; b < count; ++b) {
    const TrainSample<T>& s = samples[order[first + b]];
    const Tensor<T>& frames = *s.volume;
    if (frames.rank() != 3 || frames.dim(0) != c.depth || frames.dim(1) != c.height ||
        frames.dim(2) != c.width) {
      throw ShapeError("clip \"" + s.name + "\" has shape " + dims_to_string(frames.dims()) +
                       " but the network expects (" + std::to_string(c.depth) + "," +
                       std::to_string(c.height) + "," + std::to_string(c.width) + ")");
    }
    std::memcpy(batch.data() + b * volume, frames.data(), volume * sizeof(T));
    labels.push_back(s.label);
  }
  return batch;
}

}  // namespace detail

// One full shuffled pass. Returns the per-sample mean loss of the pass;
// parameters update once per batch.
template <typename T>
double train_epoch(Network<T>& net, const std::vector<TrainSample<T>>& samples,
                   std::size_t batch_size, Rng& rng) {
  if (samples.empty()) {
    throw ValidationError("training set is empty");
  }
  if (batch_size == 0) {
    throw ConfigError("batch size must be positive");
  }
  net.training = true;
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());

  auto params = param_tensors(net);
  std::vector<int> labels;
  double loss_sum = 0.0;
  for (std::size_t first = 0; first < order.size(); first += batch_size) {
    const std::size_t count = std::min(batch_size, order.size() - first);
    Tensor<T> batch = detail::assemble_batch(net.config, samples, order, first, count, labels);
    ForwardCache<T> cache;
    Tensor<T> logits = forward(net, batch, &cache);
    SoftmaxLossResult<T> loss = softmax_cross_entropy(logits, labels);
    NetworkGrads<T> grads = backward(net, cache, loss.grad);
    for (std::size_t i = 0; i < params.size(); ++i) {
      adam_step(*params[i], grads[i], net.adam[i], kNetworkParamNames[i]);
    }
    loss_sum += loss.loss * static_cast<double>(count);
  }
  net.step_count = net.adam[0].step_count;
  net.training = false;
  return loss_sum / static_cast<double>(samples.size());
}

struct EvalResult {
  std::uint64_t true_positives = 0;   // suspicious predicted suspicious
  std::uint64_t false_negatives = 0;  // suspicious predicted normal
  std::uint64_t false_positives = 0;  // normal predicted suspicious
  std::uint64_t true_negatives = 0;   // normal predicted normal
  double accuracy = 0.0;
  double suspicious_accuracy = 0.0;
  double normal_accuracy = 0.0;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

inline EvalResult eval_from_confusion(std::uint64_t tp, std::uint64_t fn, std::uint64_t fp,
                                      std::uint64_t tn) {
  EvalResult r;
  r.true_positives = tp;
  r.false_negatives = fn;
  r.false_positives = fp;
  r.true_negatives = tn;
  const std::uint64_t total = tp + fn + fp + tn;
  r.accuracy = total == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total);
  r.suspicious_accuracy = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.normal_accuracy = tn + fp == 0 ? 0.0 : static_cast<double>(tn) / static_cast<double>(tn + fp);
  return r;
}

template <typename T>
EvalResult evaluate(const Network<T>& net, const std::vector<TrainSample<T>>& samples) {
  if (samples.empty()) {
    throw ValidationError("evaluation set is empty");
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch_size = net.config.batch_size;

  std::uint64_t tp = 0, fn = 0, fp = 0, tn = 0;
  std::vector<int> labels;
  for (std::size_t first = 0; first < order.size(); first += batch_size) {
    const std::size_t count = std::min(batch_size, order.size() - first);
    Tensor<T> batch = detail::assemble_batch(net.config, samples, order, first, count, labels);
    Tensor<T> logits = forward(net, batch);
    for (std::size_t b = 0; b < count; ++b) {
      const int predicted = predict_label(logits.data() + b * kOutputClasses);
      if (labels[b] == 1) {
        (predicted == 1 ? tp : fn) += 1;
      } else {
        (predicted == 1 ? fp : tn) += 1;
      }
    }
  }
  return eval_from_confusion(tp, fn, fp, tn);
}

namespace checkpoint_format {
inline constexpr char kMagic[4] = {'P', 'C', 'B', 'W'};
inline constexpr std::uint32_t kVersion = 1;
// Layout: magic, u32 version, config (u32 depth/height/width, 4x u32 filters,
// u32 dense_width, f64 learning_rate, u32 batch_size, u32 epochs, u64 seed,
// u64 step_count), u32 tensor count, then per tensor: u16 name length, name
// bytes, u8 rank, u32 extents, f32 payload. Every parameter is followed by its
// Adam moments as "<name>.adam_m" and "<name>.adam_v".
}  // namespace checkpoint_format

namespace detail {

inline void put_tensor(std::vector<unsigned char>& out, std::string_view name,
                       const Tensorf& tensor) {
  put_u16_le(out, static_cast<std::uint16_t>(name.size()));
  out.insert(out.end(), name.begin(), name.end());
  out.push_back(static_cast<unsigned char>(tensor.rank()));
  for (std::size_t i = 0; i < tensor.rank(); ++i) {
    put_u32_le(out, static_cast<std::uint32_t>(tensor.dim(i)));
  }
  if constexpr (std::endian::native == std::endian::little) {
    const auto* raw = reinterpret_cast<const unsigned char*>(tensor.data());
    out.insert(out.end(), raw, raw + tensor.size() * sizeof(float));
  } else {
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      put_f32_le(out, tensor[i]);
    }
  }
}

inline Tensorf moment_or_zeros(const Tensorf& moment, const Tensorf& param) {
  if (moment.empty()) {
    return Tensorf(param.dims());
  }
  return moment;
}

inline Tensorf take_tensor(ByteCursor& cur, std::string_view expected_name,
                           const std::vector<std::size_t>& expected_dims) {
  const std::size_t at = cur.position();
  const std::uint16_t name_len = cur.u16();
  const unsigned char* name_bytes = cur.take(name_len);
  const std::string name(reinterpret_cast<const char*>(name_bytes), name_len);
  if (name != expected_name) {
    throw FormatError("checkpoint tensor \"" + name + "\" where \"" + std::string(expected_name) +
                          "\" was expected",
                      at);
  }
  const std::uint8_t rank = cur.u8();
  std::vector<std::size_t> dims;
  for (std::uint8_t i = 0; i < rank; ++i) {
    dims.push_back(cur.u32());
  }
  if (dims != expected_dims) {
    throw FormatError("checkpoint tensor \"" + name + "\" has dims " + dims_to_string(dims) +
                          ", expected " + dims_to_string(expected_dims),
                      at);
  }
  Tensorf tensor(dims);
  if constexpr (std::endian::native == std::endian::little) {
    const unsigned char* raw = cur.take(tensor.size() * sizeof(float));
    std::memcpy(tensor.data(), raw, tensor.size() * sizeof(float));
  } else {
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      tensor[i] = cur.f32();
    }
  }
  return tensor;
}

}  // namespace detail

inline std::vector<unsigned char> encode_checkpoint(const Network<float>& net) {
  std::vector<unsigned char> out;
  out.insert(out.end(), checkpoint_format::kMagic, checkpoint_format::kMagic + 4);
  detail::put_u32_le(out, checkpoint_format::kVersion);
  const NetworkConfig& c = net.config;
  detail::put_u32_le(out, static_cast<std::uint32_t>(c.depth));
  detail::put_u32_le(out, static_cast<std::uint32_t>(c.height));
  detail::put_u32_le(out, static_cast<std::uint32_t>(c.width));
  for (std::size_t f : c.conv_filters) {
    detail::put_u32_le(out, static_cast<std::uint32_t>(f));
  }
  detail::put_u32_le(out, static_cast<std::uint32_t>(c.dense_width));
  detail::put_f64_le(out, c.learning_rate);
  detail::put_u32_le(out, static_cast<std::uint32_t>(c.batch_size));
  detail::put_u32_le(out, static_cast<std::uint32_t>(c.epochs));
  detail::put_u64_le(out, c.seed);
  detail::put_u64_le(out, net.step_count);

  detail::put_u32_le(out, static_cast<std::uint32_t>(kNetworkParamCount * 3));
  auto params = param_tensors(net);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string name = kNetworkParamNames[i];
    detail::put_tensor(out, name, *params[i]);
    detail::put_tensor(out, name + ".adam_m",
                       detail::moment_or_zeros(net.adam[i].first_moment, *params[i]));
    detail::put_tensor(out, name + ".adam_v",
                       detail::moment_or_zeros(net.adam[i].second_moment, *params[i]));
  }
  return out;
}

inline Network<float> decode_checkpoint(const std::vector<unsigned char>& bytes) {
  detail::ByteCursor cur(bytes.data(), bytes.size(), "checkpoint");
  const unsigned char* magic = cur.take(4);
  if (std::memcmp(magic, checkpoint_format::kMagic, 4) != 0) {
    throw FormatError("checkpoint magic mismatch", 0);
  }
  const std::uint32_t version = cur.u32();
  if (version != checkpoint_format::kVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), 4);
  }
  NetworkConfig c;
  c.depth = cur.u32();
  c.height = cur.u32();
  c.width = cur.u32();
  for (std::size_t& f : c.conv_filters) {
    f = cur.u32();
  }
  c.dense_width = cur.u32();
  c.learning_rate = cur.f64();
  c.batch_size = cur.u32();
  c.epochs = cur.u32();
  c.seed = cur.u64();
  const std::uint64_t step_count = cur.u64();

  Network<float> net = detail::allocate_network<float>(c);
  net.step_count = step_count;

  const std::uint32_t tensor_count = cur.u32();
  if (tensor_count != kNetworkParamCount * 3) {
    throw FormatError("checkpoint holds " + std::to_string(tensor_count) + " tensors, expected " +
                          std::to_string(kNetworkParamCount * 3),
                      cur.position() - 4);
  }
  auto params = param_tensors(net);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string name = kNetworkParamNames[i];
    *params[i] = detail::take_tensor(cur, name, params[i]->dims());
    net.adam[i].first_moment = detail::take_tensor(cur, name + ".adam_m", params[i]->dims());
    net.adam[i].second_moment = detail::take_tensor(cur, name + ".adam_v", params[i]->dims());
    net.adam[i].step_count = step_count;
  }
  if (!cur.at_end()) {
    throw FormatError("checkpoint has trailing bytes", cur.position());
  }
  return net;
}

inline void save_checkpoint(const Network<float>& net, const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = encode_checkpoint(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open checkpoint for writing: " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw IoError("short write to checkpoint: " + path.string());
  }
}

inline Network<float> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open checkpoint: " + path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("read failure on checkpoint: " + path.string());
  }
  return decode_checkpoint(bytes);
}

// Compares the shape-determining fields and reports every mismatch by name.
inline void check_config_matches(const NetworkConfig& expected, const NetworkConfig& actual) {
  std::vector<std::string> fields;
  if (expected.depth != actual.depth) {
    fields.push_back("depth");
  }
  if (expected.height != actual.height) {
    fields.push_back("height");
  }
  if (expected.width != actual.width) {
    fields.push_back("width");
  }
  if (expected.conv_filters != actual.conv_filters) {
    fields.push_back("conv_filters");
  }
  if (expected.dense_width != actual.dense_width) {
    fields.push_back("dense_width");
  }
  if (fields.empty()) {
    return;
  }
  std::string msg = "checkpoint config mismatch in field";
  msg += fields.size() == 1 ? " " : "s ";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i != 0) {
      msg += ", ";
    }
    msg += fields[i];
  }
  throw ConfigError(msg);
}

inline Network<float> load_checkpoint(const std::filesystem::path& path,
                                      const NetworkConfig& expected) {
  Network<float> net = load_checkpoint(path);
  check_config_matches(expected, net.config);
  return net;
}

}  // namespace pcbnet
