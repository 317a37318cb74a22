#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "pcbnet/errors.hpp"
#include "pcbnet/rng.hpp"

namespace pcbnet {

inline constexpr std::size_t kMaxTensorRank = 5;

// Dense row-major tensor of rank 1..5 (last dimension fastest). A
// default-constructed tensor is the empty sentinel with no dims and no data.
template <typename T>
class Tensor {
  static_assert(std::is_floating_point_v<T>, "Tensor supports floating-point elements only");

public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> dims, T fill = T{0}) : dims_(std::move(dims)) {
    data_.assign(checked_element_count(dims_), fill);
  }

  static Tensor from_data(std::vector<std::size_t> dims, std::vector<T> data) {
    const std::size_t expected = checked_element_count(dims);
    if (expected != data.size()) {
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match dims product " + std::to_string(expected));
    }
    Tensor t;
    t.dims_ = std::move(dims);
    t.data_ = std::move(data);
    return t;
  }

  std::size_t rank() const noexcept { return dims_.size(); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t dim(std::size_t i) const { return dims_.at(i); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t element_count() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  T& operator[](std::size_t flat) noexcept { return data_[flat]; }
  const T& operator[](std::size_t flat) const noexcept { return data_[flat]; }

  template <typename... Ix>
  T& operator()(Ix... ix) noexcept {
    return data_[flat_index(ix...)];
  }
  template <typename... Ix>
  const T& operator()(Ix... ix) const noexcept {
    return data_[flat_index(ix...)];
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  bool same_shape(const Tensor& other) const noexcept { return dims_ == other.dims_; }

  // Same data, new dims; element count must be preserved.
  Tensor reshaped(std::vector<std::size_t> dims) const {
    const std::size_t expected = checked_element_count(dims);
    if (expected != data_.size()) {
      throw ShapeError("reshape from " + std::to_string(data_.size()) + " elements to " +
                       std::to_string(expected));
    }
    Tensor t;
    t.dims_ = std::move(dims);
    t.data_ = data_;
    return t;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.dims_ == b.dims_ && a.data_ == b.data_;
  }

private:
  template <typename... Ix>
  std::size_t flat_index(Ix... ix) const noexcept {
    static_assert(sizeof...(Ix) >= 1 && sizeof...(Ix) <= kMaxTensorRank);
    const std::size_t idx[] = {static_cast<std::size_t>(ix)...};
    std::size_t flat = 0;
    for (std::size_t i = 0; i < sizeof...(Ix); ++i) {
      flat = flat * dims_[i] + idx[i];
    }
    return flat;
  }

  static std::size_t checked_element_count(const std::vector<std::size_t>& dims) {
    if (dims.empty() || dims.size() > kMaxTensorRank) {
      throw ShapeError("tensor rank must be 1..5, got " + std::to_string(dims.size()));
    }
    std::size_t n = 1;
    for (std::size_t d : dims) {
      if (d == 0) {
        throw ShapeError("tensor extents must be positive");
      }
      if (n > std::numeric_limits<std::size_t>::max() / d) {
        throw ShapeError("tensor extent product overflows");
      }
      n *= d;
    }
    return n;
  }

  std::vector<std::size_t> dims_;
  std::vector<T> data_;
};

using Tensorf = Tensor<float>;
using Tensord = Tensor<double>;

template <typename T>
bool all_finite(const Tensor<T>& t) noexcept {
  for (T v : t.values()) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

template <typename T>
void fill_uniform(Tensor<T>& t, Rng& rng, T lo, T hi) {
  for (T& v : t.values()) {
    v = static_cast<T>(rng.uniform(static_cast<double>(lo), static_cast<double>(hi)));
  }
}

inline std::string dims_to_string(const std::vector<std::size_t>& dims) {
  std::string s = "(";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i != 0) {
      s += ",";
    }
    s += std::to_string(dims[i]);
  }
  s += ")";
  return s;
}

}  // namespace pcbnet
