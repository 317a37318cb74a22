#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include <pcbnet/errors.hpp>
#include <pcbnet/tensor.hpp>

namespace pcbnet {

// Bias-corrected Adam for one parameter tensor. Moments are zero-initialised
// to the parameter's shape on the first step; step_count advances by exactly
// one per update.
template <typename T>
struct AdamState {
  std::uint64_t step_count = 0;
  Tensor<T> first_moment;
  Tensor<T> second_moment;
  T learning_rate = static_cast<T>(1e-4);
  T beta1 = static_cast<T>(0.9);
  T beta2 = static_cast<T>(0.999);
  T epsilon = static_cast<T>(1e-8);

  void validate() const {
    if (!(learning_rate >= T{0})) {
      throw ConfigError("adam learning_rate must be non-negative");
    }
    if (!(beta1 >= T{0} && beta1 < T{1}) || !(beta2 >= T{0} && beta2 < T{1})) {
      throw ConfigError("adam betas must lie in [0, 1)");
    }
    if (!(epsilon > T{0})) {
      throw ConfigError("adam epsilon must be positive");
    }
  }
};

template <typename T>
void adam_step(Tensor<T>& param, const Tensor<T>& grad, AdamState<T>& state,
               std::string_view param_name = "param") {
  state.validate();
  if (grad.dims() != param.dims()) {
    throw ShapeError("adam grad dims " + dims_to_string(grad.dims()) + " do not match param dims " +
                     dims_to_string(param.dims()));
  }
  if (!all_finite(grad)) {
    throw NumericError("non-finite gradient for parameter " + std::string(param_name));
  }
  if (state.first_moment.empty()) {
    state.first_moment = Tensor<T>(param.dims());
    state.second_moment = Tensor<T>(param.dims());
  } else if (state.first_moment.dims() != param.dims() ||
             state.second_moment.dims() != param.dims()) {
    throw ShapeError("adam moment dims do not match param dims " + dims_to_string(param.dims()));
  }

  state.step_count += 1;
  const T one_minus_b1 = T{1} - state.beta1;
  const T one_minus_b2 = T{1} - state.beta2;
  const T bias1 =
      T{1} - static_cast<T>(std::pow(static_cast<double>(state.beta1), state.step_count));
  const T bias2 =
      T{1} - static_cast<T>(std::pow(static_cast<double>(state.beta2), state.step_count));
  const std::size_t n = param.size();
  T* p = param.data();
  const T* g = grad.data();
  T* m = state.first_moment.data();
  T* v = state.second_moment.data();
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = state.beta1 * m[i] + one_minus_b1 * g[i];
    v[i] = state.beta2 * v[i] + one_minus_b2 * g[i] * g[i];
    const T m_hat = m[i] / bias1;
    const T v_hat = v[i] / bias2;
    p[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
  }
}

}  // namespace pcbnet
