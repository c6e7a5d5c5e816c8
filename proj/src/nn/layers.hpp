#pragma once

#include <span>
#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace wavedm::nn {

// Square kernel, zero padding k / 2. Weight layout (out, in, k, k).
struct Conv2d {
  int in = 0;
  int out = 0;
  int kernel = 3;
  int stride = 1;
  std::size_t weight = 0;
  std::size_t bias = 0;

  static Conv2d make(ParamLayout& layout, const std::string& name, int in, int out, int kernel, int stride,
                     Init init = Init::fan_in_uniform);

  int out_size(int size) const { return (size + 2 * (kernel / 2) - kernel) / stride + 1; }

  template <typename T>
  Tensor<T> forward(std::span<const T> params, const Tensor<T>& x) const;
  // Accumulates parameter gradients into `grads` and returns dL/dx.
  template <typename T>
  Tensor<T> backward(std::span<const T> params, const Tensor<T>& x, const Tensor<T>& dy, std::span<T> grads) const;
};

// Operates on (n, features) stored as Tensor{n, features, 1, 1}.
struct Linear {
  int in = 0;
  int out = 0;
  std::size_t weight = 0;
  std::size_t bias = 0;

  static Linear make(ParamLayout& layout, const std::string& name, int in, int out, Init init = Init::fan_in_uniform);

  template <typename T>
  Tensor<T> forward(std::span<const T> params, const Tensor<T>& x) const;
  template <typename T>
  Tensor<T> backward(std::span<const T> params, const Tensor<T>& x, const Tensor<T>& dy, std::span<T> grads) const;
};

template <typename T>
struct GroupNormCache {
  Tensor<T> xhat;
  std::vector<T> inv_std;  // per (item, group)
};

struct GroupNorm {
  int channels = 0;
  int groups = 1;
  std::size_t gamma = 0;
  std::size_t beta = 0;

  static GroupNorm make(ParamLayout& layout, const std::string& name, int channels);

  template <typename T>
  Tensor<T> forward(std::span<const T> params, const Tensor<T>& x, GroupNormCache<T>& cache) const;
  template <typename T>
  Tensor<T> backward(std::span<const T> params, const GroupNormCache<T>& cache, const Tensor<T>& dy,
                     std::span<T> grads) const;
};

template <typename T>
Tensor<T> silu(const Tensor<T>& x);
template <typename T>
Tensor<T> silu_backward(const Tensor<T>& x, const Tensor<T>& dy);

template <typename T>
Tensor<T> upsample2(const Tensor<T>& x);
template <typename T>
Tensor<T> upsample2_backward(const Tensor<T>& dy);

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);
// Splits a channel-concatenated gradient into its two halves.
template <typename T>
void split_channels(const Tensor<T>& d, int first_channels, Tensor<T>& da, Tensor<T>& db);

template <typename T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b);

// (n, dim) sinusoidal features of integer timesteps.
template <typename T>
Tensor<T> timestep_embedding(std::span<const int> steps, int dim);

}  // namespace wavedm::nn
