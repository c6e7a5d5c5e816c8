#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nn/layers.hpp"
#include "nn/tensor.hpp"

namespace wavedm::nn {

template <typename T>
struct ResBlockCache {
  Tensor<T> x;
  Tensor<T> h1;
  Tensor<T> a1;
  Tensor<T> h2;
  Tensor<T> a2;
  GroupNormCache<T> norm1;
  GroupNormCache<T> norm2;
};

// GN -> SiLU -> conv, + time projection, GN -> SiLU -> conv, + skip.
struct ResBlock {
  GroupNorm norm1;
  Conv2d conv1;
  Linear time_proj;
  GroupNorm norm2;
  Conv2d conv2;
  bool has_skip = false;
  Conv2d skip;

  static ResBlock make(ParamLayout& layout, const std::string& name, int in, int out, int time_dim);

  template <typename T>
  Tensor<T> forward(std::span<const T> p, const Tensor<T>& x, const Tensor<T>& time_act, ResBlockCache<T>& c) const;
  // Adds the time-activation gradient into `dtime_act`.
  template <typename T>
  Tensor<T> backward(std::span<const T> p, const ResBlockCache<T>& c, const Tensor<T>& time_act, const Tensor<T>& dy,
                     std::span<T> grads, Tensor<T>& dtime_act) const;
};

struct EstimatorConfig {
  int in_channels = 96;
  int out_channels = 3;
  int width = 32;

  bool operator==(const EstimatorConfig&) const = default;
};

template <typename T>
struct EstimatorState {
  Tensor<T> x;
  std::vector<int> steps;
  Tensor<T> temb0, m1, m1a, temb, temb_act;
  Tensor<T> h0, r0, d1, r1, d2, r2, u1, c1, r3, c0, r4, go, ao;
  GroupNormCache<T> norm_out;
  ResBlockCache<T> blocks[5];
};

// Residual encoder-decoder over three scales with a sinusoidal time
// embedding added in every residual block. Spatial dims must be multiples of 4.
class EstimatorNet {
 public:
  explicit EstimatorNet(const EstimatorConfig& cfg);

  const EstimatorConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }

  template <typename T>
  Tensor<T> forward(std::span<const T> p, const Tensor<T>& x, std::span<const int> steps,
                    EstimatorState<T>* state = nullptr) const;
  template <typename T>
  void backward(std::span<const T> p, const EstimatorState<T>& state, const Tensor<T>& dy, std::span<T> grads) const;

 private:
  EstimatorConfig cfg_;
  ParamLayout layout_;
  Linear time1_, time2_;
  Conv2d conv_in_, down1_, down2_, conv_out_;
  ResBlock res_[5];
  GroupNorm norm_out_;
};

struct HfrmConfig {
  int in_channels = 48;
  int out_channels = 45;
  int width = 32;
  int blocks = 5;
  // Output is added to input channels [skip_offset, skip_offset + out_channels).
  int skip_offset = 3;

  bool operator==(const HfrmConfig&) const = default;
};

template <typename T>
struct HfrmState {
  Tensor<T> x;
  std::vector<Tensor<T>> h_in, pre, act;
  Tensor<T> h_final, a_final;
};

// Plain residual stack: conv, then `blocks` x (conv -> SiLU -> conv, + identity),
// then SiLU -> conv added onto the matching input channels.
class HfrmNet {
 public:
  explicit HfrmNet(const HfrmConfig& cfg);

  const HfrmConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }

  template <typename T>
  Tensor<T> forward(std::span<const T> p, const Tensor<T>& x, HfrmState<T>* state = nullptr) const;
  template <typename T>
  void backward(std::span<const T> p, const HfrmState<T>& state, const Tensor<T>& dy, std::span<T> grads) const;

 private:
  HfrmConfig cfg_;
  ParamLayout layout_;
  Conv2d conv_in_, conv_out_;
  std::vector<Conv2d> conv_a_, conv_b_;
};

template <typename T>
std::vector<T> init_params(const ParamLayout& layout, std::uint64_t seed);

}  // namespace wavedm::nn
