#include "nn/networks.hpp"

#include <cmath>
#include <random>

#include "errors.hpp"

namespace wavedm::nn {

ResBlock ResBlock::make(ParamLayout& layout, const std::string& name, int in, int out, int time_dim) {
  ResBlock b;
  b.norm1 = GroupNorm::make(layout, name + ".norm1", in);
  b.conv1 = Conv2d::make(layout, name + ".conv1", in, out, 3, 1);
  b.time_proj = Linear::make(layout, name + ".time_proj", time_dim, out);
  b.norm2 = GroupNorm::make(layout, name + ".norm2", out);
  b.conv2 = Conv2d::make(layout, name + ".conv2", out, out, 3, 1);
  b.has_skip = in != out;
  if (b.has_skip) b.skip = Conv2d::make(layout, name + ".skip", in, out, 1, 1);
  return b;
}

template <typename T>
Tensor<T> ResBlock::forward(std::span<const T> p, const Tensor<T>& x, const Tensor<T>& time_act,
                            ResBlockCache<T>& c) const {
  c.x = x;
  c.h1 = norm1.forward(p, x, c.norm1);
  c.a1 = silu(c.h1);
  Tensor<T> mid = conv1.forward(p, c.a1);
  const Tensor<T> tp = time_proj.forward(p, time_act);
  for (int n = 0; n < mid.n; ++n) {
    for (int ch = 0; ch < mid.c; ++ch) {
      const T v = tp.data[static_cast<std::size_t>(n) * mid.c + ch];
      T* dst = mid.channel(n, ch);
      for (std::size_t i = 0; i < mid.plane(); ++i) dst[i] += v;
    }
  }
  c.h2 = norm2.forward(p, mid, c.norm2);
  c.a2 = silu(c.h2);
  Tensor<T> out = conv2.forward(p, c.a2);
  if (has_skip) {
    add_inplace(out, skip.forward(p, x));
  } else {
    add_inplace(out, x);
  }
  return out;
}

template <typename T>
Tensor<T> ResBlock::backward(std::span<const T> p, const ResBlockCache<T>& c, const Tensor<T>& time_act,
                             const Tensor<T>& dy, std::span<T> grads, Tensor<T>& dtime_act) const {
  Tensor<T> da2 = conv2.backward(p, c.a2, dy, grads);
  Tensor<T> dmid = norm2.backward(p, c.norm2, silu_backward(c.h2, da2), grads);

  Tensor<T> dtp(dmid.n, dmid.c, 1, 1);
  for (int n = 0; n < dmid.n; ++n) {
    for (int ch = 0; ch < dmid.c; ++ch) {
      const T* src = dmid.channel(n, ch);
      T acc = T(0);
      for (std::size_t i = 0; i < dmid.plane(); ++i) acc += src[i];
      dtp.data[static_cast<std::size_t>(n) * dmid.c + ch] = acc;
    }
  }
  add_inplace(dtime_act, time_proj.backward(p, time_act, dtp, grads));

  Tensor<T> da1 = conv1.backward(p, c.a1, dmid, grads);
  Tensor<T> dx = norm1.backward(p, c.norm1, silu_backward(c.h1, da1), grads);
  if (has_skip) {
    add_inplace(dx, skip.backward(p, c.x, dy, grads));
  } else {
    add_inplace(dx, dy);
  }
  return dx;
}

EstimatorNet::EstimatorNet(const EstimatorConfig& cfg) : cfg_(cfg) {
  require(cfg.in_channels > 0 && cfg.out_channels > 0, Errc::invalid_argument, "estimator channel counts must be > 0");
  require(cfg.width >= 2 && cfg.width % 2 == 0, Errc::invalid_argument, "estimator width must be even and >= 2");
  const int w = cfg.width;
  const int tdim = 2 * w;
  time1_ = Linear::make(layout_, "time.fc1", w, tdim);
  time2_ = Linear::make(layout_, "time.fc2", tdim, tdim);
  conv_in_ = Conv2d::make(layout_, "conv_in", cfg.in_channels, w, 3, 1);
  res_[0] = ResBlock::make(layout_, "enc0", w, w, tdim);
  down1_ = Conv2d::make(layout_, "down1", w, w, 3, 2);
  res_[1] = ResBlock::make(layout_, "enc1", w, 2 * w, tdim);
  down2_ = Conv2d::make(layout_, "down2", 2 * w, 2 * w, 3, 2);
  res_[2] = ResBlock::make(layout_, "mid", 2 * w, 2 * w, tdim);
  res_[3] = ResBlock::make(layout_, "dec1", 4 * w, 2 * w, tdim);
  res_[4] = ResBlock::make(layout_, "dec0", 3 * w, w, tdim);
  norm_out_ = GroupNorm::make(layout_, "norm_out", w);
  conv_out_ = Conv2d::make(layout_, "conv_out", w, cfg.out_channels, 3, 1, Init::small_uniform);
}

template <typename T>
Tensor<T> EstimatorNet::forward(std::span<const T> p, const Tensor<T>& x, std::span<const int> steps,
                                EstimatorState<T>* state) const {
  require(p.size() == layout_.total, Errc::shape_mismatch, "estimator parameter count mismatch");
  require(x.c == cfg_.in_channels, Errc::shape_mismatch,
          "estimator expects " + std::to_string(cfg_.in_channels) + " input channels, got " + std::to_string(x.c));
  require(x.h % 4 == 0 && x.w % 4 == 0 && x.h > 0 && x.w > 0, Errc::shape_mismatch,
          "estimator input spatial size " + std::to_string(x.h) + "x" + std::to_string(x.w) +
              " is not a multiple of 4");
  require(static_cast<int>(steps.size()) == x.n, Errc::shape_mismatch, "one timestep per batch item required");

  EstimatorState<T> local;
  EstimatorState<T>& s = state ? *state : local;
  s.x = x;
  s.steps.assign(steps.begin(), steps.end());
  s.temb0 = timestep_embedding<T>(steps, cfg_.width);
  s.m1 = time1_.forward(p, s.temb0);
  s.m1a = silu(s.m1);
  s.temb = time2_.forward(p, s.m1a);
  s.temb_act = silu(s.temb);

  s.h0 = conv_in_.forward(p, x);
  s.r0 = res_[0].forward(p, s.h0, s.temb_act, s.blocks[0]);
  s.d1 = down1_.forward(p, s.r0);
  s.r1 = res_[1].forward(p, s.d1, s.temb_act, s.blocks[1]);
  s.d2 = down2_.forward(p, s.r1);
  s.r2 = res_[2].forward(p, s.d2, s.temb_act, s.blocks[2]);
  s.u1 = upsample2(s.r2);
  s.c1 = concat_channels(s.u1, s.r1);
  s.r3 = res_[3].forward(p, s.c1, s.temb_act, s.blocks[3]);
  s.c0 = concat_channels(upsample2(s.r3), s.r0);
  s.r4 = res_[4].forward(p, s.c0, s.temb_act, s.blocks[4]);
  s.go = norm_out_.forward(p, s.r4, s.norm_out);
  s.ao = silu(s.go);
  return conv_out_.forward(p, s.ao);
}

template <typename T>
void EstimatorNet::backward(std::span<const T> p, const EstimatorState<T>& s, const Tensor<T>& dy,
                            std::span<T> grads) const {
  require(grads.size() == layout_.total, Errc::shape_mismatch, "estimator gradient buffer size mismatch");
  const int w = cfg_.width;
  Tensor<T> dtemb_act(s.temb_act.n, s.temb_act.c, 1, 1);

  Tensor<T> dao = conv_out_.backward(p, s.ao, dy, grads);
  Tensor<T> dr4 = norm_out_.backward(p, s.norm_out, silu_backward(s.go, dao), grads);
  Tensor<T> dc0 = res_[4].backward(p, s.blocks[4], s.temb_act, dr4, grads, dtemb_act);
  Tensor<T> du0, dr0_skip;
  split_channels(dc0, 2 * w, du0, dr0_skip);
  Tensor<T> dr3 = upsample2_backward(du0);
  Tensor<T> dc1 = res_[3].backward(p, s.blocks[3], s.temb_act, dr3, grads, dtemb_act);
  Tensor<T> du1, dr1_skip;
  split_channels(dc1, 2 * w, du1, dr1_skip);
  Tensor<T> dr2 = upsample2_backward(du1);
  Tensor<T> dd2 = res_[2].backward(p, s.blocks[2], s.temb_act, dr2, grads, dtemb_act);
  Tensor<T> dr1 = down2_.backward(p, s.r1, dd2, grads);
  add_inplace(dr1, dr1_skip);
  Tensor<T> dd1 = res_[1].backward(p, s.blocks[1], s.temb_act, dr1, grads, dtemb_act);
  Tensor<T> dr0 = down1_.backward(p, s.r0, dd1, grads);
  add_inplace(dr0, dr0_skip);
  Tensor<T> dh0 = res_[0].backward(p, s.blocks[0], s.temb_act, dr0, grads, dtemb_act);
  conv_in_.backward(p, s.x, dh0, grads);

  Tensor<T> dtemb = silu_backward(s.temb, dtemb_act);
  Tensor<T> dm1a = time2_.backward(p, s.m1a, dtemb, grads);
  time1_.backward(p, s.temb0, silu_backward(s.m1, dm1a), grads);
}

HfrmNet::HfrmNet(const HfrmConfig& cfg) : cfg_(cfg) {
  require(cfg.in_channels > 0 && cfg.out_channels > 0 && cfg.width > 0 && cfg.blocks >= 0, Errc::invalid_argument,
          "invalid refinement module configuration");
  require(cfg.skip_offset >= 0 && cfg.skip_offset + cfg.out_channels <= cfg.in_channels, Errc::invalid_argument,
          "refinement skip channels fall outside the input");
  conv_in_ = Conv2d::make(layout_, "conv_in", cfg.in_channels, cfg.width, 3, 1);
  for (int b = 0; b < cfg.blocks; ++b) {
    conv_a_.push_back(Conv2d::make(layout_, "block" + std::to_string(b) + ".conv_a", cfg.width, cfg.width, 3, 1));
    conv_b_.push_back(Conv2d::make(layout_, "block" + std::to_string(b) + ".conv_b", cfg.width, cfg.width, 3, 1));
  }
  conv_out_ = Conv2d::make(layout_, "conv_out", cfg.width, cfg.out_channels, 3, 1, Init::small_uniform);
}

template <typename T>
Tensor<T> HfrmNet::forward(std::span<const T> p, const Tensor<T>& x, HfrmState<T>* state) const {
  require(p.size() == layout_.total, Errc::shape_mismatch, "refinement parameter count mismatch");
  require(x.c == cfg_.in_channels, Errc::shape_mismatch,
          "refinement module expects " + std::to_string(cfg_.in_channels) + " input channels, got " +
              std::to_string(x.c));
  HfrmState<T> local;
  HfrmState<T>& s = state ? *state : local;
  s.x = x;
  s.h_in.clear();
  s.pre.clear();
  s.act.clear();
  Tensor<T> h = conv_in_.forward(p, x);
  for (int b = 0; b < cfg_.blocks; ++b) {
    s.h_in.push_back(h);
    s.pre.push_back(conv_a_[b].forward(p, h));
    s.act.push_back(silu(s.pre.back()));
    add_inplace(h, conv_b_[b].forward(p, s.act.back()));
  }
  s.h_final = std::move(h);
  s.a_final = silu(s.h_final);
  Tensor<T> out = conv_out_.forward(p, s.a_final);
  for (int n = 0; n < x.n; ++n) {
    const T* src = x.channel(n, cfg_.skip_offset);
    T* dst = out.item(n);
    for (std::size_t i = 0; i < out.item_size(); ++i) dst[i] += src[i];
  }
  return out;
}

template <typename T>
void HfrmNet::backward(std::span<const T> p, const HfrmState<T>& s, const Tensor<T>& dy, std::span<T> grads) const {
  require(grads.size() == layout_.total, Errc::shape_mismatch, "refinement gradient buffer size mismatch");
  Tensor<T> dh = silu_backward(s.h_final, conv_out_.backward(p, s.a_final, dy, grads));
  for (int b = cfg_.blocks - 1; b >= 0; --b) {
    Tensor<T> dact = conv_b_[b].backward(p, s.act[b], dh, grads);
    add_inplace(dh, conv_a_[b].backward(p, s.h_in[b], silu_backward(s.pre[b], dact), grads));
  }
  conv_in_.backward(p, s.x, dh, grads);
}

template <typename T>
std::vector<T> init_params(const ParamLayout& layout, std::uint64_t seed) {
  std::vector<T> values(layout.total, T(0));
  std::mt19937_64 rng(seed);
  for (const ParamEntry& e : layout.entries) {
    std::size_t fan_in = 1;
    for (std::size_t d = 1; d < e.shape.size(); ++d) fan_in *= static_cast<std::size_t>(e.shape[d]);
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    switch (e.init) {
      case Init::zeros: break;
      case Init::ones:
        std::fill(values.begin() + e.offset, values.begin() + e.offset + e.count, T(1));
        break;
      case Init::small_uniform: bound *= 0.1; [[fallthrough]];
      case Init::fan_in_uniform: {
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (std::size_t i = 0; i < e.count; ++i) values[e.offset + i] = static_cast<T>(dist(rng));
        break;
      }
    }
  }
  return values;
}

#define WAVEDM_INSTANTIATE(T)                                                                                     \
  template Tensor<T> ResBlock::forward<T>(std::span<const T>, const Tensor<T>&, const Tensor<T>&,                 \
                                          ResBlockCache<T>&) const;                                               \
  template Tensor<T> ResBlock::backward<T>(std::span<const T>, const ResBlockCache<T>&, const Tensor<T>&,         \
                                           const Tensor<T>&, std::span<T>, Tensor<T>&) const;                     \
  template Tensor<T> EstimatorNet::forward<T>(std::span<const T>, const Tensor<T>&, std::span<const int>,         \
                                              EstimatorState<T>*) const;                                          \
  template void EstimatorNet::backward<T>(std::span<const T>, const EstimatorState<T>&, const Tensor<T>&,         \
                                          std::span<T>) const;                                                    \
  template Tensor<T> HfrmNet::forward<T>(std::span<const T>, const Tensor<T>&, HfrmState<T>*) const;              \
  template void HfrmNet::backward<T>(std::span<const T>, const HfrmState<T>&, const Tensor<T>&, std::span<T>) const; \
  template std::vector<T> init_params<T>(const ParamLayout&, std::uint64_t);

WAVEDM_INSTANTIATE(float)
WAVEDM_INSTANTIATE(double)

#undef WAVEDM_INSTANTIATE

}  // namespace wavedm::nn
