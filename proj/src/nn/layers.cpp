#include "nn/layers.hpp"

#include <Eigen/Core>
#include <cmath>
#include <numeric>

#include "errors.hpp"

namespace wavedm::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

// Unfolds x into a (in * k * k) x (n * out_h * out_w) row-major matrix.
template <typename T>
RowMat<T> im2col(const Tensor<T>& x, int k, int stride, int out_h, int out_w) {
  const int pad = k / 2;
  const int plane_out = out_h * out_w;
  const Eigen::Index cols = static_cast<Eigen::Index>(x.n) * plane_out;
  RowMat<T> col(static_cast<Eigen::Index>(x.c) * k * k, cols);
  for (int ci = 0; ci < x.c; ++ci) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = col.row((ci * k + ky) * k + kx).data();
        for (int n = 0; n < x.n; ++n) {
          const T* src = x.channel(n, ci);
          T* dst = row + static_cast<std::size_t>(n) * plane_out;
          for (int oy = 0; oy < out_h; ++oy) {
            const int iy = oy * stride + ky - pad;
            for (int ox = 0; ox < out_w; ++ox) {
              const int ix = ox * stride + kx - pad;
              dst[oy * out_w + ox] = (iy >= 0 && iy < x.h && ix >= 0 && ix < x.w) ? src[iy * x.w + ix] : T(0);
            }
          }
        }
      }
    }
  }
  return col;
}

template <typename T>
void col2im(const RowMat<T>& col, int k, int stride, int out_h, int out_w, Tensor<T>& dx) {
  const int pad = k / 2;
  const int plane_out = out_h * out_w;
  for (int ci = 0; ci < dx.c; ++ci) {
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row = col.row((ci * k + ky) * k + kx).data();
        for (int n = 0; n < dx.n; ++n) {
          T* dst = dx.channel(n, ci);
          const T* src = row + static_cast<std::size_t>(n) * plane_out;
          for (int oy = 0; oy < out_h; ++oy) {
            const int iy = oy * stride + ky - pad;
            if (iy < 0 || iy >= dx.h) continue;
            for (int ox = 0; ox < out_w; ++ox) {
              const int ix = ox * stride + kx - pad;
              if (ix >= 0 && ix < dx.w) dst[iy * dx.w + ix] += src[oy * out_w + ox];
            }
          }
        }
      }
    }
  }
}

void check_channels(const char* layer, int expected, int got) {
  if (expected != got) {
    fail(Errc::shape_mismatch, std::string(layer) + " expects " + std::to_string(expected) + " input channels, got " +
                                   std::to_string(got));
  }
}

}  // namespace

Conv2d Conv2d::make(ParamLayout& layout, const std::string& name, int in, int out, int kernel, int stride,
                    Init init) {
  require(in > 0 && out > 0 && kernel > 0 && kernel % 2 == 1 && stride > 0, Errc::invalid_argument,
          "invalid conv configuration for " + name);
  Conv2d c;
  c.in = in;
  c.out = out;
  c.kernel = kernel;
  c.stride = stride;
  c.weight = layout.add(name + ".weight", {out, in, kernel, kernel}, init);
  c.bias = layout.add(name + ".bias", {out}, Init::zeros);
  return c;
}

template <typename T>
Tensor<T> Conv2d::forward(std::span<const T> params, const Tensor<T>& x) const {
  check_channels("conv", in, x.c);
  const int oh = out_size(x.h);
  const int ow = out_size(x.w);
  const int plane_out = oh * ow;
  ConstMapMat<T> wmat(params.data() + weight, out, static_cast<Eigen::Index>(in) * kernel * kernel);
  RowMat<T> y;
  if (kernel == 1 && stride == 1 && x.n == 1) {
    ConstMapMat<T> xin(x.data.data(), in, plane_out);
    y.noalias() = wmat * xin;
  } else {
    RowMat<T> col = im2col(x, kernel, stride, oh, ow);
    y.noalias() = wmat * col;
  }
  Tensor<T> out_t(x.n, out, oh, ow);
  for (int n = 0; n < x.n; ++n) {
    for (int o = 0; o < out; ++o) {
      const T* src = y.row(o).data() + static_cast<std::size_t>(n) * plane_out;
      T* dst = out_t.channel(n, o);
      const T b = params[bias + o];
      for (int p = 0; p < plane_out; ++p) dst[p] = src[p] + b;
    }
  }
  return out_t;
}

template <typename T>
Tensor<T> Conv2d::backward(std::span<const T> params, const Tensor<T>& x, const Tensor<T>& dy,
                           std::span<T> grads) const {
  const int oh = out_size(x.h);
  const int ow = out_size(x.w);
  const int plane_out = oh * ow;
  require(dy.n == x.n && dy.c == out && dy.h == oh && dy.w == ow, Errc::shape_mismatch, "conv gradient shape");
  const Eigen::Index k_rows = static_cast<Eigen::Index>(in) * kernel * kernel;
  const Eigen::Index cols = static_cast<Eigen::Index>(x.n) * plane_out;

  RowMat<T> dymat(out, cols);
  for (int n = 0; n < x.n; ++n) {
    for (int o = 0; o < out; ++o) {
      const T* src = dy.channel(n, o);
      std::copy(src, src + plane_out, dymat.row(o).data() + static_cast<std::size_t>(n) * plane_out);
    }
  }
  for (int o = 0; o < out; ++o) grads[bias + o] += dymat.row(o).sum();

  ConstMapMat<T> wmat(params.data() + weight, out, k_rows);
  MapMat<T> dw(grads.data() + weight, out, k_rows);
  RowMat<T> col = im2col(x, kernel, stride, oh, ow);
  dw.noalias() += dymat * col.transpose();

  RowMat<T> dcol;
  dcol.noalias() = wmat.transpose() * dymat;
  Tensor<T> dx(x.n, x.c, x.h, x.w);
  col2im(dcol, kernel, stride, oh, ow, dx);
  return dx;
}

Linear Linear::make(ParamLayout& layout, const std::string& name, int in, int out, Init init) {
  Linear l;
  l.in = in;
  l.out = out;
  l.weight = layout.add(name + ".weight", {out, in}, init);
  l.bias = layout.add(name + ".bias", {out}, Init::zeros);
  return l;
}

template <typename T>
Tensor<T> Linear::forward(std::span<const T> params, const Tensor<T>& x) const {
  check_channels("linear", in, x.c);
  ConstMapMat<T> xm(x.data.data(), x.n, in);
  ConstMapMat<T> wm(params.data() + weight, out, in);
  Tensor<T> y(x.n, out, 1, 1);
  MapMat<T> ym(y.data.data(), x.n, out);
  ym.noalias() = xm * wm.transpose();
  for (int n = 0; n < x.n; ++n) {
    for (int o = 0; o < out; ++o) ym(n, o) += params[bias + o];
  }
  return y;
}

template <typename T>
Tensor<T> Linear::backward(std::span<const T> params, const Tensor<T>& x, const Tensor<T>& dy,
                           std::span<T> grads) const {
  ConstMapMat<T> xm(x.data.data(), x.n, in);
  ConstMapMat<T> dym(dy.data.data(), x.n, out);
  ConstMapMat<T> wm(params.data() + weight, out, in);
  MapMat<T> dw(grads.data() + weight, out, in);
  dw.noalias() += dym.transpose() * xm;
  for (int o = 0; o < out; ++o) grads[bias + o] += dym.col(o).sum();
  Tensor<T> dx(x.n, in, 1, 1);
  MapMat<T> dxm(dx.data.data(), x.n, in);
  dxm.noalias() = dym * wm;
  return dx;
}

GroupNorm GroupNorm::make(ParamLayout& layout, const std::string& name, int channels) {
  GroupNorm g;
  g.channels = channels;
  g.groups = std::gcd(channels, 8);
  g.gamma = layout.add(name + ".gamma", {channels}, Init::ones);
  g.beta = layout.add(name + ".beta", {channels}, Init::zeros);
  return g;
}

template <typename T>
Tensor<T> GroupNorm::forward(std::span<const T> params, const Tensor<T>& x, GroupNormCache<T>& cache) const {
  check_channels("group norm", channels, x.c);
  constexpr double kEps = 1e-5;
  const int per_group = channels / groups;
  const std::size_t count = static_cast<std::size_t>(per_group) * x.plane();
  cache.xhat = Tensor<T>(x.n, x.c, x.h, x.w);
  cache.inv_std.assign(static_cast<std::size_t>(x.n) * groups, T(0));
  Tensor<T> y(x.n, x.c, x.h, x.w);
  for (int n = 0; n < x.n; ++n) {
    for (int g = 0; g < groups; ++g) {
      const T* src = x.channel(n, g * per_group);
      double mean = 0.0;
      for (std::size_t i = 0; i < count; ++i) mean += src[i];
      mean /= static_cast<double>(count);
      double var = 0.0;
      for (std::size_t i = 0; i < count; ++i) var += (src[i] - mean) * (src[i] - mean);
      var /= static_cast<double>(count);
      const double inv = 1.0 / std::sqrt(var + kEps);
      cache.inv_std[static_cast<std::size_t>(n) * groups + g] = static_cast<T>(inv);
      T* xh = cache.xhat.channel(n, g * per_group);
      T* dst = y.channel(n, g * per_group);
      for (int cc = 0; cc < per_group; ++cc) {
        const int ch = g * per_group + cc;
        const T ga = params[gamma + ch];
        const T be = params[beta + ch];
        for (std::size_t p = 0; p < x.plane(); ++p) {
          const std::size_t i = cc * x.plane() + p;
          xh[i] = static_cast<T>((src[i] - mean) * inv);
          dst[i] = xh[i] * ga + be;
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> GroupNorm::backward(std::span<const T> params, const GroupNormCache<T>& cache, const Tensor<T>& dy,
                              std::span<T> grads) const {
  const Tensor<T>& xhat = cache.xhat;
  require(dy.same_shape(xhat), Errc::shape_mismatch, "group norm gradient shape");
  const int per_group = channels / groups;
  const std::size_t plane = xhat.plane();
  const std::size_t count = static_cast<std::size_t>(per_group) * plane;
  Tensor<T> dx(dy.n, dy.c, dy.h, dy.w);
  std::vector<T> dxhat(count);
  for (int n = 0; n < dy.n; ++n) {
    for (int g = 0; g < groups; ++g) {
      const T* d = dy.channel(n, g * per_group);
      const T* xh = xhat.channel(n, g * per_group);
      double s1 = 0.0;
      double s2 = 0.0;
      for (int cc = 0; cc < per_group; ++cc) {
        const int ch = g * per_group + cc;
        const T ga = params[gamma + ch];
        double dgamma = 0.0;
        double dbeta = 0.0;
        for (std::size_t p = 0; p < plane; ++p) {
          const std::size_t i = cc * plane + p;
          dgamma += static_cast<double>(d[i]) * xh[i];
          dbeta += d[i];
          dxhat[i] = d[i] * ga;
          s1 += dxhat[i];
          s2 += static_cast<double>(dxhat[i]) * xh[i];
        }
        grads[gamma + ch] += static_cast<T>(dgamma);
        grads[beta + ch] += static_cast<T>(dbeta);
      }
      const double inv = cache.inv_std[static_cast<std::size_t>(n) * groups + g];
      const double m = static_cast<double>(count);
      T* out = dx.channel(n, g * per_group);
      for (std::size_t i = 0; i < count; ++i) {
        out[i] = static_cast<T>(inv / m * (m * dxhat[i] - s1 - xh[i] * s2));
      }
    }
  }
  return dx;
}

template <typename T>
Tensor<T> silu(const Tensor<T>& x) {
  Tensor<T> y(x.n, x.c, x.h, x.w);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T v = x.data[i];
    y.data[i] = v / (T(1) + std::exp(-v));
  }
  return y;
}

template <typename T>
Tensor<T> silu_backward(const Tensor<T>& x, const Tensor<T>& dy) {
  Tensor<T> dx(x.n, x.c, x.h, x.w);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T v = x.data[i];
    const T s = T(1) / (T(1) + std::exp(-v));
    dx.data[i] = dy.data[i] * s * (T(1) + v * (T(1) - s));
  }
  return dx;
}

template <typename T>
Tensor<T> upsample2(const Tensor<T>& x) {
  Tensor<T> y(x.n, x.c, x.h * 2, x.w * 2);
  for (int n = 0; n < x.n; ++n) {
    for (int c = 0; c < x.c; ++c) {
      const T* src = x.channel(n, c);
      T* dst = y.channel(n, c);
      for (int yy = 0; yy < y.h; ++yy) {
        for (int xx = 0; xx < y.w; ++xx) dst[yy * y.w + xx] = src[(yy / 2) * x.w + xx / 2];
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> upsample2_backward(const Tensor<T>& dy) {
  Tensor<T> dx(dy.n, dy.c, dy.h / 2, dy.w / 2);
  for (int n = 0; n < dy.n; ++n) {
    for (int c = 0; c < dy.c; ++c) {
      const T* src = dy.channel(n, c);
      T* dst = dx.channel(n, c);
      for (int yy = 0; yy < dy.h; ++yy) {
        for (int xx = 0; xx < dy.w; ++xx) dst[(yy / 2) * dx.w + xx / 2] += src[yy * dy.w + xx];
      }
    }
  }
  return dx;
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.n == b.n && a.h == b.h && a.w == b.w, Errc::shape_mismatch, "concat operands differ in shape");
  Tensor<T> y(a.n, a.c + b.c, a.h, a.w);
  for (int n = 0; n < a.n; ++n) {
    std::copy(a.item(n), a.item(n) + a.item_size(), y.item(n));
    std::copy(b.item(n), b.item(n) + b.item_size(), y.item(n) + a.item_size());
  }
  return y;
}

template <typename T>
void split_channels(const Tensor<T>& d, int first_channels, Tensor<T>& da, Tensor<T>& db) {
  da = Tensor<T>(d.n, first_channels, d.h, d.w);
  db = Tensor<T>(d.n, d.c - first_channels, d.h, d.w);
  for (int n = 0; n < d.n; ++n) {
    std::copy(d.item(n), d.item(n) + da.item_size(), da.item(n));
    std::copy(d.item(n) + da.item_size(), d.item(n) + d.item_size(), db.item(n));
  }
}

template <typename T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b) {
  require(a.same_shape(b), Errc::shape_mismatch, "add operands differ in shape");
  for (std::size_t i = 0; i < a.size(); ++i) a.data[i] += b.data[i];
}

template <typename T>
Tensor<T> timestep_embedding(std::span<const int> steps, int dim) {
  require(dim >= 2 && dim % 2 == 0, Errc::invalid_argument, "timestep embedding dim must be even");
  const int half = dim / 2;
  Tensor<T> e(static_cast<int>(steps.size()), dim, 1, 1);
  for (std::size_t n = 0; n < steps.size(); ++n) {
    for (int i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * i / half);
      const double arg = steps[n] * freq;
      e.data[n * dim + i] = static_cast<T>(std::sin(arg));
      e.data[n * dim + half + i] = static_cast<T>(std::cos(arg));
    }
  }
  return e;
}

#define WAVEDM_INSTANTIATE(T)                                                                                  \
  template Tensor<T> Conv2d::forward<T>(std::span<const T>, const Tensor<T>&) const;                          \
  template Tensor<T> Conv2d::backward<T>(std::span<const T>, const Tensor<T>&, const Tensor<T>&, std::span<T>) \
      const;                                                                                                   \
  template Tensor<T> Linear::forward<T>(std::span<const T>, const Tensor<T>&) const;                          \
  template Tensor<T> Linear::backward<T>(std::span<const T>, const Tensor<T>&, const Tensor<T>&, std::span<T>) \
      const;                                                                                                   \
  template Tensor<T> GroupNorm::forward<T>(std::span<const T>, const Tensor<T>&, GroupNormCache<T>&) const;    \
  template Tensor<T> GroupNorm::backward<T>(std::span<const T>, const GroupNormCache<T>&, const Tensor<T>&,    \
                                            std::span<T>) const;                                               \
  template Tensor<T> silu<T>(const Tensor<T>&);                                                                \
  template Tensor<T> silu_backward<T>(const Tensor<T>&, const Tensor<T>&);                                     \
  template Tensor<T> upsample2<T>(const Tensor<T>&);                                                           \
  template Tensor<T> upsample2_backward<T>(const Tensor<T>&);                                                  \
  template Tensor<T> concat_channels<T>(const Tensor<T>&, const Tensor<T>&);                                   \
  template void split_channels<T>(const Tensor<T>&, int, Tensor<T>&, Tensor<T>&);                              \
  template void add_inplace<T>(Tensor<T>&, const Tensor<T>&);                                                  \
  template Tensor<T> timestep_embedding<T>(std::span<const int>, int);

WAVEDM_INSTANTIATE(float)
WAVEDM_INSTANTIATE(double)

#undef WAVEDM_INSTANTIATE

}  // namespace wavedm::nn
