#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace wavedm::nn {

// NCHW activations.
template <typename T>
struct Tensor {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_), data(static_cast<std::size_t>(n_) * c_ * h_ * w_, T(0)) {}

  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  std::size_t item_size() const { return static_cast<std::size_t>(c) * h * w; }
  std::size_t size() const { return data.size(); }
  T* item(int i) { return data.data() + i * item_size(); }
  const T* item(int i) const { return data.data() + i * item_size(); }
  T* channel(int i, int ch) { return item(i) + ch * plane(); }
  const T* channel(int i, int ch) const { return item(i) + ch * plane(); }
  bool same_shape(const Tensor& o) const { return n == o.n && c == o.c && h == o.h && w == o.w; }
};

enum class Init {
  fan_in_uniform,   // U(-1/sqrt(fan_in), 1/sqrt(fan_in))
  small_uniform,    // fan_in_uniform scaled by 0.1
  zeros,
  ones,
};

struct ParamEntry {
  std::string name;
  std::vector<int> shape;
  std::size_t offset = 0;
  std::size_t count = 0;
  Init init = Init::zeros;

  bool operator==(const ParamEntry&) const = default;
};

// Names, shapes and offsets of every parameter inside one flat buffer.
struct ParamLayout {
  std::vector<ParamEntry> entries;
  std::size_t total = 0;

  std::size_t add(std::string name, std::vector<int> shape, Init init) {
    std::size_t count = 1;
    for (int d : shape) count *= static_cast<std::size_t>(d);
    entries.push_back({std::move(name), std::move(shape), total, count, init});
    total += count;
    return entries.back().offset;
  }

  bool operator==(const ParamLayout&) const = default;
};

}  // namespace wavedm::nn
