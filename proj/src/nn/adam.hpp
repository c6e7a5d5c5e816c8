#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "errors.hpp"

namespace wavedm::nn {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::size_t count, AdamConfig cfg) : cfg_(cfg), m_(count, 0.0), v_(count, 0.0) {}

  long steps() const { return step_; }

  template <typename T>
  void update(std::span<T> params, std::span<const T> grads) {
    require(params.size() == m_.size() && grads.size() == m_.size(), Errc::shape_mismatch, "optimizer size mismatch");
    ++step_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grads[i];
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m_[i] / c1;
      const double vhat = v_[i] / c2;
      params[i] = static_cast<T>(params[i] - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
    }
  }

 private:
  AdamConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  long step_ = 0;
};

}  // namespace wavedm::nn
