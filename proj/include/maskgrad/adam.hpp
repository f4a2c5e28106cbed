#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "maskgrad/tensor.hpp"

namespace maskgrad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias-corrected first and second moments.
class Adam {
 public:
  explicit Adam(AdamConfig config = {});

  // Updates params[i] in place using grads[i]. The parameter list must keep
  // the same shapes and order across calls.
  void step(std::span<Tensor* const> params, std::span<const Tensor* const> grads);

  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace maskgrad
