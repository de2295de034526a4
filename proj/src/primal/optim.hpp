#pragma once

#include <vector>

#include "primal/tensor.hpp"

namespace primal::nd {

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  bool clip_enabled = true;  // clip gradients by global norm before the update
  double clip_norm = 5.0;
};

// Bias-corrected Adam over a fixed parameter list. Grads must be populated
// by backward() before each step; they are cleared after the update.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig config = {});

  void step();

  int64_t steps_taken() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  AdamConfig config_;
  int64_t t_ = 0;
};

}  // namespace primal::nd
