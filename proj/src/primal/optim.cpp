#include "primal/optim.hpp"

#include <cmath>

#include "primal/errors.hpp"

namespace primal::nd {

Adam::Adam(std::vector<Tensor> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Tensor& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step() {
  for (const Tensor& p : params_)
    if (!p.has_grad()) throw Error("adam_step: missing gradient on a parameter");

  if (config_.clip_enabled) {
    double sq = 0;
    for (Tensor& p : params_)
      for (double g : p.grad()) sq += g * g;
    double norm = std::sqrt(sq);
    if (norm > config_.clip_norm) {
      double s = config_.clip_norm / norm;
      for (Tensor& p : params_)
        for (double& g : p.mutable_grad()) g *= s;
    }
  }

  ++t_;
  double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Tensor& p = params_[i];
    auto grad = p.grad();
    auto data = p.mutable_data();
    for (size_t k = 0; k < grad.size(); ++k) {
      double g = grad[k];
      m_[i][k] = config_.beta1 * m_[i][k] + (1.0 - config_.beta1) * g;
      v_[i][k] = config_.beta2 * v_[i][k] + (1.0 - config_.beta2) * g * g;
      double mhat = m_[i][k] / bc1;
      double vhat = v_[i][k] / bc2;
      data[k] -= config_.alpha * mhat / (std::sqrt(vhat) + config_.eps);
    }
    p.zero_grad();
  }
}

}  // namespace primal::nd
