#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace advxfer::nn {

/// SGD with classical momentum. `scale` folds in the 1/batch factor.
class SgdMomentum {
 public:
  SgdMomentum(std::size_t n_params, double momentum)
      : momentum_(momentum), velocity_(n_params, 0.0f) {}

  void step(std::span<float> params, std::span<const float> grads, double lr,
            double scale) {
    if (params.size() != velocity_.size() || grads.size() != velocity_.size())
      throw std::invalid_argument("SgdMomentum: size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      velocity_[i] = static_cast<float>(momentum_ * velocity_[i] + grads[i] * scale);
      params[i] -= static_cast<float>(lr * velocity_[i]);
    }
  }

 private:
  double momentum_;
  std::vector<float> velocity_;
};

class Adam {
 public:
  Adam(std::size_t n_params, double lr, double beta1 = 0.5, double beta2 = 0.999,
       double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
        m_(n_params, 0.0f), v_(n_params, 0.0f) {}

  void step(std::span<float> params, std::span<const float> grads, double scale) {
    if (params.size() != m_.size() || grads.size() != m_.size())
      throw std::invalid_argument("Adam: size mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grads[i] * scale;
      m_[i] = static_cast<float>(beta1_ * m_[i] + (1.0 - beta1_) * g);
      v_[i] = static_cast<float>(beta2_ * v_[i] + (1.0 - beta2_) * g * g);
      params[i] -= static_cast<float>(lr_ * (m_[i] / bc1) /
                                      (std::sqrt(v_[i] / bc2) + eps_));
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<float> m_, v_;
};

}  // namespace advxfer::nn
