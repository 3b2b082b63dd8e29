#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace advxfer::nn {

inline std::vector<float> softmax(std::span<const float> logits) {
  std::vector<float> out(logits.size());
  const float zmax = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = static_cast<float>(std::exp(static_cast<double>(logits[i]) - zmax));
    sum += out[i];
  }
  for (auto& v : out) v = static_cast<float>(v / sum);
  return out;
}

struct CeLossGrad {
  double loss = 0.0;
  std::vector<float> dlogits;
};

/// Cross-entropy of softmax(logits) against a one-hot target, with the
/// gradient w.r.t. the logits.
inline CeLossGrad cross_entropy_with_grad(std::span<const float> logits, int target) {
  if (target < 0 || target >= static_cast<int>(logits.size()))
    throw std::invalid_argument("cross_entropy: target " + std::to_string(target) +
                                " outside [0, " + std::to_string(logits.size()) + ")");
  const float zmax = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (const float z : logits) sum += std::exp(static_cast<double>(z) - zmax);
  CeLossGrad out;
  out.loss = std::log(sum) + zmax - logits[static_cast<std::size_t>(target)];
  out.dlogits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double p = std::exp(static_cast<double>(logits[i]) - zmax) / sum;
    out.dlogits[i] = static_cast<float>(p - (static_cast<int>(i) == target ? 1.0 : 0.0));
  }
  return out;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct BceLossGrad {
  double loss = 0.0;
  float dlogit = 0.0f;
};

/// Binary cross-entropy on a logit: -(t log s + (1-t) log(1-s)), numerically
/// stable form.
inline BceLossGrad bce_with_logit(float logit, double target) {
  BceLossGrad out;
  const double z = logit;
  out.loss = std::max(z, 0.0) - z * target + std::log1p(std::exp(-std::abs(z)));
  out.dlogit = static_cast<float>(sigmoid(z) - target);
  return out;
}

inline bool all_finite(std::span<const float> v) {
  for (const float x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace advxfer::nn
