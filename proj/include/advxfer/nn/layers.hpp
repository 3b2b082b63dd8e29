#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "advxfer/core/tensor.hpp"

namespace advxfer::nn {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::MatrixXf;

/// Per-layer scratch used by one forward/backward pair. One instance per
/// (layer, thread); layers themselves stay immutable and shareable.
struct LayerScratch {
  std::vector<float> cols;  // im2col buffer
  std::vector<int> idx;     // pool argmax
  std::vector<std::vector<float>> acts;   // composite-layer intermediates
  std::vector<LayerScratch> children;     // composite-layer sub-scratch
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual Shape3 in_shape() const = 0;
  virtual Shape3 out_shape() const = 0;
  virtual std::size_t n_params() const { return 0; }
  virtual void init_params(std::span<float> /*w*/, std::mt19937_64& /*rng*/) const {}
  /// Re-impose any weight constraint; called after init and every step.
  virtual void project(std::span<float> /*w*/) const {}

  virtual void forward(const float* x, const float* w, float* y,
                       LayerScratch& s) const = 0;
  // dx may be null when the input gradient is not needed; dw may be null for
  // frozen-parameter passes (attacks differentiate w.r.t. pixels only).
  virtual void backward(const float* x, const float* y, const float* w,
                        const float* dy, float* dx, float* dw,
                        LayerScratch& s) const = 0;
};

namespace detail {

inline void im2col(const float* x, Shape3 in, int k, int pad, float* cols) {
  const int hw = in.h * in.w;
  const int krows = in.c * k * k;
  // cols is krows x hw, column-major (one column per output pixel)
  for (int oy = 0; oy < in.h; ++oy) {
    for (int ox = 0; ox < in.w; ++ox) {
      float* col = cols + static_cast<std::size_t>(oy * in.w + ox) * krows;
      int r = 0;
      for (int c = 0; c < in.c; ++c) {
        const float* plane = x + static_cast<std::size_t>(c) * hw;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy + ky - pad;
          for (int kx = 0; kx < k; ++kx, ++r) {
            const int ix = ox + kx - pad;
            col[r] = (iy >= 0 && iy < in.h && ix >= 0 && ix < in.w)
                         ? plane[iy * in.w + ix]
                         : 0.0f;
          }
        }
      }
    }
  }
}

inline void col2im_add(const float* cols, Shape3 in, int k, int pad, float* dx) {
  const int hw = in.h * in.w;
  const int krows = in.c * k * k;
  for (int oy = 0; oy < in.h; ++oy) {
    for (int ox = 0; ox < in.w; ++ox) {
      const float* col = cols + static_cast<std::size_t>(oy * in.w + ox) * krows;
      int r = 0;
      for (int c = 0; c < in.c; ++c) {
        float* plane = dx + static_cast<std::size_t>(c) * hw;
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy + ky - pad;
          for (int kx = 0; kx < k; ++kx, ++r) {
            const int ix = ox + kx - pad;
            if (iy >= 0 && iy < in.h && ix >= 0 && ix < in.w)
              plane[iy * in.w + ix] += col[r];
          }
        }
      }
    }
  }
}

}  // namespace detail

/// 2-D convolution, stride 1, zero 'same' padding, with bias.
class Conv2d : public Layer {
 public:
  Conv2d(Shape3 in, int out_channels, int kernel)
      : in_(in), out_({out_channels, in.h, in.w}), k_(kernel), pad_(kernel / 2) {
    if (kernel % 2 == 0) throw std::invalid_argument("Conv2d: kernel must be odd");
  }

  std::string kind() const override { return "conv"; }
  Shape3 in_shape() const override { return in_; }
  Shape3 out_shape() const override { return out_; }
  std::size_t n_params() const override {
    return weight_count() + static_cast<std::size_t>(out_.c);
  }

  void init_params(std::span<float> w, std::mt19937_64& rng) const override {
    const double fan_in = static_cast<double>(in_.c) * k_ * k_;
    std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / fan_in));
    for (std::size_t i = 0; i < weight_count(); ++i)
      w[i] = static_cast<float>(gauss(rng));
    for (std::size_t i = weight_count(); i < w.size(); ++i) w[i] = 0.0f;
  }

  void forward(const float* x, const float* w, float* y,
               LayerScratch& s) const override {
    const int hw = in_.h * in_.w;
    const int krows = in_.c * k_ * k_;
    s.cols.resize(static_cast<std::size_t>(krows) * hw);
    detail::im2col(x, in_, k_, pad_, s.cols.data());
    Eigen::Map<const RowMat> W(w, out_.c, krows);
    Eigen::Map<const ColMat> cols(s.cols.data(), krows, hw);
    Eigen::Map<RowMat> Y(y, out_.c, hw);
    Y.noalias() = W * cols;
    const float* bias = w + weight_count();
    for (int o = 0; o < out_.c; ++o) Y.row(o).array() += bias[o];
  }

  void backward(const float* /*x*/, const float* /*y*/, const float* w,
                const float* dy, float* dx, float* dw,
                LayerScratch& s) const override {
    const int hw = in_.h * in_.w;
    const int krows = in_.c * k_ * k_;
    Eigen::Map<const RowMat> dY(dy, out_.c, hw);
    Eigen::Map<const ColMat> cols(s.cols.data(), krows, hw);
    if (dw != nullptr) {
      Eigen::Map<RowMat> dW(dw, out_.c, krows);
      dW.noalias() += dY * cols.transpose();
      float* db = dw + weight_count();
      for (int o = 0; o < out_.c; ++o) db[o] += dY.row(o).sum();
    }
    if (dx != nullptr) {
      Eigen::Map<const RowMat> W(w, out_.c, krows);
      ColMat dcols = W.transpose() * dY;  // krows x hw
      std::fill(dx, dx + in_.count(), 0.0f);
      detail::col2im_add(dcols.data(), in_, k_, pad_, dx);
    }
  }

 protected:
  std::size_t weight_count() const {
    return static_cast<std::size_t>(out_.c) * in_.c * k_ * k_;
  }

  Shape3 in_, out_;
  int k_, pad_;
};

/// Convolution whose filters are prediction-error kernels: per (out, in)
/// slice the center weight is -1 and the remaining weights sum to 1. The
/// constraint is projected at init and after every optimizer step. No bias.
class ConstrainedConv2d : public Conv2d {
 public:
  using Conv2d::Conv2d;

  std::string kind() const override { return "constrained_conv"; }
  std::size_t n_params() const override { return weight_count(); }

  void init_params(std::span<float> w, std::mt19937_64& rng) const override {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : w) v = static_cast<float>(std::abs(gauss(rng)) + 0.05);
    project(w);
  }

  void project(std::span<float> w) const override {
    const int kk = k_ * k_;
    const int center = kk / 2;
    for (int slice = 0; slice < out_.c * in_.c; ++slice) {
      float* f = w.data() + static_cast<std::size_t>(slice) * kk;
      double sum = 0.0;
      for (int i = 0; i < kk; ++i)
        if (i != center) sum += f[i];
      if (std::abs(sum) < 1e-6) {
        for (int i = 0; i < kk; ++i) f[i] = 1.0f / static_cast<float>(kk - 1);
        sum = 1.0;
      }
      for (int i = 0; i < kk; ++i)
        if (i != center) f[i] = static_cast<float>(f[i] / sum);
      f[center] = -1.0f;
    }
  }

  void forward(const float* x, const float* w, float* y,
               LayerScratch& s) const override {
    const int hw = in_.h * in_.w;
    const int krows = in_.c * k_ * k_;
    s.cols.resize(static_cast<std::size_t>(krows) * hw);
    detail::im2col(x, in_, k_, pad_, s.cols.data());
    Eigen::Map<const RowMat> W(w, out_.c, krows);
    Eigen::Map<const ColMat> cols(s.cols.data(), krows, hw);
    Eigen::Map<RowMat> Y(y, out_.c, hw);
    Y.noalias() = W * cols;
  }

  void backward(const float* /*x*/, const float* /*y*/, const float* w,
                const float* dy, float* dx, float* dw,
                LayerScratch& s) const override {
    const int hw = in_.h * in_.w;
    const int krows = in_.c * k_ * k_;
    Eigen::Map<const RowMat> dY(dy, out_.c, hw);
    if (dw != nullptr) {
      Eigen::Map<const ColMat> cols(s.cols.data(), krows, hw);
      Eigen::Map<RowMat> dW(dw, out_.c, krows);
      dW.noalias() += dY * cols.transpose();
    }
    if (dx != nullptr) {
      Eigen::Map<const RowMat> W(w, out_.c, krows);
      ColMat dcols = W.transpose() * dY;
      std::fill(dx, dx + in_.count(), 0.0f);
      detail::col2im_add(dcols.data(), in_, k_, pad_, dx);
    }
  }
};

/// Fixed elementwise gain. Prediction-error residuals live at 8-bit LSB
/// scale; a constant gain keeps downstream initializations in range.
class Scale : public Layer {
 public:
  Scale(Shape3 in, float factor) : in_(in), factor_(factor) {}
  std::string kind() const override { return "scale"; }
  Shape3 in_shape() const override { return in_; }
  Shape3 out_shape() const override { return in_; }

  void forward(const float* x, const float*, float* y, LayerScratch&) const override {
    const std::size_t n = in_.count();
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * factor_;
  }
  void backward(const float*, const float*, const float*, const float* dy,
                float* dx, float*, LayerScratch&) const override {
    if (dx == nullptr) return;
    const std::size_t n = in_.count();
    for (std::size_t i = 0; i < n; ++i) dx[i] = dy[i] * factor_;
  }

 private:
  Shape3 in_;
  float factor_;
};

class Relu : public Layer {
 public:
  explicit Relu(Shape3 in) : in_(in) {}
  std::string kind() const override { return "relu"; }
  Shape3 in_shape() const override { return in_; }
  Shape3 out_shape() const override { return in_; }

  void forward(const float* x, const float*, float* y, LayerScratch&) const override {
    const std::size_t n = in_.count();
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
  }
  void backward(const float*, const float* y, const float*, const float* dy,
                float* dx, float*, LayerScratch&) const override {
    if (dx == nullptr) return;
    const std::size_t n = in_.count();
    for (std::size_t i = 0; i < n; ++i) dx[i] = y[i] > 0.0f ? dy[i] : 0.0f;
  }

 private:
  Shape3 in_;
};

/// 2x2 max pooling, stride 2. Input spatial dims must be even.
class MaxPool2 : public Layer {
 public:
  explicit MaxPool2(Shape3 in) : in_(in), out_({in.c, in.h / 2, in.w / 2}) {
    if (in.h % 2 != 0 || in.w % 2 != 0)
      throw std::invalid_argument("MaxPool2: input dims must be even, got " + in.str());
  }
  std::string kind() const override { return "maxpool2"; }
  Shape3 in_shape() const override { return in_; }
  Shape3 out_shape() const override { return out_; }

  void forward(const float* x, const float*, float* y, LayerScratch& s) const override {
    s.idx.resize(out_.count());
    std::size_t o = 0;
    for (int c = 0; c < in_.c; ++c) {
      const float* plane = x + static_cast<std::size_t>(c) * in_.h * in_.w;
      for (int oy = 0; oy < out_.h; ++oy)
        for (int ox = 0; ox < out_.w; ++ox, ++o) {
          const int base = (oy * 2) * in_.w + ox * 2;
          int best = base;
          float bv = plane[base];
          for (const int cand : {base + 1, base + in_.w, base + in_.w + 1})
            if (plane[cand] > bv) { bv = plane[cand]; best = cand; }
          y[o] = bv;
          s.idx[o] = static_cast<int>(c * in_.h * in_.w + best);
        }
    }
  }
  void backward(const float*, const float*, const float*, const float* dy,
                float* dx, float*, LayerScratch& s) const override {
    if (dx == nullptr) return;
    std::fill(dx, dx + in_.count(), 0.0f);
    for (std::size_t o = 0; o < out_.count(); ++o)
      dx[static_cast<std::size_t>(s.idx[o])] += dy[o];
  }

 private:
  Shape3 in_, out_;
};

/// Residual block: x + conv2(relu(conv1(x))), channel-preserving.
class ResidualConvBlock : public Layer {
 public:
  ResidualConvBlock(Shape3 in, int kernel)
      : in_(in), conv1_(in, in.c, kernel), conv2_(in, in.c, kernel) {}

  std::string kind() const override { return "residual_conv"; }
  Shape3 in_shape() const override { return in_; }
  Shape3 out_shape() const override { return in_; }
  std::size_t n_params() const override {
    return conv1_.n_params() + conv2_.n_params();
  }

  void init_params(std::span<float> w, std::mt19937_64& rng) const override {
    conv1_.init_params(w.subspan(0, conv1_.n_params()), rng);
    conv2_.init_params(w.subspan(conv1_.n_params()), rng);
  }

  void forward(const float* x, const float* w, float* y,
               LayerScratch& s) const override {
    const std::size_t n = in_.count();
    s.acts.resize(2);
    s.children.resize(2);
    s.acts[0].resize(n);  // relu(conv1(x))
    s.acts[1].resize(n);  // conv2(...)
    conv1_.forward(x, w, s.acts[0].data(), s.children[0]);
    for (auto& v : s.acts[0]) v = v > 0.0f ? v : 0.0f;
    conv2_.forward(s.acts[0].data(), w + conv1_.n_params(), s.acts[1].data(),
                   s.children[1]);
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + s.acts[1][i];
  }

  void backward(const float* x, const float* /*y*/, const float* w,
                const float* dy, float* dx, float* dw,
                LayerScratch& s) const override {
    const std::size_t n = in_.count();
    std::vector<float> dmid(n);
    conv2_.backward(s.acts[0].data(), s.acts[1].data(), w + conv1_.n_params(),
                    dy, dmid.data(), dw == nullptr ? nullptr : dw + conv1_.n_params(),
                    s.children[1]);
    for (std::size_t i = 0; i < n; ++i)
      if (s.acts[0][i] <= 0.0f) dmid[i] = 0.0f;
    std::vector<float> dbranch(n);
    conv1_.backward(x, s.acts[0].data(), w, dmid.data(),
                    dx == nullptr ? nullptr : dbranch.data(), dw, s.children[0]);
    if (dx != nullptr)
      for (std::size_t i = 0; i < n; ++i) dx[i] = dy[i] + dbranch[i];
  }

 private:
  Shape3 in_;
  Conv2d conv1_, conv2_;
};

/// Fully connected layer over the flattened input.
class Dense : public Layer {
 public:
  Dense(Shape3 in, int out) : in_(in), out_({out, 1, 1}) {}
  std::string kind() const override { return "dense"; }
  Shape3 in_shape() const override { return in_; }
  Shape3 out_shape() const override { return out_; }
  std::size_t n_params() const override {
    return static_cast<std::size_t>(out_.c) * in_.count() + out_.c;
  }

  void init_params(std::span<float> w, std::mt19937_64& rng) const override {
    const double fan_in = static_cast<double>(in_.count());
    std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / fan_in));
    const std::size_t wc = static_cast<std::size_t>(out_.c) * in_.count();
    for (std::size_t i = 0; i < wc; ++i) w[i] = static_cast<float>(gauss(rng));
    for (std::size_t i = wc; i < w.size(); ++i) w[i] = 0.0f;
  }

  void forward(const float* x, const float* w, float* y, LayerScratch&) const override {
    const auto n_in = static_cast<Eigen::Index>(in_.count());
    Eigen::Map<const RowMat> W(w, out_.c, n_in);
    Eigen::Map<const Eigen::VectorXf> X(x, n_in);
    Eigen::Map<Eigen::VectorXf> Y(y, out_.c);
    Y.noalias() = W * X;
    const float* bias = w + static_cast<std::size_t>(out_.c) * in_.count();
    for (int o = 0; o < out_.c; ++o) y[o] += bias[o];
  }

  void backward(const float* x, const float*, const float* w, const float* dy,
                float* dx, float* dw, LayerScratch&) const override {
    const auto n_in = static_cast<Eigen::Index>(in_.count());
    Eigen::Map<const Eigen::VectorXf> dY(dy, out_.c);
    if (dw != nullptr) {
      Eigen::Map<RowMat> dW(dw, out_.c, n_in);
      Eigen::Map<const Eigen::VectorXf> X(x, n_in);
      dW.noalias() += dY * X.transpose();
      float* db = dw + static_cast<std::size_t>(out_.c) * in_.count();
      for (int o = 0; o < out_.c; ++o) db[o] += dy[o];
    }
    if (dx != nullptr) {
      Eigen::Map<const RowMat> W(w, out_.c, n_in);
      Eigen::Map<Eigen::VectorXf> dX(dx, n_in);
      dX.noalias() = W.transpose() * dY;
    }
  }

 private:
  Shape3 in_, out_;
};

}  // namespace advxfer::nn
