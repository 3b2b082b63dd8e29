#pragma once

#include <memory>
#include <span>
#include <vector>

#include "advxfer/core/random.hpp"
#include "advxfer/nn/layers.hpp"

namespace advxfer::nn {

/// Forward-pass record for one sample: layer outputs plus layer scratch.
/// One Tape per thread; reusable across samples.
struct Tape {
  std::vector<std::vector<float>> acts;
  std::vector<LayerScratch> scratch;
};

/// A sequential network. Layers are immutable and shared between copies;
/// parameters live in a flat per-network vector, which keeps checkpointing,
/// optimizer steps and constraint projection trivial.
class Network {
 public:
  Network() = default;
  explicit Network(Shape3 input) : input_shape_(input) {}

  void add(std::shared_ptr<const Layer> layer) {
    const Shape3 expect = layers_.empty() ? input_shape_ : layers_.back()->out_shape();
    if (layer->in_shape().count() != expect.count())
      throw std::invalid_argument("Network: layer '" + layer->kind() +
                                  "' expects " + layer->in_shape().str() +
                                  " but previous produces " + expect.str());
    offsets_.push_back(params_.size());
    params_.resize(params_.size() + layer->n_params(), 0.0f);
    layers_.push_back(std::move(layer));
  }

  Shape3 input_shape() const { return input_shape_; }
  Shape3 output_shape() const {
    return layers_.empty() ? input_shape_ : layers_.back()->out_shape();
  }
  int num_outputs() const { return static_cast<int>(output_shape().count()); }
  std::size_t n_params() const { return params_.size(); }
  std::span<float> params() { return params_; }
  std::span<const float> params() const { return params_; }
  const std::vector<std::shared_ptr<const Layer>>& layers() const { return layers_; }

  void init(std::uint64_t seed) {
    auto rng = make_rng(derive_seed(seed, 0x1217));
    for (std::size_t i = 0; i < layers_.size(); ++i)
      layers_[i]->init_params(param_span(i), rng);
  }

  void project_constraints() {
    for (std::size_t i = 0; i < layers_.size(); ++i)
      layers_[i]->project(param_span(i));
  }

  /// Forward pass; returns the final activation (logits).
  const std::vector<float>& forward(const float* x, Tape& tape) const {
    tape.acts.resize(layers_.size());
    tape.scratch.resize(layers_.size());
    const float* cur = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      tape.acts[i].resize(layers_[i]->out_shape().count());
      layers_[i]->forward(cur, params_.data() + offsets_[i], tape.acts[i].data(),
                          tape.scratch[i]);
      cur = tape.acts[i].data();
    }
    return tape.acts.back();
  }

  /// Backward pass over a recorded tape. `dparams` (same length as params)
  /// is accumulated into when non-null; `dx` (input size) is written when
  /// non-null.
  void backward(const float* x, Tape& tape, std::span<const float> dlogits,
                float* dparams, float* dx) const {
    std::vector<float> dcur(dlogits.begin(), dlogits.end());
    std::vector<float> dprev;
    for (std::size_t ri = layers_.size(); ri-- > 0;) {
      const float* lx = ri == 0 ? x : tape.acts[ri - 1].data();
      const float* ly = tape.acts[ri].data();
      float* dw = dparams == nullptr ? nullptr : dparams + offsets_[ri];
      const bool need_dx = ri > 0 || dx != nullptr;
      dprev.assign(layers_[ri]->in_shape().count(), 0.0f);
      layers_[ri]->backward(lx, ly, params_.data() + offsets_[ri], dcur.data(),
                            need_dx ? dprev.data() : nullptr, dw, tape.scratch[ri]);
      dcur.swap(dprev);
    }
    if (dx != nullptr)
      std::copy(dcur.begin(), dcur.end(), dx);
  }

  std::span<float> param_span(std::size_t layer_index) {
    return std::span<float>(params_.data() + offsets_[layer_index],
                            layers_[layer_index]->n_params());
  }
  std::span<const float> param_span(std::size_t layer_index) const {
    return std::span<const float>(params_.data() + offsets_[layer_index],
                                  layers_[layer_index]->n_params());
  }

 private:
  Shape3 input_shape_;
  std::vector<std::shared_ptr<const Layer>> layers_;
  std::vector<std::size_t> offsets_;
  std::vector<float> params_;
};

}  // namespace advxfer::nn
