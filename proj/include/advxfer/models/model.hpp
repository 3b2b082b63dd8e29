#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "advxfer/dataset/build.hpp"
#include "advxfer/dataset/labels.hpp"
#include "advxfer/models/registry.hpp"
#include "advxfer/nn/loss.hpp"
#include "advxfer/nn/network.hpp"

namespace advxfer::models {

struct TrainMeta {
  int epochs_run = 0;
  double best_val_accuracy = 0.0;
  std::uint64_t seed = 0;
};

/// A classifier handle: architecture + class definition + weights. Inference
/// is const and safe to run concurrently from many evaluators.
struct TrainedModel {
  std::string arch;
  dataset::ClassDefinition def;
  nn::Network net;
  TrainMeta meta;

  int unaltered_class() const { return 0; }
};

inline TrainedModel build_model(const std::string& arch,
                                const dataset::ClassDefinition& def,
                                Shape3 input, std::uint64_t seed) {
  TrainedModel m;
  m.arch = arch;
  m.def = def;
  m.net = build_architecture(arch, input, def.num_classes);
  m.net.init(seed);
  m.net.project_constraints();
  m.meta.seed = seed;
  return m;
}

inline void check_input_shape(const TrainedModel& m, const Tensor& pixels) {
  if (pixels.shape().count() != m.net.input_shape().count())
    throw std::invalid_argument("model expects input " + m.net.input_shape().str() +
                                ", got " + pixels.shape().str());
}

struct Prediction {
  int label = 0;
  std::vector<float> scores;
};

/// Argmax prediction with per-class scores (softmax simplex). Ties break to
/// the lowest class index.
inline Prediction predict(const TrainedModel& m, const Tensor& pixels) {
  check_input_shape(m, pixels);
  nn::Tape tape;
  const auto& logits = m.net.forward(pixels.data(), tape);
  Prediction p;
  p.scores = nn::softmax(logits);
  p.label = 0;
  for (std::size_t i = 1; i < p.scores.size(); ++i)
    if (p.scores[i] > p.scores[static_cast<std::size_t>(p.label)])
      p.label = static_cast<int>(i);
  return p;
}

struct LossAndGradient {
  double loss = 0.0;
  Tensor grad;
};

/// Cross-entropy toward `target_label` and its gradient w.r.t. the input
/// pixels, with model parameters frozen.
inline LossAndGradient loss_and_gradient(const TrainedModel& m, const Tensor& pixels,
                                         int target_label) {
  check_input_shape(m, pixels);
  if (target_label < 0 || target_label >= m.def.num_classes)
    throw std::invalid_argument("target label " + std::to_string(target_label) +
                                " outside [0, " + std::to_string(m.def.num_classes) + ")");
  nn::Tape tape;
  const auto& logits = m.net.forward(pixels.data(), tape);
  const auto ce = nn::cross_entropy_with_grad(logits, target_label);
  LossAndGradient out;
  out.loss = ce.loss;
  out.grad = Tensor(pixels.shape());
  m.net.backward(pixels.data(), tape, ce.dlogits, nullptr, out.grad.data());
  return out;
}

/// Fraction of items whose prediction equals the coarsened true label.
inline double accuracy(const TrainedModel& m,
                       std::span<const dataset::LabeledPatch> items,
                       const dataset::ClassDefinition& def) {
  if (items.empty()) throw std::invalid_argument("accuracy: empty evaluation set");
  long correct = 0;
  const auto n = static_cast<std::ptrdiff_t>(items.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : correct)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& it = items[static_cast<std::size_t>(i)];
    if (predict(m, it.patch.pixels).label == dataset::coarsen(it.fine_label, def))
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(items.size());
}

}  // namespace advxfer::models
