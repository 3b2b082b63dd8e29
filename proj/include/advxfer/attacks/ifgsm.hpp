#pragma once

#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "advxfer/attacks/types.hpp"
#include "advxfer/dataset/build.hpp"
#include "advxfer/dataset/manipulations.hpp"
#include "advxfer/models/model.hpp"

namespace advxfer::attacks {

/// Targeted I-FGSM. `epsilon` is the per-iteration step in 0-255 pixel
/// units (0.1 means 0.1/255 in [0,1] space).
struct IfgsmConfig {
  double epsilon = 0.1;
  int iterations = 100;
  float clip_lo = 0.0f;
  float clip_hi = 1.0f;
  bool quantize = true;  // attacker ships an 8-bit image file
};

/// Iterate x <- clip(x - (eps/255) * sign(grad J(x, y_unaltered))); always
/// runs the full iteration count, the gradient taken at the current iterate.
inline AdversarialExample ifgsm_attack(const models::TrainedModel& model,
                                       const dataset::ImagePatch& patch,
                                       int fine_label, const IfgsmConfig& cfg) {
  if (cfg.epsilon <= 0) throw std::invalid_argument("ifgsm: epsilon must be > 0");
  if (cfg.iterations < 1) throw std::invalid_argument("ifgsm: iterations must be >= 1");
  models::check_input_shape(model, patch.pixels);

  const int target = model.unaltered_class();
  const float step = static_cast<float>(cfg.epsilon / 255.0);

  Tensor x = patch.pixels;
  for (int n = 0; n < cfg.iterations; ++n) {
    const auto lg = models::loss_and_gradient(model, x, target);
    if (!std::isfinite(lg.loss) || !nn::all_finite(lg.grad.vec()))
      throw std::runtime_error(
          "ifgsm: non-finite gradient at iteration " + std::to_string(n) +
          " attacking " + patch.source_id + "#" + std::to_string(patch.patch_index));
    for (std::size_t i = 0; i < x.size(); ++i) {
      const float g = lg.grad[i];
      const float sgn = g > 0.0f ? 1.0f : (g < 0.0f ? -1.0f : 0.0f);
      const float v = x[i] - step * sgn;
      x[i] = v < cfg.clip_lo ? cfg.clip_lo : (v > cfg.clip_hi ? cfg.clip_hi : v);
    }
  }
  if (cfg.quantize) x = dataset::quantize_8bit(x);

  AdversarialExample adv;
  adv.original = patch;
  adv.attacked = {std::move(x), patch.source_id, patch.patch_index};
  adv.attack = AttackKind::kIfgsm;
  adv.arch = model.arch;
  adv.known_def = model.def.mode;
  adv.fine_label = fine_label;
  return adv;
}

/// Attack every patch of an attack set against one known model. Patches are
/// independent, so the loop parallelizes freely.
inline std::vector<AdversarialExample> ifgsm_attack_set(
    const models::TrainedModel& model, const dataset::AttackSet& set,
    const IfgsmConfig& cfg) {
  std::vector<AdversarialExample> out(set.patches.size());
  const auto n = static_cast<std::ptrdiff_t>(set.patches.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& item = set.patches[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] =
        ifgsm_attack(model, item.patch, item.fine_label, cfg);
  }
  return out;
}

}  // namespace advxfer::attacks
