#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "advxfer/attacks/types.hpp"
#include "advxfer/dataset/build.hpp"
#include "advxfer/dataset/manipulations.hpp"
#include "advxfer/models/model.hpp"
#include "advxfer/nn/optim.hpp"

namespace advxfer::attacks {

struct GanConfig {
  double alpha = 10.0;  // pixel fidelity |G(I)-I|_1
  double beta = 1.0;    // adversarial -log D(G(I))
  double gamma = 1.0;   // classifier fooling CE(frozen(G(I)), unaltered)
  int steps = 600;
  int batch_size = 16;
  double g_lr = 1e-3;
  double d_lr = 2e-4;
  int hidden_channels = 8;
  bool quantize = true;
  int snapshot_every = 25;  // stable-checkpoint cadence for divergence recovery
  std::uint64_t seed = 0;
};

/// Image-to-image generator: an input conv, three residual conv blocks and an
/// output conv around an identity skip, output clamped to [0,1]. The output
/// conv starts at zero so the generator is exactly the identity before
/// training.
class Generator {
 public:
  Generator() = default;
  Generator(Shape3 input, int hidden, std::uint64_t seed) : input_(input) {
    body_ = nn::Network(input);
    body_.add(std::make_shared<nn::Conv2d>(input, hidden, 3));
    body_.add(std::make_shared<nn::Relu>(body_.output_shape()));
    for (int i = 0; i < 3; ++i)
      body_.add(std::make_shared<nn::ResidualConvBlock>(body_.output_shape(), 3));
    body_.add(std::make_shared<nn::Conv2d>(body_.output_shape(), input.c, 3));
    body_.init(seed);
    auto out_conv = body_.param_span(body_.layers().size() - 1);
    std::fill(out_conv.begin(), out_conv.end(), 0.0f);
  }

  Shape3 input_shape() const { return input_; }
  nn::Network& body() { return body_; }
  const nn::Network& body() const { return body_; }

  struct Forward {
    std::vector<float> y;
    std::vector<std::uint8_t> unclamped;
    nn::Tape tape;
  };

  void forward(const float* x, Forward& f) const {
    const std::size_t n = input_.count();
    const auto& delta = body_.forward(x, f.tape);
    f.y.resize(n);
    f.unclamped.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const float v = x[i] + delta[i];
      f.unclamped[i] = v > 0.0f && v < 1.0f;
      f.y[i] = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
    }
  }

  Tensor apply(const Tensor& x) const {
    Forward f;
    forward(x.data(), f);
    return Tensor(x.shape(), std::move(f.y));
  }

  /// Backprop d(loss)/d(output) through clamp and body into `dparams`.
  void backward(const float* x, Forward& f, std::span<const float> dy,
                float* dparams) const {
    std::vector<float> masked(dy.begin(), dy.end());
    for (std::size_t i = 0; i < masked.size(); ++i)
      if (!f.unclamped[i]) masked[i] = 0.0f;
    body_.backward(x, f.tape, masked, dparams, nullptr);
  }

 private:
  Shape3 input_;
  nn::Network body_;
};

/// Real/fake patch classifier emitting one logit.
inline nn::Network build_discriminator(Shape3 input) {
  nn::Network net(input);
  net.add(std::make_shared<nn::Conv2d>(input, 8, 3));
  net.add(std::make_shared<nn::Relu>(net.output_shape()));
  net.add(std::make_shared<nn::MaxPool2>(net.output_shape()));
  net.add(std::make_shared<nn::Conv2d>(net.output_shape(), 16, 3));
  net.add(std::make_shared<nn::Relu>(net.output_shape()));
  net.add(std::make_shared<nn::MaxPool2>(net.output_shape()));
  while (net.output_shape().h > 8 && net.output_shape().h % 2 == 0) {
    net.add(std::make_shared<nn::Conv2d>(net.output_shape(), 16, 3));
    net.add(std::make_shared<nn::Relu>(net.output_shape()));
    net.add(std::make_shared<nn::MaxPool2>(net.output_shape()));
  }
  net.add(std::make_shared<nn::Dense>(net.output_shape(), 16));
  net.add(std::make_shared<nn::Relu>(net.output_shape()));
  net.add(std::make_shared<nn::Dense>(net.output_shape(), 1));
  return net;
}

struct GanTrainStats {
  int steps_run = 0;
  bool diverged = false;
  double final_d_loss = 0.0;
  double final_g_fidelity = 0.0;
  double final_g_adversarial = 0.0;
  double final_g_classifier = 0.0;
};

/// Trained attack bundle. The known classifier is referenced by identity; its
/// parameters are never touched during GAN training.
struct GanAttackBundle {
  Generator generator;
  nn::Network discriminator;
  std::string arch;
  dataset::ClassMode known_def = dataset::ClassMode::kDetector;
  bool quantize = true;
  GanTrainStats stats;
};

/// Alternating min-max training: the discriminator separates unaltered
/// patches from generator outputs; the generator minimizes
/// alpha*|G(I)-I|_1 + beta*(-log D(G(I))) + gamma*CE(frozen(G(I)), 0).
/// Non-finite losses abort the run and return the last stable snapshot.
inline GanAttackBundle train_attack_gan(
    const models::TrainedModel& frozen,
    std::span<const dataset::LabeledPatch> manipulated,
    std::span<const dataset::LabeledPatch> unaltered, const GanConfig& cfg) {
  if (manipulated.empty() || unaltered.empty())
    throw std::invalid_argument("train_attack_gan: need manipulated and unaltered patches");
  if (cfg.batch_size < 1 || cfg.steps < 0)
    throw std::invalid_argument("train_attack_gan: bad steps/batch_size");
  const Shape3 input = frozen.net.input_shape();

  GanAttackBundle bundle;
  bundle.generator = Generator(input, cfg.hidden_channels, derive_seed(cfg.seed, 0x6E9));
  bundle.discriminator = build_discriminator(input);
  bundle.discriminator.init(derive_seed(cfg.seed, 0xD15C));
  bundle.arch = frozen.arch;
  bundle.known_def = frozen.def.mode;
  bundle.quantize = cfg.quantize;

  auto& gnet = bundle.generator.body();
  auto& dnet = bundle.discriminator;
  nn::Adam g_opt(gnet.n_params(), cfg.g_lr);
  nn::Adam d_opt(dnet.n_params(), cfg.d_lr);

  auto rng = make_rng(derive_seed(cfg.seed, 0xBA7C));
  std::uniform_int_distribution<std::size_t> pick_m(0, manipulated.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_u(0, unaltered.size() - 1);

  const std::size_t b = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t npx = input.count();
  std::vector<std::vector<float>> g_grads(b, std::vector<float>(gnet.n_params()));
  std::vector<std::vector<float>> d_grads(2 * b, std::vector<float>(dnet.n_params()));
  std::vector<float> grad_sum;
  std::vector<double> d_losses(2 * b), g_fid(b), g_adv(b), g_cls(b);

  std::vector<float> stable_g(gnet.params().begin(), gnet.params().end());
  std::vector<float> stable_d(dnet.params().begin(), dnet.params().end());
  int stable_step = 0;

  for (int step = 0; step < cfg.steps; ++step) {
    std::vector<std::size_t> mb(b), ub(b);
    for (auto& i : mb) i = pick_m(rng);
    for (auto& i : ub) i = pick_u(rng);

    // --- discriminator step: real unaltered vs generated fakes
    const auto nb = static_cast<std::ptrdiff_t>(b);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < nb; ++i) {
      thread_local nn::Tape tape;
      thread_local Generator::Forward gf;
      const auto bi = static_cast<std::size_t>(i);
      {  // real
        const float* x = unaltered[ub[bi]].patch.pixels.data();
        auto& grad = d_grads[bi];
        std::fill(grad.begin(), grad.end(), 0.0f);
        const auto& logit = dnet.forward(x, tape);
        const auto bce = nn::bce_with_logit(logit[0], 1.0);
        d_losses[bi] = bce.loss;
        const float dl[1] = {bce.dlogit};
        dnet.backward(x, tape, dl, grad.data(), nullptr);
      }
      {  // fake
        bundle.generator.forward(manipulated[mb[bi]].patch.pixels.data(), gf);
        auto& grad = d_grads[b + bi];
        std::fill(grad.begin(), grad.end(), 0.0f);
        const auto& logit = dnet.forward(gf.y.data(), tape);
        const auto bce = nn::bce_with_logit(logit[0], 0.0);
        d_losses[b + bi] = bce.loss;
        const float dl[1] = {bce.dlogit};
        dnet.backward(gf.y.data(), tape, dl, grad.data(), nullptr);
      }
    }
    grad_sum.assign(dnet.n_params(), 0.0f);
    double d_loss = 0.0;
    for (std::size_t i = 0; i < 2 * b; ++i) {
      for (std::size_t j = 0; j < grad_sum.size(); ++j) grad_sum[j] += d_grads[i][j];
      d_loss += d_losses[i];
    }
    d_loss /= static_cast<double>(2 * b);
    d_opt.step(dnet.params(), grad_sum, 1.0 / static_cast<double>(2 * b));

    // --- generator step
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::ptrdiff_t i = 0; i < nb; ++i) {
      thread_local nn::Tape dtape;
      thread_local nn::Tape ctape;
      thread_local Generator::Forward gf;
      const auto bi = static_cast<std::size_t>(i);
      const float* x = manipulated[mb[bi]].patch.pixels.data();
      bundle.generator.forward(x, gf);

      std::vector<float> dy(npx, 0.0f);
      // fidelity: alpha * mean |y - x|
      double fid = 0.0;
      for (std::size_t p = 0; p < npx; ++p) {
        const float d = gf.y[p] - x[p];
        fid += std::abs(d);
        dy[p] += static_cast<float>(cfg.alpha * (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) /
                                    static_cast<double>(npx));
      }
      g_fid[bi] = fid / static_cast<double>(npx);

      // adversarial: beta * (-log D(y))
      if (cfg.beta != 0.0) {
        const auto& logit = dnet.forward(gf.y.data(), dtape);
        const auto bce = nn::bce_with_logit(logit[0], 1.0);
        g_adv[bi] = bce.loss;
        const float dl[1] = {bce.dlogit};
        std::vector<float> dxd(npx);
        dnet.backward(gf.y.data(), dtape, dl, nullptr, dxd.data());
        for (std::size_t p = 0; p < npx; ++p)
          dy[p] += static_cast<float>(cfg.beta) * dxd[p];
      } else {
        g_adv[bi] = 0.0;
      }

      // classifier fooling: gamma * CE(frozen(y), unaltered)
      if (cfg.gamma != 0.0) {
        const auto& logits = frozen.net.forward(gf.y.data(), ctape);
        const auto ce = nn::cross_entropy_with_grad(logits, frozen.unaltered_class());
        g_cls[bi] = ce.loss;
        std::vector<float> dxc(npx);
        frozen.net.backward(gf.y.data(), ctape, ce.dlogits, nullptr, dxc.data());
        for (std::size_t p = 0; p < npx; ++p)
          dy[p] += static_cast<float>(cfg.gamma) * dxc[p];
      } else {
        g_cls[bi] = 0.0;
      }

      auto& grad = g_grads[bi];
      std::fill(grad.begin(), grad.end(), 0.0f);
      bundle.generator.backward(x, gf, dy, grad.data());
    }
    grad_sum.assign(gnet.n_params(), 0.0f);
    double fid = 0.0, adv = 0.0, cls = 0.0;
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < grad_sum.size(); ++j) grad_sum[j] += g_grads[i][j];
      fid += g_fid[i];
      adv += g_adv[i];
      cls += g_cls[i];
    }
    fid /= static_cast<double>(b);
    adv /= static_cast<double>(b);
    cls /= static_cast<double>(b);
    g_opt.step(gnet.params(), grad_sum, 1.0 / static_cast<double>(b));

    bundle.stats.steps_run = step + 1;
    bundle.stats.final_d_loss = d_loss;
    bundle.stats.final_g_fidelity = fid;
    bundle.stats.final_g_adversarial = adv;
    bundle.stats.final_g_classifier = cls;

    const bool finite = std::isfinite(d_loss) && std::isfinite(fid) &&
                        std::isfinite(adv) && std::isfinite(cls) &&
                        nn::all_finite(gnet.params()) && nn::all_finite(dnet.params());
    if (!finite) {
      // divergence: roll back to the last stable snapshot and stop
      std::copy(stable_g.begin(), stable_g.end(), gnet.params().begin());
      std::copy(stable_d.begin(), stable_d.end(), dnet.params().begin());
      bundle.stats.diverged = true;
      bundle.stats.steps_run = stable_step;
      return bundle;
    }
    if ((step + 1) % cfg.snapshot_every == 0) {
      stable_g.assign(gnet.params().begin(), gnet.params().end());
      stable_d.assign(dnet.params().begin(), dnet.params().end());
      stable_step = step + 1;
    }
  }
  return bundle;
}

/// Single deterministic generator pass over one patch.
inline AdversarialExample gan_attack(const GanAttackBundle& bundle,
                                     const dataset::ImagePatch& patch,
                                     int fine_label) {
  if (bundle.generator.input_shape().count() == 0)
    throw std::runtime_error(
        "gan_attack: bundle has no trained generator; run train_attack_gan "
        "against the known model first");
  if (patch.pixels.shape().count() != bundle.generator.input_shape().count())
    throw std::invalid_argument("gan_attack: patch shape " + patch.pixels.shape().str() +
                                " does not match generator input " +
                                bundle.generator.input_shape().str());
  Tensor y = bundle.generator.apply(patch.pixels);
  if (bundle.quantize) y = dataset::quantize_8bit(y);

  AdversarialExample adv;
  adv.original = patch;
  adv.attacked = {std::move(y), patch.source_id, patch.patch_index};
  adv.attack = AttackKind::kGan;
  adv.arch = bundle.arch;
  adv.known_def = bundle.known_def;
  adv.fine_label = fine_label;
  return adv;
}

inline std::vector<AdversarialExample> gan_attack_set(const GanAttackBundle& bundle,
                                                      const dataset::AttackSet& set) {
  std::vector<AdversarialExample> out(set.patches.size());
  const auto n = static_cast<std::ptrdiff_t>(set.patches.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& item = set.patches[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = gan_attack(bundle, item.patch, item.fine_label);
  }
  return out;
}

/// Manipulated/unaltered views of a training split, for GAN training.
inline std::pair<std::vector<dataset::LabeledPatch>, std::vector<dataset::LabeledPatch>>
split_by_altered(std::span<const dataset::LabeledPatch> items) {
  std::pair<std::vector<dataset::LabeledPatch>, std::vector<dataset::LabeledPatch>> out;
  for (const auto& it : items)
    (it.fine_label != 0 ? out.first : out.second).push_back(it);
  return out;
}

// Bundle checkpoint: same container layout as the model checkpoint (magic,
// version, JSON metadata, float32 blobs).

inline constexpr std::uint32_t kGanCheckpointVersion = 1;
inline constexpr char kGanCheckpointMagic[4] = {'A', 'X', 'G', 'K'};

inline void save_gan_bundle(const fs::path& path, const GanAttackBundle& bundle,
                            int hidden_channels) {
  const Shape3 in = bundle.generator.input_shape();
  nlohmann::json meta{{"arch", bundle.arch},
                      {"known_def", dataset::class_mode_name(bundle.known_def)},
                      {"input", {in.c, in.h, in.w}},
                      {"hidden_channels", hidden_channels},
                      {"quantize", bundle.quantize},
                      {"steps_run", bundle.stats.steps_run},
                      {"diverged", bundle.stats.diverged},
                      {"g_params", bundle.generator.body().n_params()},
                      {"d_params", bundle.discriminator.n_params()}};
  const std::string mjson = meta.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write gan bundle " + path.string());
  out.write(kGanCheckpointMagic, 4);
  const std::uint32_t version = kGanCheckpointVersion;
  out.write(reinterpret_cast<const char*>(&version), 4);
  const std::uint64_t jlen = mjson.size();
  out.write(reinterpret_cast<const char*>(&jlen), 8);
  out.write(mjson.data(), static_cast<std::streamsize>(mjson.size()));
  const auto g = bundle.generator.body().params();
  const auto d = bundle.discriminator.params();
  out.write(reinterpret_cast<const char*>(g.data()),
            static_cast<std::streamsize>(g.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(d.data()),
            static_cast<std::streamsize>(d.size() * sizeof(float)));
  if (!out) throw std::runtime_error("gan bundle write failed: " + path.string());
}

inline GanAttackBundle load_gan_bundle(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open gan bundle " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kGanCheckpointMagic, 4) != 0)
    throw std::runtime_error("corrupt gan bundle (bad magic): " + path.string());
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  if (version != kGanCheckpointVersion)
    throw std::runtime_error("gan bundle schema version " + std::to_string(version) +
                             " unsupported: " + path.string());
  std::uint64_t jlen = 0;
  in.read(reinterpret_cast<char*>(&jlen), 8);
  if (!in || jlen > (1u << 20))
    throw std::runtime_error("corrupt gan bundle (metadata length): " + path.string());
  std::string mjson(jlen, '\0');
  in.read(mjson.data(), static_cast<std::streamsize>(jlen));
  if (!in) throw std::runtime_error("corrupt gan bundle (truncated metadata): " + path.string());
  const auto meta = nlohmann::json::parse(mjson);

  GanAttackBundle bundle;
  bundle.arch = meta.at("arch").get<std::string>();
  bundle.known_def = dataset::class_mode_from_name(meta.at("known_def").get<std::string>());
  bundle.quantize = meta.at("quantize").get<bool>();
  bundle.stats.steps_run = meta.at("steps_run").get<int>();
  bundle.stats.diverged = meta.at("diverged").get<bool>();
  const auto dims = meta.at("input").get<std::vector<int>>();
  const Shape3 input{dims.at(0), dims.at(1), dims.at(2)};
  bundle.generator = Generator(input, meta.at("hidden_channels").get<int>(), 0);
  bundle.discriminator = build_discriminator(input);
  if (meta.at("g_params").get<std::uint64_t>() != bundle.generator.body().n_params() ||
      meta.at("d_params").get<std::uint64_t>() != bundle.discriminator.n_params())
    throw std::runtime_error("corrupt gan bundle (parameter count mismatch): " + path.string());
  auto g = bundle.generator.body().params();
  auto d = bundle.discriminator.params();
  in.read(reinterpret_cast<char*>(g.data()),
          static_cast<std::streamsize>(g.size() * sizeof(float)));
  in.read(reinterpret_cast<char*>(d.data()),
          static_cast<std::streamsize>(d.size() * sizeof(float)));
  if (!in) throw std::runtime_error("corrupt gan bundle (truncated weights): " + path.string());
  return bundle;
}

}  // namespace advxfer::attacks
