#include <catch_amalgamated.hpp>

#include "advxfer/attacks/ifgsm.hpp"
#include "advxfer/dataset/synthetic.hpp"
#include "advxfer/models/train.hpp"

using namespace advxfer;
using namespace advxfer::attacks;
using namespace advxfer::dataset;
using namespace advxfer::models;

namespace {

// 1-pixel, 2-class linear model: logits = (w0*x, 0).
TrainedModel pixel_model(float w0) {
  TrainedModel m;
  m.arch = "toy";
  m.def.mode = ClassMode::kDetector;
  m.def.num_classes = 2;
  m.def.fine_to_class = {0, 1};
  m.net = nn::Network({1, 1, 1});
  m.net.add(std::make_shared<nn::Dense>(Shape3{1, 1, 1}, 2));
  auto w = m.net.params();  // [w00, w10, b0, b1]
  w[0] = w0;
  w[1] = 0.0f;
  w[2] = 0.0f;
  w[3] = 0.0f;
  return m;
}

DatasetSplit small_split(std::uint64_t seed) {
  const ManipulationTable table({2.5}, {1.5}, {5});
  std::vector<SourceImage> corpus;
  for (int i = 0; i < 12; ++i)
    corpus.push_back({synth_source_image(32, 1, derive_seed(seed, 4, static_cast<std::uint64_t>(i))),
                      "s" + std::to_string(i)});
  BuildOptions opt;
  opt.patch_size = 16;
  return build_dataset(corpus, table, opt, seed);
}

}  // namespace

TEST_CASE("one-step update moves the pixel by exactly eps/255", "[ifgsm]") {
  // With w0 = -1 the loss toward class 0 has a positive gradient in x, so a
  // single iteration decreases the pixel by the step size.
  auto m = pixel_model(-1.0f);
  ImagePatch p{Tensor({1, 1, 1}, 0.5f), "px", 0};
  IfgsmConfig cfg;
  cfg.iterations = 1;
  cfg.quantize = false;
  const auto adv = ifgsm_attack(m, p, 1, cfg);
  REQUIRE(adv.attacked.pixels[0] == 0.5f - static_cast<float>(0.1 / 255.0));
  REQUIRE(adv.original.pixels[0] == 0.5f);
  REQUIRE(adv.attack == AttackKind::kIfgsm);

  // positive-gradient pixel already at 0.0 is held by the clip
  ImagePatch zero{Tensor({1, 1, 1}, 0.0f), "px", 0};
  const auto held = ifgsm_attack(m, zero, 1, cfg);
  REQUIRE(held.attacked.pixels[0] == 0.0f);
}

TEST_CASE("config validation and error paths", "[ifgsm]") {
  auto m = pixel_model(-1.0f);
  ImagePatch p{Tensor({1, 1, 1}, 0.5f), "px", 0};
  IfgsmConfig cfg;
  cfg.epsilon = 0.0;
  REQUIRE_THROWS_AS(ifgsm_attack(m, p, 1, cfg), std::invalid_argument);
  cfg.epsilon = 0.1;
  cfg.iterations = 0;
  REQUIRE_THROWS_AS(ifgsm_attack(m, p, 1, cfg), std::invalid_argument);
  cfg.iterations = 1;
  ImagePatch bad{Tensor({1, 2, 2}, 0.5f), "px", 0};
  REQUIRE_THROWS_AS(ifgsm_attack(m, bad, 1, cfg), std::invalid_argument);

  // a NaN weight produces a non-finite gradient -> abort with diagnostic
  auto nan_model = pixel_model(std::numeric_limits<float>::quiet_NaN());
  REQUIRE_THROWS_WITH(ifgsm_attack(nan_model, p, 1, cfg),
                      Catch::Matchers::ContainsSubstring("non-finite gradient"));
}

TEST_CASE("iterates respect the L-inf bound and re-run equality", "[ifgsm][property]") {
  const ManipulationTable table({2.5}, {1.5}, {5});
  const auto def = make_class_definition(ClassMode::kDetector, table);
  const DatasetSplit split = small_split(51);
  auto m = build_model("constrained_net", def, {1, 16, 16}, 5);
  TrainConfig tc;
  tc.initial_lr = 0.02;
  tc.max_epochs = 4;
  tc.batch_size = 16;
  tc.seed = 5;
  m = train(m, split, def, tc);

  const AttackSet set = sample_attack_set(split, table, 3, 7);
  IfgsmConfig cfg;
  cfg.epsilon = 0.5;  // larger step, fewer iterations: same bound form
  cfg.iterations = 20;
  const auto advs = ifgsm_attack_set(m, set, cfg);
  REQUIRE(advs.size() == set.patches.size());

  const double bound = cfg.iterations * cfg.epsilon / 255.0;
  for (const auto& adv : advs) {
    double linf = 0.0;
    for (std::size_t i = 0; i < adv.attacked.pixels.size(); ++i) {
      const double d = std::abs(static_cast<double>(adv.attacked.pixels[i]) -
                                adv.original.pixels[i]);
      linf = std::max(linf, d);
      REQUIRE(adv.attacked.pixels[i] >= 0.0f);
      REQUIRE(adv.attacked.pixels[i] <= 1.0f);
    }
    REQUIRE(linf <= bound + 1e-6);
    // quantized output: level displacement is at most iterations*epsilon
    for (std::size_t i = 0; i < adv.attacked.pixels.size(); ++i) {
      const long ka = std::lround(adv.attacked.pixels[i] * 255.0);
      const long ko = std::lround(adv.original.pixels[i] * 255.0);
      REQUIRE(std::abs(ka - ko) <= static_cast<long>(cfg.iterations * cfg.epsilon + 1e-9));
    }
  }

  // no hidden state: attacking the same patch again reproduces the output
  const auto& item = set.patches.front();
  const auto a1 = ifgsm_attack(m, item.patch, item.fine_label, cfg);
  ifgsm_attack(m, set.patches.back().patch, set.patches.back().fine_label, cfg);
  const auto a2 = ifgsm_attack(m, item.patch, item.fine_label, cfg);
  REQUIRE(max_abs_diff(a1.attacked.pixels, a2.attacked.pixels) == 0.0f);
}

TEST_CASE("attack raises the unaltered score on the known model", "[ifgsm]") {
  const ManipulationTable table({2.5}, {1.5}, {5});
  const auto def = make_class_definition(ClassMode::kClassifier, table);
  const DatasetSplit split = small_split(52);
  auto m = build_model("constrained_net", def, {1, 16, 16}, 6);
  TrainConfig tc;
  tc.initial_lr = 0.02;
  tc.max_epochs = 5;
  tc.batch_size = 16;
  tc.seed = 6;
  m = train(m, split, def, tc);

  const AttackSet set = sample_attack_set(split, table, 4, 9);
  IfgsmConfig cfg;  // paper defaults: eps 0.1, 100 iterations
  const auto advs = ifgsm_attack_set(m, set, cfg);
  int improved = 0;
  for (const auto& adv : advs) {
    const auto before = predict(m, adv.original.pixels).scores[0];
    const auto after = predict(m, adv.attacked.pixels).scores[0];
    if (after >= before) ++improved;
  }
  REQUIRE(improved >= static_cast<int>(advs.size() * 9) / 10);
}
