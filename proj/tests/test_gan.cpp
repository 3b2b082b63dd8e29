#include <catch_amalgamated.hpp>

#include <filesystem>

#include "advxfer/attacks/gan.hpp"
#include "advxfer/attacks/ifgsm.hpp"
#include "advxfer/dataset/synthetic.hpp"
#include "advxfer/models/train.hpp"

using namespace advxfer;
using namespace advxfer::attacks;
using namespace advxfer::dataset;
using namespace advxfer::models;

namespace {

DatasetSplit gan_split(std::uint64_t seed) {
  const ManipulationTable table({2.5}, {1.5}, {5});
  std::vector<SourceImage> corpus;
  for (int i = 0; i < 14; ++i)
    corpus.push_back({synth_source_image(32, 1, derive_seed(seed, 8, static_cast<std::uint64_t>(i))),
                      "s" + std::to_string(i)});
  BuildOptions opt;
  opt.patch_size = 16;
  return build_dataset(corpus, table, opt, seed);
}

}  // namespace

TEST_CASE("generator is the identity at initialization", "[gan]") {
  Generator gen({1, 16, 16}, 8, 3);
  auto rng = make_rng(4);
  std::uniform_real_distribution<float> unif(0.0f, 1.0f);
  Tensor x({1, 16, 16});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = unif(rng);
  const Tensor y = gen.apply(x);
  REQUIRE(max_abs_diff(x, y) == 0.0f);
}

TEST_CASE("generator output stays in [0,1] for arbitrary valid inputs", "[gan][property]") {
  Generator gen({1, 16, 16}, 8, 5);
  // scramble the body so it is far from the identity
  auto params = gen.body().params();
  auto rng = make_rng(6);
  std::normal_distribution<float> gauss(0.0f, 0.8f);
  for (auto& w : params) w += gauss(rng);

  std::uniform_real_distribution<float> unif(0.0f, 1.0f);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor x({1, 16, 16});
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = unif(rng);
    const Tensor y = gen.apply(x);
    REQUIRE(y.shape() == x.shape());
    for (std::size_t i = 0; i < y.size(); ++i) {
      REQUIRE(y[i] >= 0.0f);
      REQUIRE(y[i] <= 1.0f);
    }
  }
}

TEST_CASE("gan training with gamma=0 and dominant fidelity stays near identity",
          "[gan][oracle]") {
  const ManipulationTable table({2.5}, {1.5}, {5});
  const auto def = make_class_definition(ClassMode::kDetector, table);
  const DatasetSplit split = gan_split(61);
  auto frozen = build_model("constrained_net", def, {1, 16, 16}, 61);

  const auto [manip, clean] = split_by_altered(std::span(split.train));
  GanConfig cfg;
  cfg.gamma = 0.0;
  cfg.alpha = 10.0;
  cfg.beta = 1.0;
  cfg.steps = 120;
  cfg.batch_size = 8;
  cfg.seed = 61;
  const auto bundle = train_attack_gan(frozen, manip, clean, cfg);
  REQUIRE_FALSE(bundle.stats.diverged);
  REQUIRE(bundle.stats.steps_run == cfg.steps);

  const auto [held_manip, held_clean] = split_by_altered(std::span(split.test));
  double mean_l1 = 0.0;
  for (const auto& it : held_manip) {
    const Tensor y = bundle.generator.apply(it.patch.pixels);
    double l1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
      l1 += std::abs(static_cast<double>(y[i]) - it.patch.pixels[i]);
    mean_l1 += l1 / static_cast<double>(y.size());
  }
  mean_l1 /= static_cast<double>(held_manip.size());
  REQUIRE(mean_l1 < 0.01);
}

TEST_CASE("frozen classifier parameters never change during gan training", "[gan]") {
  const ManipulationTable table({2.5}, {1.5}, {5});
  const auto def = make_class_definition(ClassMode::kClassifier, table);
  const DatasetSplit split = gan_split(62);
  auto frozen = build_model("constrained_net", def, {1, 16, 16}, 62);
  const std::vector<float> before(frozen.net.params().begin(), frozen.net.params().end());

  const auto [manip, clean] = split_by_altered(std::span(split.train));
  GanConfig cfg;
  cfg.steps = 30;
  cfg.batch_size = 8;
  cfg.seed = 62;
  train_attack_gan(frozen, manip, clean, cfg);
  const std::vector<float> after(frozen.net.params().begin(), frozen.net.params().end());
  REQUIRE(before == after);
}

TEST_CASE("divergent training aborts with the last stable snapshot", "[gan]") {
  const ManipulationTable table({2.5}, {1.5}, {5});
  const auto def = make_class_definition(ClassMode::kDetector, table);
  const DatasetSplit split = gan_split(63);
  auto frozen = build_model("constrained_net", def, {1, 16, 16}, 63);

  const auto [manip, clean] = split_by_altered(std::span(split.train));
  GanConfig cfg;
  cfg.steps = 200;
  cfg.batch_size = 4;
  cfg.g_lr = 1e18;  // guaranteed blow-up
  cfg.d_lr = 1e18;
  cfg.snapshot_every = 5;
  cfg.seed = 63;
  const auto bundle = train_attack_gan(frozen, manip, clean, cfg);
  REQUIRE(bundle.stats.diverged);
  REQUIRE(bundle.stats.steps_run < 200);
  REQUIRE(nn::all_finite(bundle.generator.body().params()));
  REQUIRE(nn::all_finite(bundle.discriminator.params()));
}

TEST_CASE("gan attack is deterministic and shape preserving", "[gan]") {
  const ManipulationTable table({2.5}, {1.5}, {5});
  const auto def = make_class_definition(ClassMode::kDetector, table);
  const DatasetSplit split = gan_split(64);
  auto frozen = build_model("constrained_net", def, {1, 16, 16}, 64);

  const auto [manip, clean] = split_by_altered(std::span(split.train));
  GanConfig cfg;
  cfg.steps = 20;
  cfg.batch_size = 8;
  cfg.seed = 64;
  const auto bundle = train_attack_gan(frozen, manip, clean, cfg);

  const auto& item = split.test.front();
  const auto a1 = gan_attack(bundle, item.patch, item.fine_label);
  const auto a2 = gan_attack(bundle, item.patch, item.fine_label);
  REQUIRE(max_abs_diff(a1.attacked.pixels, a2.attacked.pixels) == 0.0f);
  REQUIRE(a1.attacked.pixels.shape() == item.patch.pixels.shape());
  REQUIRE(a1.attack == AttackKind::kGan);

  ImagePatch bad{Tensor({1, 8, 8}, 0.5f), "x", 0};
  REQUIRE_THROWS_AS(gan_attack(bundle, bad, 1), std::invalid_argument);
}

TEST_CASE("gan bundle checkpoint round trip", "[gan][checkpoint]") {
  const ManipulationTable table({2.5}, {1.5}, {5});
  const auto def = make_class_definition(ClassMode::kDetector, table);
  const DatasetSplit split = gan_split(65);
  auto frozen = build_model("constrained_net", def, {1, 16, 16}, 65);
  const auto [manip, clean] = split_by_altered(std::span(split.train));
  GanConfig cfg;
  cfg.steps = 10;
  cfg.batch_size = 4;
  cfg.seed = 65;
  const auto bundle = train_attack_gan(frozen, manip, clean, cfg);

  const auto dir = std::filesystem::temp_directory_path() / "advxfer_gan_ckpt";
  std::filesystem::create_directories(dir);
  save_gan_bundle(dir / "g.ckpt", bundle, cfg.hidden_channels);
  const auto back = load_gan_bundle(dir / "g.ckpt");
  REQUIRE(back.arch == bundle.arch);
  REQUIRE(back.known_def == bundle.known_def);
  REQUIRE(std::vector<float>(back.generator.body().params().begin(),
                             back.generator.body().params().end()) ==
          std::vector<float>(bundle.generator.body().params().begin(),
                             bundle.generator.body().params().end()));

  const auto& item = split.test.front();
  REQUIRE(max_abs_diff(gan_attack(back, item.patch, 1).attacked.pixels,
                       gan_attack(bundle, item.patch, 1).attacked.pixels) == 0.0f);
  std::filesystem::remove_all(dir);
}

TEST_CASE("adversarial manifest round trip", "[attacks][manifest]") {
  const ManipulationTable table({2.5}, {1.5}, {5});
  const auto def = make_class_definition(ClassMode::kDetector, table);
  const DatasetSplit split = gan_split(66);
  auto m = build_model("constrained_net", def, {1, 16, 16}, 66);
  const AttackSet set = sample_attack_set(split, table, 1, 66);
  IfgsmConfig cfg;
  cfg.iterations = 3;
  const auto advs = ifgsm_attack_set(m, set, cfg);

  const auto dir = std::filesystem::temp_directory_path() / "advxfer_adv_manifest";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_adversarial_manifest(dir, advs);
  const auto back = read_adversarial_manifest(dir);
  REQUIRE(back.size() == advs.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    REQUIRE(max_abs_diff(back[i].attacked.pixels, advs[i].attacked.pixels) == 0.0f);
    REQUIRE(max_abs_diff(back[i].original.pixels, advs[i].original.pixels) == 0.0f);
    REQUIRE(back[i].fine_label == advs[i].fine_label);
    REQUIRE(back[i].arch == advs[i].arch);
    REQUIRE(back[i].known_def == advs[i].known_def);
  }
  std::filesystem::remove_all(dir);
}
