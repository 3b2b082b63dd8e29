#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "advxfer/attacks/gan.hpp"
#include "advxfer/attacks/ifgsm.hpp"
#include "advxfer/core/random.hpp"
#include "advxfer/dataset/build.hpp"
#include "advxfer/models/train.hpp"

namespace advxfer::run {

using nlohmann::json;

struct SyntheticCorpusConfig {
  int num_sources = 48;
  int source_size = 128;
};

struct DatasetConfig {
  std::optional<std::string> corpus_dir;  // directory of .pgm/.ppm/.npy; else synthetic
  SyntheticCorpusConfig synthetic;
  int patch_size = 64;
  int channels = 1;
  std::vector<double> awgn_sigmas = {0.5, 1.0, 1.5, 2.0, 2.5};
  std::vector<double> blur_sigmas = {1.0, 1.5, 2.0, 2.5, 3.0};
  std::vector<double> median_windows = {3, 5, 7, 9, 11};
  dataset::SplitRatios split;
  bool quantize = true;
};

struct ModelsConfig {
  std::vector<std::string> architectures = {"constrained_net", "plain_deep"};
  models::TrainConfig train;  // seed is derived per model at train time
};

struct AttacksConfig {
  attacks::IfgsmConfig ifgsm;
  attacks::GanConfig gan;
};

struct EvaluationConfig {
  int attack_set_per_class = 4;
};

/// A full experiment description. The digest of everything except the output
/// directory identifies a run's inputs; artifacts are keyed by it.
struct ExperimentConfig {
  std::string scale = "desk";  // "paper" requires an explicit CLI opt-in
  std::uint64_t seed = 7;
  DatasetConfig dataset;
  ModelsConfig models;
  AttacksConfig attacks;
  EvaluationConfig evaluation;
  std::string output_dir = "runs/desk";

  std::uint64_t dataset_seed() const { return derive_seed(seed, 0xDA7A); }
  std::uint64_t attack_set_seed() const { return derive_seed(seed, 0xA77C); }
  std::uint64_t train_seed(const std::string& arch, dataset::ClassMode def) const {
    return derive_seed(seed, 0x7121, hash_str(arch), static_cast<std::uint64_t>(def));
  }
  std::uint64_t gan_seed(const std::string& arch, dataset::ClassMode def) const {
    return derive_seed(seed, 0x6A12, hash_str(arch), static_cast<std::uint64_t>(def));
  }

  dataset::ManipulationTable table() const {
    return dataset::ManipulationTable(dataset.awgn_sigmas, dataset.blur_sigmas,
                                      dataset.median_windows);
  }
};

inline json to_json(const ExperimentConfig& c) {
  json d{{"patch_size", c.dataset.patch_size},
         {"channels", c.dataset.channels},
         {"awgn_sigmas", c.dataset.awgn_sigmas},
         {"blur_sigmas", c.dataset.blur_sigmas},
         {"median_windows", c.dataset.median_windows},
         {"split", {{"train", c.dataset.split.train},
                    {"validation", c.dataset.split.validation},
                    {"test", c.dataset.split.test}}},
         {"quantize_8bit", c.dataset.quantize}};
  if (c.dataset.corpus_dir)
    d["corpus_dir"] = *c.dataset.corpus_dir;
  else
    d["synthetic"] = {{"num_sources", c.dataset.synthetic.num_sources},
                      {"source_size", c.dataset.synthetic.source_size}};

  const auto& t = c.models.train;
  json m{{"architectures", c.models.architectures},
         {"train", {{"initial_lr", t.initial_lr},
                    {"lr_halving_period", t.lr_halving_period},
                    {"batch_size", t.batch_size},
                    {"max_epochs", t.max_epochs},
                    {"early_stop", {{"enabled", t.early_stop.enabled},
                                    {"patience", t.early_stop.patience}}},
                    {"momentum", t.momentum}}}};

  const auto& f = c.attacks.ifgsm;
  const auto& g = c.attacks.gan;
  json a{{"ifgsm", {{"epsilon", f.epsilon},
                    {"iterations", f.iterations},
                    {"quantize_8bit", f.quantize}}},
         {"gan", {{"alpha", g.alpha}, {"beta", g.beta}, {"gamma", g.gamma},
                  {"steps", g.steps}, {"batch_size", g.batch_size},
                  {"g_lr", g.g_lr}, {"d_lr", g.d_lr},
                  {"hidden_channels", g.hidden_channels},
                  {"quantize_8bit", g.quantize}}}};

  return json{{"scale", c.scale},
              {"seed", c.seed},
              {"dataset", d},
              {"models", m},
              {"attacks", a},
              {"evaluation", {{"attack_set_per_class", c.evaluation.attack_set_per_class}}},
              {"output_dir", c.output_dir}};
}

inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.scale = j.value("scale", c.scale);
  c.seed = j.value("seed", c.seed);
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();

  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    if (d.contains("corpus_dir")) c.dataset.corpus_dir = d.at("corpus_dir").get<std::string>();
    if (d.contains("synthetic")) {
      c.dataset.synthetic.num_sources = d.at("synthetic").value("num_sources", 48);
      c.dataset.synthetic.source_size = d.at("synthetic").value("source_size", 128);
    }
    c.dataset.patch_size = d.value("patch_size", c.dataset.patch_size);
    c.dataset.channels = d.value("channels", c.dataset.channels);
    if (d.contains("awgn_sigmas")) c.dataset.awgn_sigmas = d.at("awgn_sigmas").get<std::vector<double>>();
    if (d.contains("blur_sigmas")) c.dataset.blur_sigmas = d.at("blur_sigmas").get<std::vector<double>>();
    if (d.contains("median_windows")) c.dataset.median_windows = d.at("median_windows").get<std::vector<double>>();
    if (d.contains("split")) {
      c.dataset.split.train = d.at("split").value("train", 0.8);
      c.dataset.split.validation = d.at("split").value("validation", 0.1);
      c.dataset.split.test = d.at("split").value("test", 0.1);
    }
    c.dataset.quantize = d.value("quantize_8bit", true);
  }
  if (j.contains("models")) {
    const auto& m = j.at("models");
    if (m.contains("architectures"))
      c.models.architectures = m.at("architectures").get<std::vector<std::string>>();
    if (m.contains("train")) {
      const auto& t = m.at("train");
      c.models.train.initial_lr = t.value("initial_lr", c.models.train.initial_lr);
      c.models.train.lr_halving_period = t.value("lr_halving_period", 4);
      c.models.train.batch_size = t.value("batch_size", 25);
      c.models.train.max_epochs = t.value("max_epochs", 43);
      if (t.contains("early_stop")) {
        c.models.train.early_stop.enabled = t.at("early_stop").value("enabled", true);
        c.models.train.early_stop.patience = t.at("early_stop").value("patience", 2);
      }
      c.models.train.momentum = t.value("momentum", 0.9);
    }
  }
  if (j.contains("attacks")) {
    const auto& a = j.at("attacks");
    if (a.contains("ifgsm")) {
      c.attacks.ifgsm.epsilon = a.at("ifgsm").value("epsilon", 0.1);
      c.attacks.ifgsm.iterations = a.at("ifgsm").value("iterations", 100);
      c.attacks.ifgsm.quantize = a.at("ifgsm").value("quantize_8bit", true);
    }
    if (a.contains("gan")) {
      const auto& g = a.at("gan");
      c.attacks.gan.alpha = g.value("alpha", 10.0);
      c.attacks.gan.beta = g.value("beta", 1.0);
      c.attacks.gan.gamma = g.value("gamma", 1.0);
      c.attacks.gan.steps = g.value("steps", 600);
      c.attacks.gan.batch_size = g.value("batch_size", 16);
      c.attacks.gan.g_lr = g.value("g_lr", 1e-3);
      c.attacks.gan.d_lr = g.value("d_lr", 2e-4);
      c.attacks.gan.hidden_channels = g.value("hidden_channels", 8);
      c.attacks.gan.quantize = g.value("quantize_8bit", true);
    }
  }
  if (j.contains("evaluation"))
    c.evaluation.attack_set_per_class =
        j.at("evaluation").value("attack_set_per_class", 4);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

/// FNV-1a over the canonical serialization, excluding the output directory:
/// the digest identifies a run's *inputs*.
inline std::string config_digest(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  const std::uint64_t h = hash_str(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace advxfer::run
