#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "advxfer/models/model.hpp"

namespace advxfer::models {

// Checkpoint container: magic, schema version, JSON metadata, raw float32
// parameter blob. Weights round-trip bit exactly.

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[4] = {'A', 'X', 'C', 'K'};

inline void save_checkpoint(const std::filesystem::path& path,
                            const TrainedModel& model) {
  nlohmann::json meta{
      {"arch", model.arch},
      {"class_def", dataset::class_mode_name(model.def.mode)},
      {"num_classes", model.def.num_classes},
      {"fine_to_class", model.def.fine_to_class},
      {"input", {model.net.input_shape().c, model.net.input_shape().h,
                 model.net.input_shape().w}},
      {"epochs_run", model.meta.epochs_run},
      {"best_val_accuracy", model.meta.best_val_accuracy},
      {"seed", model.meta.seed},
      {"n_params", model.net.n_params()}};
  const std::string mjson = meta.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, 4);
  const std::uint32_t version = kCheckpointVersion;
  out.write(reinterpret_cast<const char*>(&version), 4);
  const std::uint64_t jlen = mjson.size();
  out.write(reinterpret_cast<const char*>(&jlen), 8);
  out.write(mjson.data(), static_cast<std::streamsize>(mjson.size()));
  const auto params = model.net.params();
  out.write(reinterpret_cast<const char*>(params.data()),
            static_cast<std::streamsize>(params.size() * sizeof(float)));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path.string());
}

inline TrainedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw std::runtime_error("corrupt checkpoint (bad magic): " + path.string());
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint schema version " + std::to_string(version) +
                             " unsupported (expected " +
                             std::to_string(kCheckpointVersion) + "): " + path.string());
  std::uint64_t jlen = 0;
  in.read(reinterpret_cast<char*>(&jlen), 8);
  if (!in || jlen > (1u << 20))
    throw std::runtime_error("corrupt checkpoint (metadata length): " + path.string());
  std::string mjson(jlen, '\0');
  in.read(mjson.data(), static_cast<std::streamsize>(jlen));
  if (!in) throw std::runtime_error("corrupt checkpoint (truncated metadata): " + path.string());

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(mjson);
  } catch (const nlohmann::json::exception&) {
    throw std::runtime_error("corrupt checkpoint (metadata not parseable): " + path.string());
  }

  TrainedModel model;
  model.arch = meta.at("arch").get<std::string>();
  model.def.mode = dataset::class_mode_from_name(meta.at("class_def").get<std::string>());
  model.def.num_classes = meta.at("num_classes").get<int>();
  model.def.fine_to_class = meta.at("fine_to_class").get<std::vector<int>>();
  const auto dims = meta.at("input").get<std::vector<int>>();
  if (dims.size() != 3) throw std::runtime_error("corrupt checkpoint (input shape)");
  model.net = build_architecture(model.arch, {dims[0], dims[1], dims[2]},
                                 model.def.num_classes);
  model.meta.epochs_run = meta.at("epochs_run").get<int>();
  model.meta.best_val_accuracy = meta.at("best_val_accuracy").get<double>();
  model.meta.seed = meta.at("seed").get<std::uint64_t>();

  const auto n_params = meta.at("n_params").get<std::uint64_t>();
  if (n_params != model.net.n_params())
    throw std::runtime_error("corrupt checkpoint (parameter count mismatch): " +
                             path.string());
  auto params = model.net.params();
  in.read(reinterpret_cast<char*>(params.data()),
          static_cast<std::streamsize>(params.size() * sizeof(float)));
  if (!in) throw std::runtime_error("corrupt checkpoint (truncated weights): " + path.string());
  return model;
}

}  // namespace advxfer::models
