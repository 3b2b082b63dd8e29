#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "advxfer/core/npy.hpp"
#include "advxfer/dataset/build.hpp"

namespace advxfer::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

// One JSONL record per labeled patch: path, provenance, fine label, split.

inline std::string patch_file_name(const std::string& source_id, int patch_index,
                                   int fine_label) {
  return source_id + "_p" + std::to_string(patch_index) + "_f" +
         std::to_string(fine_label) + ".npy";
}

inline void write_split_manifest(const fs::path& dir, const DatasetSplit& split) {
  fs::create_directories(dir / "patches");
  std::ofstream out(dir / "manifest.jsonl");
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  auto dump = [&](const std::vector<LabeledPatch>& items, const char* name) {
    for (const auto& it : items) {
      const std::string file =
          patch_file_name(it.patch.source_id, it.patch.patch_index, it.fine_label);
      write_npy(dir / "patches" / file, it.patch.pixels);
      json rec{{"path", "patches/" + file},
               {"source_id", it.patch.source_id},
               {"patch_index", it.patch.patch_index},
               {"fine_label", it.fine_label},
               {"split", name}};
      out << rec.dump() << "\n";
    }
  };
  dump(split.train, "train");
  dump(split.validation, "validation");
  dump(split.test, "test");
}

inline DatasetSplit read_split_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.jsonl");
  if (!in)
    throw std::runtime_error("missing dataset manifest: " +
                             (dir / "manifest.jsonl").string());
  DatasetSplit split;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    LabeledPatch item;
    item.patch.pixels = read_npy(dir / rec.at("path").get<std::string>());
    item.patch.source_id = rec.at("source_id").get<std::string>();
    item.patch.patch_index = rec.at("patch_index").get<int>();
    item.fine_label = rec.at("fine_label").get<int>();
    const std::string s = rec.at("split").get<std::string>();
    if (s == "train") split.train.push_back(std::move(item));
    else if (s == "validation") split.validation.push_back(std::move(item));
    else if (s == "test") split.test.push_back(std::move(item));
    else throw std::runtime_error("manifest: unknown split '" + s + "'");
  }
  return split;
}

inline void write_attack_set_manifest(const fs::path& dir, const AttackSet& set) {
  std::ofstream out(dir / "attack_set.jsonl");
  if (!out) throw std::runtime_error("cannot write attack_set manifest in " + dir.string());
  for (const auto& it : set.patches) {
    json rec{{"path", "patches/" + patch_file_name(it.patch.source_id,
                                                   it.patch.patch_index,
                                                   it.fine_label)},
             {"source_id", it.patch.source_id},
             {"patch_index", it.patch.patch_index},
             {"fine_label", it.fine_label},
             {"split", "test"}};
    out << rec.dump() << "\n";
  }
}

inline AttackSet read_attack_set_manifest(const fs::path& dir) {
  std::ifstream in(dir / "attack_set.jsonl");
  if (!in)
    throw std::runtime_error("missing attack_set manifest: " +
                             (dir / "attack_set.jsonl").string());
  AttackSet set;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json rec = json::parse(line);
    LabeledPatch item;
    item.patch.pixels = read_npy(dir / rec.at("path").get<std::string>());
    item.patch.source_id = rec.at("source_id").get<std::string>();
    item.patch.patch_index = rec.at("patch_index").get<int>();
    item.fine_label = rec.at("fine_label").get<int>();
    set.patches.push_back(std::move(item));
  }
  return set;
}

}  // namespace advxfer::dataset
