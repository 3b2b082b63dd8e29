#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "advxfer/core/npy.hpp"
#include "advxfer/dataset/labels.hpp"
#include "advxfer/dataset/patch.hpp"

namespace advxfer::attacks {

enum class AttackKind { kIfgsm, kGan };

inline const char* attack_name(AttackKind k) {
  return k == AttackKind::kIfgsm ? "ifgsm" : "gan";
}

inline AttackKind attack_from_name(const std::string& s) {
  if (s == "ifgsm") return AttackKind::kIfgsm;
  if (s == "gan") return AttackKind::kGan;
  throw std::invalid_argument("unknown attack '" + s + "' (expected ifgsm|gan)");
}

/// One attacked patch, with the identity of the known model it was crafted
/// against and the fine label of the original.
struct AdversarialExample {
  dataset::ImagePatch original;
  dataset::ImagePatch attacked;
  AttackKind attack = AttackKind::kIfgsm;
  std::string arch;
  dataset::ClassMode known_def = dataset::ClassMode::kDetector;
  int fine_label = 0;
};

namespace fs = std::filesystem;

inline void write_adversarial_manifest(const fs::path& dir,
                                       const std::vector<AdversarialExample>& set) {
  fs::create_directories(dir / "originals");
  fs::create_directories(dir / "attacked");
  std::ofstream out(dir / "manifest.jsonl");
  if (!out) throw std::runtime_error("cannot write adversarial manifest in " + dir.string());
  int i = 0;
  for (const auto& adv : set) {
    const std::string stem = adv.original.source_id + "_p" +
                             std::to_string(adv.original.patch_index) + "_f" +
                             std::to_string(adv.fine_label) + "_" + std::to_string(i);
    write_npy(dir / "originals" / (stem + ".npy"), adv.original.pixels);
    write_npy(dir / "attacked" / (stem + ".npy"), adv.attacked.pixels);
    nlohmann::json rec{{"original", "originals/" + stem + ".npy"},
                       {"attacked", "attacked/" + stem + ".npy"},
                       {"attack", attack_name(adv.attack)},
                       {"arch", adv.arch},
                       {"known_def", dataset::class_mode_name(adv.known_def)},
                       {"source_id", adv.original.source_id},
                       {"patch_index", adv.original.patch_index},
                       {"fine_label", adv.fine_label}};
    out << rec.dump() << "\n";
    ++i;
  }
}

inline std::vector<AdversarialExample> read_adversarial_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.jsonl");
  if (!in)
    throw std::runtime_error("missing adversarial manifest: " +
                             (dir / "manifest.jsonl").string());
  std::vector<AdversarialExample> set;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto rec = nlohmann::json::parse(line);
    AdversarialExample adv;
    adv.original.pixels = read_npy(dir / rec.at("original").get<std::string>());
    adv.attacked.pixels = read_npy(dir / rec.at("attacked").get<std::string>());
    adv.original.source_id = rec.at("source_id").get<std::string>();
    adv.original.patch_index = rec.at("patch_index").get<int>();
    adv.attacked.source_id = adv.original.source_id;
    adv.attacked.patch_index = adv.original.patch_index;
    adv.attack = attack_from_name(rec.at("attack").get<std::string>());
    adv.arch = rec.at("arch").get<std::string>();
    adv.known_def = dataset::class_mode_from_name(rec.at("known_def").get<std::string>());
    adv.fine_label = rec.at("fine_label").get<int>();
    set.push_back(std::move(adv));
  }
  return set;
}

}  // namespace advxfer::attacks
