#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "advxfer/core/random.hpp"
#include "advxfer/dataset/labels.hpp"
#include "advxfer/dataset/manipulations.hpp"
#include "advxfer/dataset/patch.hpp"

namespace advxfer::dataset {

struct LabeledPatch {
  ImagePatch patch;
  int fine_label = 0;
};

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  std::vector<LabeledPatch> train;
  std::vector<LabeledPatch> validation;
  std::vector<LabeledPatch> test;
  std::uint64_t seed = 0;
};

struct BuildOptions {
  int patch_size = 64;
  SplitRatios split;
  bool quantize = true;
};

// Train/validation/test are split by SOURCE IMAGE so that no two splits share
// patches from the same image.
inline DatasetSplit build_dataset(const std::vector<SourceImage>& corpus,
                                  const ManipulationTable& table,
                                  const BuildOptions& opt, std::uint64_t seed) {
  if (corpus.empty()) throw std::invalid_argument("build_dataset: empty corpus");
  const double ratio_sum = opt.split.train + opt.split.validation + opt.split.test;
  if (ratio_sum < 0.999 || ratio_sum > 1.001)
    throw std::invalid_argument("build_dataset: split ratios must sum to 1");

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(derive_seed(seed, 0x5317));
  std::shuffle(order.begin(), order.end(), rng);

  const auto n = static_cast<double>(corpus.size());
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(n * opt.split.validation)));
  const auto n_test = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(n * opt.split.test)));
  if (n_val + n_test >= corpus.size())
    throw std::invalid_argument(
        "build_dataset: corpus of " + std::to_string(corpus.size()) +
        " sources is too small to populate train/validation/test");
  const std::size_t n_train = corpus.size() - n_val - n_test;

  DatasetSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const SourceImage& src = corpus[order[i]];
    std::vector<LabeledPatch>* dst =
        i < n_train ? &split.train
                    : (i < n_train + n_val ? &split.validation : &split.test);
    for (ImagePatch& p : extract_patches(src.image, src.id, opt.patch_size)) {
      for (const FineLabel& label : table.all()) {
        const std::uint64_t mseed =
            derive_seed(seed, hash_str(p.source_id),
                        static_cast<std::uint64_t>(p.patch_index),
                        static_cast<std::uint64_t>(label.index));
        ImagePatch v = apply_manipulation(p, label.spec, mseed);
        if (opt.quantize) v.pixels = quantize_8bit(v.pixels);
        dst->push_back({std::move(v), label.index});
      }
    }
  }
  return split;
}

inline std::set<std::string> source_ids(const std::vector<LabeledPatch>& items) {
  std::set<std::string> ids;
  for (const auto& it : items) ids.insert(it.patch.source_id);
  return ids;
}

/// True when no source image contributes patches to two different splits.
inline bool splits_disjoint(const DatasetSplit& s) {
  const auto a = source_ids(s.train);
  const auto b = source_ids(s.validation);
  const auto c = source_ids(s.test);
  for (const auto& id : b)
    if (a.count(id)) return false;
  for (const auto& id : c)
    if (a.count(id) || b.count(id)) return false;
  return true;
}

struct AttackSet {
  std::vector<LabeledPatch> patches;  // manipulated test patches only
  int per_class = 0;
};

/// Balanced draw of manipulated patches from the test split, `per_class` from
/// each fine class >= 1. Deterministic under `seed`.
inline AttackSet sample_attack_set(const DatasetSplit& split,
                                   const ManipulationTable& table,
                                   int per_class, std::uint64_t seed) {
  if (per_class <= 0) throw std::invalid_argument("sample_attack_set: per_class must be >= 1");
  std::map<int, std::vector<const LabeledPatch*>> by_class;
  for (const auto& it : split.test)
    if (it.fine_label != 0) by_class[it.fine_label].push_back(&it);

  AttackSet out;
  out.per_class = per_class;
  for (int f = 1; f < table.num_fine(); ++f) {
    auto& bucket = by_class[f];
    if (static_cast<int>(bucket.size()) < per_class)
      throw std::runtime_error(
          "sample_attack_set: test split holds " + std::to_string(bucket.size()) +
          " patches of fine class " + std::to_string(f) + ", need " +
          std::to_string(per_class));
    auto rng = make_rng(derive_seed(seed, 0xA77A, static_cast<std::uint64_t>(f)));
    std::shuffle(bucket.begin(), bucket.end(), rng);
    for (int i = 0; i < per_class; ++i) out.patches.push_back(*bucket[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace advxfer::dataset
