#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "advxfer/attacks/types.hpp"
#include "advxfer/models/model.hpp"

namespace advxfer::eval {

/// SAR of one adversarial set against one model: the fraction classified as
/// the model's "unaltered" class.
struct SarResult {
  std::string arch;
  dataset::ClassMode def = dataset::ClassMode::kDetector;
  attacks::AttackKind attack = attacks::AttackKind::kIfgsm;
  long n_total = 0;
  long n_unaltered = 0;
  double sar = 0.0;
};

inline SarResult successful_attack_rate(
    const models::TrainedModel& model,
    std::span<const attacks::AdversarialExample> adv_set) {
  if (adv_set.empty())
    throw std::invalid_argument("successful_attack_rate: empty adversarial set");
  long hits = 0;
  const auto n = static_cast<std::ptrdiff_t>(adv_set.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : hits)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& adv = adv_set[static_cast<std::size_t>(i)];
    if (models::predict(model, adv.attacked.pixels).label == model.unaltered_class())
      ++hits;
  }
  SarResult r;
  r.arch = model.arch;
  r.def = model.def.mode;
  r.attack = adv_set.front().attack;
  r.n_total = static_cast<long>(adv_set.size());
  r.n_unaltered = hits;
  r.sar = static_cast<double>(hits) / static_cast<double>(r.n_total);
  return r;
}

/// SAR of the unknown classifier over the SAR of the known classifier.
/// Undefined (nullopt) when the known SAR is zero; undefined cells stay out
/// of averages.
inline std::optional<double> transferability_score(double sar_unknown,
                                                   double sar_known) {
  if (sar_unknown < 0.0 || sar_unknown > 1.0 || sar_known < 0.0 || sar_known > 1.0)
    throw std::invalid_argument("transferability_score: SARs must lie in [0,1]");
  if (sar_known == 0.0) return std::nullopt;
  return sar_unknown / sar_known;
}

/// One cell of a transfer table: an attack crafted against (arch, known_def),
/// evaluated on the same architecture under unknown_def.
struct TransferRecord {
  attacks::AttackKind attack = attacks::AttackKind::kIfgsm;
  std::string arch;
  dataset::ClassMode known_def = dataset::ClassMode::kDetector;
  dataset::ClassMode unknown_def = dataset::ClassMode::kDetector;
  double sar_known = 0.0;
  double sar_unknown = 0.0;
  std::optional<double> t_score;
};

using ModelGrid =
    std::map<std::string, std::map<dataset::ClassMode, const models::TrainedModel*>>;
using AdvGrid = std::map<std::string,
                         std::map<dataset::ClassMode,
                                  const std::vector<attacks::AdversarialExample>*>>;

/// Evaluate every adversarial set against every same-architecture model,
/// including the known model itself (unknown_def == known_def gives the
/// perfect-knowledge record with t_score 1).
inline std::vector<TransferRecord> transfer_matrix(const ModelGrid& models,
                                                   const AdvGrid& adv_sets,
                                                   attacks::AttackKind attack) {
  std::vector<TransferRecord> records;
  for (const auto& [arch, by_known] : adv_sets) {
    const auto mit = models.find(arch);
    if (mit == models.end())
      throw std::invalid_argument("transfer_matrix: no models for architecture " + arch);
    for (const auto& [known_def, adv] : by_known) {
      const auto kit = mit->second.find(known_def);
      if (kit == mit->second.end())
        throw std::invalid_argument(
            std::string("transfer_matrix: adversarial set for ") + arch + "/" +
            dataset::class_mode_name(known_def) + " has no matching known model");
      const double sar_known = successful_attack_rate(*kit->second, *adv).sar;
      for (const auto& [eval_def, model] : mit->second) {
        TransferRecord rec;
        rec.attack = attack;
        rec.arch = arch;
        rec.known_def = known_def;
        rec.unknown_def = eval_def;
        rec.sar_known = sar_known;
        rec.sar_unknown = eval_def == known_def
                              ? sar_known
                              : successful_attack_rate(*model, *adv).sar;
        rec.t_score = transferability_score(rec.sar_unknown, rec.sar_known);
        records.push_back(std::move(rec));
      }
    }
  }
  return records;
}

/// Per-(architecture, class definition) accuracy grid over a labeled set.
struct BaselineCell {
  std::string arch;
  dataset::ClassMode def = dataset::ClassMode::kDetector;
  double accuracy = 0.0;
};

inline std::vector<BaselineCell> baseline_table(
    const ModelGrid& models, std::span<const dataset::LabeledPatch> test_set) {
  if (test_set.empty()) throw std::invalid_argument("baseline_table: empty test set");
  std::vector<BaselineCell> cells;
  for (const auto& [arch, by_def] : models)
    for (const auto& [mode, model] : by_def)
      cells.push_back({arch, mode, models::accuracy(*model, test_set, model->def)});
  return cells;
}

/// Unweighted mean, the "Average" row convention; undefined cells excluded.
inline std::optional<double> mean_defined(
    const std::vector<std::optional<double>>& values) {
  double sum = 0.0;
  int n = 0;
  for (const auto& v : values)
    if (v.has_value()) {
      sum += *v;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace advxfer::eval
