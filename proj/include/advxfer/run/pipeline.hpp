#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "advxfer/attacks/gan.hpp"
#include "advxfer/attacks/ifgsm.hpp"
#include "advxfer/dataset/corpus_io.hpp"
#include "advxfer/dataset/manifest.hpp"
#include "advxfer/dataset/synthetic.hpp"
#include "advxfer/eval/reports.hpp"
#include "advxfer/models/checkpoint.hpp"
#include "advxfer/models/train.hpp"
#include "advxfer/run/config.hpp"

namespace advxfer::run {

namespace fs = std::filesystem;

struct StageResult {
  fs::path artifact;
  bool skipped = false;
  std::string message;
};

// ---- artifact layout, keyed by the config digest

inline fs::path data_dir(const ExperimentConfig& c) {
  return fs::path(c.output_dir) / ("data-" + config_digest(c));
}
inline fs::path model_path(const ExperimentConfig& c, const std::string& arch,
                           dataset::ClassMode def) {
  return fs::path(c.output_dir) / "models" /
         (arch + "-" + dataset::class_mode_name(def) + "-" + config_digest(c) + ".ckpt");
}
inline fs::path training_log_path(const ExperimentConfig& c, const std::string& arch,
                                  dataset::ClassMode def) {
  return fs::path(c.output_dir) / "models" /
         (arch + "-" + dataset::class_mode_name(def) + "-" + config_digest(c) + ".log.jsonl");
}
inline fs::path gan_bundle_path(const ExperimentConfig& c, const std::string& arch,
                                dataset::ClassMode def) {
  return fs::path(c.output_dir) / "gan" /
         (arch + "-" + dataset::class_mode_name(def) + "-" + config_digest(c) + ".ganckpt");
}
inline fs::path attack_dir(const ExperimentConfig& c, attacks::AttackKind attack,
                           const std::string& arch, dataset::ClassMode def) {
  return fs::path(c.output_dir) / "attacks" /
         (std::string(attacks::attack_name(attack)) + "-" + arch + "-" +
          dataset::class_mode_name(def) + "-" + config_digest(c));
}
inline fs::path reports_dir(const ExperimentConfig& c) {
  return fs::path(c.output_dir) / ("reports-" + config_digest(c));
}

// ---- run record: append-only stage journal (the only place wall time goes)

inline void append_run_event(const ExperimentConfig& c, const std::string& stage,
                             const std::string& status,
                             const std::vector<std::string>& artifacts) {
  const fs::path path = fs::path(c.output_dir) / "run.json";
  nlohmann::json record = nlohmann::json::array();
  if (fs::exists(path)) {
    std::ifstream in(path);
    try {
      in >> record;
    } catch (const nlohmann::json::exception&) {
      record = nlohmann::json::array();
    }
  }
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                        now.time_since_epoch()).count();
  record.push_back({{"stage", stage},
                    {"config_digest", config_digest(c)},
                    {"status", status},
                    {"unix_time", secs},
                    {"artifacts", artifacts}});
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << record.dump(2) << "\n";
}

// ---- stage 1: dataset + attack-set manifests

inline std::vector<dataset::SourceImage> load_corpus(const ExperimentConfig& c) {
  if (c.dataset.corpus_dir)
    return dataset::load_corpus_dir(*c.dataset.corpus_dir, c.dataset.channels);
  return dataset::synth_corpus({c.dataset.synthetic.num_sources,
                                c.dataset.synthetic.source_size, c.dataset.channels},
                               c.dataset_seed());
}

inline StageResult cmd_prepare_data(const ExperimentConfig& c,
                                    bool allow_paper_scale = false) {
  if (c.scale == "paper" && !allow_paper_scale)
    throw std::runtime_error(
        "config is paper scale (full-size corpus, 6,000-patch attack set); "
        "pass --paper-scale to confirm the compute cost");

  const fs::path dir = data_dir(c);
  const nlohmann::json cfg_json = to_json(c);
  if (fs::exists(dir / "config.json")) {
    std::ifstream in(dir / "config.json");
    nlohmann::json stored;
    in >> stored;
    nlohmann::json a = stored, b = cfg_json;
    a.erase("output_dir");
    b.erase("output_dir");
    if (a.dump() != b.dump())
      throw std::runtime_error("digest collision: " + dir.string() +
                               " holds a different config; refusing to overwrite");
    return {dir, true, "dataset already prepared for digest " + config_digest(c)};
  }

  const auto corpus = load_corpus(c);
  const auto table = c.table();
  dataset::BuildOptions opt;
  opt.patch_size = c.dataset.patch_size;
  opt.split = c.dataset.split;
  opt.quantize = c.dataset.quantize;
  const auto split = dataset::build_dataset(corpus, table, opt, c.dataset_seed());
  const auto attack_set = dataset::sample_attack_set(
      split, table, c.evaluation.attack_set_per_class, c.attack_set_seed());

  fs::create_directories(dir);
  dataset::write_split_manifest(dir, split);
  dataset::write_attack_set_manifest(dir, attack_set);
  {
    std::ofstream out(dir / "config.json");
    out << cfg_json.dump(2) << "\n";
  }
  append_run_event(c, "prepare-data", "done",
                   {(dir / "manifest.jsonl").string(),
                    (dir / "attack_set.jsonl").string()});
  return {dir, false,
          "dataset: " + std::to_string(split.train.size()) + " train, " +
              std::to_string(split.validation.size()) + " validation, " +
              std::to_string(split.test.size()) + " test, attack set " +
              std::to_string(attack_set.patches.size())};
}

// ---- stage 2: training

inline StageResult cmd_train(const ExperimentConfig& c, const std::string& arch,
                             dataset::ClassMode mode) {
  const fs::path ckpt = model_path(c, arch, mode);
  if (fs::exists(ckpt)) {
    models::load_checkpoint(ckpt);  // corrupt checkpoints fail loudly here
    return {ckpt, true, "checkpoint exists: " + ckpt.string()};
  }
  const fs::path dir = data_dir(c);
  if (!fs::exists(dir / "manifest.jsonl"))
    throw std::runtime_error("dataset manifest missing for this config; run prepare-data first");

  const auto split = dataset::read_split_manifest(dir);
  const auto table = c.table();
  const auto def = dataset::make_class_definition(mode, table);
  const Shape3 input{c.dataset.channels, c.dataset.patch_size, c.dataset.patch_size};

  auto base = models::build_model(arch, def, input, c.train_seed(arch, mode));
  models::TrainConfig tc = c.models.train;
  tc.seed = c.train_seed(arch, mode);
  std::vector<models::EpochRecord> log;
  const auto model = models::train(base, split, def, tc, &log);

  fs::create_directories(ckpt.parent_path());
  models::save_checkpoint(ckpt, model);
  models::write_training_log(training_log_path(c, arch, mode), log);
  append_run_event(c, "train", "done", {ckpt.string()});
  return {ckpt, false,
          arch + "/" + dataset::class_mode_name(mode) + ": " +
              std::to_string(model.meta.epochs_run) + " epochs, best val acc " +
              std::to_string(model.meta.best_val_accuracy)};
}

inline std::vector<StageResult> cmd_train_all(const ExperimentConfig& c) {
  std::vector<StageResult> results;
  for (const auto& arch : c.models.architectures)
    for (const auto mode : eval::kDefOrder)
      results.push_back(cmd_train(c, arch, mode));
  return results;
}

// ---- stage 3: attacks

inline StageResult cmd_attack(const ExperimentConfig& c, attacks::AttackKind attack,
                              const std::string& arch, dataset::ClassMode mode) {
  const fs::path dir = attack_dir(c, attack, arch, mode);
  if (fs::exists(dir / "manifest.jsonl"))
    return {dir, true, "adversarial set exists: " + dir.string()};

  const fs::path ckpt = model_path(c, arch, mode);
  if (!fs::exists(ckpt))
    throw std::runtime_error("no checkpoint for " + arch + "/" +
                             dataset::class_mode_name(mode) +
                             "; run train for this pairing first");
  const fs::path ddir = data_dir(c);
  if (!fs::exists(ddir / "attack_set.jsonl"))
    throw std::runtime_error("attack-set manifest missing; run prepare-data first");

  const auto model = models::load_checkpoint(ckpt);
  const auto attack_set = dataset::read_attack_set_manifest(ddir);

  std::vector<attacks::AdversarialExample> advs;
  if (attack == attacks::AttackKind::kIfgsm) {
    advs = attacks::ifgsm_attack_set(model, attack_set, c.attacks.ifgsm);
  } else {
    const fs::path gpath = gan_bundle_path(c, arch, mode);
    attacks::GanAttackBundle bundle;
    if (fs::exists(gpath)) {
      bundle = attacks::load_gan_bundle(gpath);
    } else {
      const auto split = dataset::read_split_manifest(ddir);
      const auto [manip, clean] = attacks::split_by_altered(std::span(split.train));
      attacks::GanConfig gc = c.attacks.gan;
      gc.seed = c.gan_seed(arch, mode);
      bundle = attacks::train_attack_gan(model, manip, clean, gc);
      fs::create_directories(gpath.parent_path());
      attacks::save_gan_bundle(gpath, bundle, gc.hidden_channels);
      append_run_event(c, "train-gan", bundle.stats.diverged ? "diverged" : "done",
                       {gpath.string()});
    }
    advs = attacks::gan_attack_set(bundle, attack_set);
  }

  fs::create_directories(dir);
  attacks::write_adversarial_manifest(dir, advs);
  append_run_event(c, "attack", "done", {(dir / "manifest.jsonl").string()});
  return {dir, false,
          std::string(attacks::attack_name(attack)) + " vs " + arch + "/" +
              dataset::class_mode_name(mode) + ": " + std::to_string(advs.size()) +
              " adversarial records"};
}

// ---- stage 4: evaluation reports (Tables 2-10 analogues)

struct LoadedGrid {
  std::map<std::string, std::map<dataset::ClassMode, models::TrainedModel>> models;
  std::map<attacks::AttackKind,
           std::map<std::string,
                    std::map<dataset::ClassMode, std::vector<attacks::AdversarialExample>>>>
      adv;
  std::vector<std::string> gaps;
};

inline LoadedGrid load_grid(const ExperimentConfig& c) {
  LoadedGrid grid;
  for (const auto& arch : c.models.architectures)
    for (const auto mode : eval::kDefOrder) {
      const fs::path ckpt = model_path(c, arch, mode);
      if (fs::exists(ckpt))
        grid.models[arch].emplace(mode, models::load_checkpoint(ckpt));
      else
        grid.gaps.push_back("missing checkpoint: " + arch + "/" +
                            dataset::class_mode_name(mode));
    }
  for (const auto attack : {attacks::AttackKind::kIfgsm, attacks::AttackKind::kGan})
    for (const auto& arch : c.models.architectures)
      for (const auto mode : eval::kDefOrder) {
        const fs::path dir = attack_dir(c, attack, arch, mode);
        if (!fs::exists(dir / "manifest.jsonl")) {
          grid.gaps.push_back(std::string("missing adversarial set: ") +
                              attacks::attack_name(attack) + "/" + arch + "/" +
                              dataset::class_mode_name(mode));
          continue;
        }
        if (!grid.models.count(arch) || !grid.models.at(arch).count(mode)) {
          grid.gaps.push_back(std::string("adversarial set without model: ") +
                              attacks::attack_name(attack) + "/" + arch + "/" +
                              dataset::class_mode_name(mode));
          continue;
        }
        grid.adv[attack][arch][mode] = attacks::read_adversarial_manifest(dir);
      }
  return grid;
}

inline StageResult cmd_evaluate(const ExperimentConfig& c) {
  const fs::path ddir = data_dir(c);
  if (!fs::exists(ddir / "manifest.jsonl"))
    throw std::runtime_error("dataset manifest missing; run prepare-data first");
  const auto split = dataset::read_split_manifest(ddir);
  const auto grid = load_grid(c);
  const std::string digest = config_digest(c);
  const fs::path rdir = reports_dir(c);

  eval::ModelGrid model_ptrs;
  for (const auto& [arch, by_def] : grid.models)
    for (const auto& [mode, model] : by_def) model_ptrs[arch][mode] = &model;

  // baseline accuracy table
  std::vector<eval::BaselineCell> cells;
  if (!model_ptrs.empty()) cells = eval::baseline_table(model_ptrs, split.test);
  auto baseline = eval::build_baseline_report(cells, c.models.architectures);
  for (const auto& g : grid.gaps) baseline.notes.push_back(g);
  eval::write_report(rdir, baseline, digest, c.seed);

  // perfect-knowledge + transfer tables per attack
  int files = 1;
  for (const auto attack : {attacks::AttackKind::kIfgsm, attacks::AttackKind::kGan}) {
    eval::AdvGrid adv_ptrs;
    if (grid.adv.count(attack))
      for (const auto& [arch, by_def] : grid.adv.at(attack))
        for (const auto& [mode, set] : by_def) adv_ptrs[arch][mode] = &set;
    const auto records = eval::transfer_matrix(model_ptrs, adv_ptrs, attack);

    auto pk = eval::build_perfect_knowledge_report(records, attack,
                                                   c.models.architectures);
    eval::write_report(rdir, pk, digest, c.seed);
    ++files;
    for (const auto mode : eval::kDefOrder) {
      auto tr = eval::build_transfer_report(records, attack, mode,
                                            c.models.architectures);
      eval::write_report(rdir, tr, digest, c.seed);
      ++files;
    }
  }
  append_run_event(c, "evaluate", grid.gaps.empty() ? "done" : "partial",
                   {rdir.string()});
  return {rdir, false,
          std::to_string(files) + " report tables written to " + rdir.string() +
              (grid.gaps.empty() ? "" : " (" + std::to_string(grid.gaps.size()) +
                                            " gaps flagged)")};
}

// ---- report utilities

/// Regression mode: recompute T-scores from the published fixtures.
inline std::vector<eval::FixtureRegression> regression_tables() {
  std::vector<eval::FixtureRegression> out;
  for (const auto& f : eval::reference::kIfgsmTransfer)
    out.push_back(eval::fixture_regression(f));
  for (const auto& f : eval::reference::kGanTransfer)
    out.push_back(eval::fixture_regression(f));
  return out;
}

/// Re-render the aligned-text tables from the stored JSON reports.
inline std::vector<std::string> cmd_render_reports(const ExperimentConfig& c,
                                                   std::ostream& os) {
  const fs::path rdir = reports_dir(c);
  if (!fs::is_directory(rdir))
    throw std::runtime_error("no reports for this config; run evaluate first");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(rdir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());

  std::vector<std::string> names;
  for (const auto& f : files) {
    std::ifstream in(f);
    nlohmann::json j;
    in >> j;
    eval::ReportTable t;
    t.name = j.at("table").get<std::string>();
    t.title = j.at("title").get<std::string>();
    t.col_labels = j.at("columns").get<std::vector<std::string>>();
    for (const auto& row : j.at("rows")) {
      t.row_labels.push_back(row.at("label").get<std::string>());
      std::vector<std::optional<double>> vals;
      for (const auto& v : row.at("values"))
        vals.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
      t.values.push_back(std::move(vals));
    }
    t.notes = j.at("notes").get<std::vector<std::string>>();
    t.with_average_row = !j.at("average").empty();
    os << eval::report_to_text(t, j.at("run_digest").get<std::string>(),
                               j.at("seed").get<std::uint64_t>())
       << "\n";
    names.push_back(t.name);
  }
  return names;
}

}  // namespace advxfer::run
