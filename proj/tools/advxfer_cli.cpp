// advxfer: train forensic classifiers under three class definitions, attack
// them with targeted I-FGSM and a GAN-based generator, and measure attack
// success (SAR) and cross-definition transferability (T-score).

#include <CLI11.hpp>
#include <iostream>

#include "advxfer/run/pipeline.hpp"

using namespace advxfer;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
  auto* c = cmd->add_option("--config", opts.config_path, "experiment config (JSON)");
  if (config_required) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", opts.seed, "master seed (overrides config)")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
}

run::ExperimentConfig resolve(const CommonOpts& opts) {
  run::ExperimentConfig cfg = run::load_config(opts.config_path);
  if (!opts.out_dir.empty()) cfg.output_dir = opts.out_dir;
  if (opts.seed_set) cfg.seed = opts.seed;
  return cfg;
}

void announce(const run::StageResult& r) {
  std::cout << (r.skipped ? "[skip] " : "[done] ") << r.message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial-transferability benchmark for image-manipulation forensics"};
  app.require_subcommand(1);

  CommonOpts prep_opts;
  bool paper_scale = false;
  auto* prep = app.add_subcommand("prepare-data",
                                  "build the manipulated-patch corpus and attack set");
  add_common(prep, prep_opts);
  prep->add_flag("--paper-scale", paper_scale,
                 "confirm a paper-scale config (large corpus, long runtime)");

  CommonOpts train_opts;
  std::string train_arch, train_def;
  auto* train = app.add_subcommand("train", "train classifiers (full grid by default)");
  add_common(train, train_opts);
  train->add_option("--arch", train_arch, "architecture name (default: all configured)");
  train->add_option("--class-def", train_def,
                    "detector|classifier|parameterizer (default: all three)");

  CommonOpts attack_opts;
  std::string attack_kind, attack_arch, attack_def;
  auto* attack = app.add_subcommand("attack", "craft adversarial examples");
  add_common(attack, attack_opts);
  attack->add_option("--attack", attack_kind, "ifgsm|gan")->required();
  attack->add_option("--arch", attack_arch, "architecture name (default: all configured)");
  attack->add_option("--class-def", attack_def,
                     "known class definition (default: all three)");

  CommonOpts eval_opts;
  auto* evaluate = app.add_subcommand("evaluate",
                                      "emit baseline, perfect-knowledge and transfer tables");
  add_common(evaluate, eval_opts);

  CommonOpts report_opts;
  bool regression = false;
  auto* report = app.add_subcommand("report", "re-render report tables");
  add_common(report, report_opts, /*config_required=*/false);
  report->add_flag("--regression", regression,
                   "recompute T-scores from the published reference tables");

  CLI11_PARSE(app, argc, argv);

  try {
    if (prep->parsed()) {
      announce(run::cmd_prepare_data(resolve(prep_opts), paper_scale));
    } else if (train->parsed()) {
      const auto cfg = resolve(train_opts);
      const std::vector<std::string> archs =
          train_arch.empty() ? cfg.models.architectures
                             : std::vector<std::string>{train_arch};
      const std::vector<dataset::ClassMode> defs =
          train_def.empty()
              ? std::vector<dataset::ClassMode>(eval::kDefOrder.begin(),
                                                eval::kDefOrder.end())
              : std::vector<dataset::ClassMode>{dataset::class_mode_from_name(train_def)};
      for (const auto& a : archs)
        for (const auto d : defs) announce(run::cmd_train(cfg, a, d));
    } else if (attack->parsed()) {
      const auto cfg = resolve(attack_opts);
      const auto kind = attacks::attack_from_name(attack_kind);
      const std::vector<std::string> archs =
          attack_arch.empty() ? cfg.models.architectures
                              : std::vector<std::string>{attack_arch};
      const std::vector<dataset::ClassMode> defs =
          attack_def.empty()
              ? std::vector<dataset::ClassMode>(eval::kDefOrder.begin(),
                                                eval::kDefOrder.end())
              : std::vector<dataset::ClassMode>{dataset::class_mode_from_name(attack_def)};
      for (const auto& a : archs)
        for (const auto d : defs) announce(run::cmd_attack(cfg, kind, a, d));
    } else if (evaluate->parsed()) {
      announce(run::cmd_evaluate(resolve(eval_opts)));
    } else if (report->parsed()) {
      if (regression) {
        double worst_row = 0.0, worst_avg = 0.0;
        for (const auto& reg : run::regression_tables()) {
          std::cout << eval::report_to_text(reg.table, "reference", 0) << "\n";
          worst_row = std::max(worst_row, reg.max_row_deviation);
          worst_avg = std::max(worst_avg, reg.max_avg_deviation);
        }
        std::cout << "max per-row deviation " << worst_row
                  << ", max average-row deviation " << worst_avg << "\n";
        if (worst_row > 0.001 || worst_avg > 0.001) {
          std::cerr << "regression FAILED: deviation above 0.001\n";
          return 1;
        }
        std::cout << "regression OK: every reconstructed T-score within 0.001\n";
      } else {
        if (report_opts.config_path.empty())
          throw std::runtime_error("report needs --config (or use --regression)");
        run::cmd_render_reports(resolve(report_opts), std::cout);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
