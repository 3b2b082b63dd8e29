#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include <json.hpp>

#include "advxfer/models/model.hpp"
#include "advxfer/nn/optim.hpp"

namespace advxfer::models {

struct EarlyStop {
  bool enabled = true;
  int patience = 2;  // validation epochs without a new best
};

struct TrainConfig {
  double initial_lr = 5e-4;
  int lr_halving_period = 4;  // epochs per halving
  int batch_size = 25;
  int max_epochs = 43;
  EarlyStop early_stop;
  double momentum = 0.9;
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
};

inline double schedule_lr(const TrainConfig& cfg, int epoch) {
  return cfg.initial_lr * std::exp2(-static_cast<double>(epoch / cfg.lr_halving_period));
}

/// SGD training over labels coarsened through `def`. Returns the
/// best-validation-accuracy checkpoint; stops early once validation accuracy
/// has not improved for more than `patience` epochs.
inline TrainedModel train(const TrainedModel& base,
                          const dataset::DatasetSplit& split,
                          const dataset::ClassDefinition& def,
                          const TrainConfig& cfg,
                          std::vector<EpochRecord>* log = nullptr) {
  if (cfg.initial_lr <= 0) throw std::invalid_argument("train: initial_lr must be > 0");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
  if (cfg.max_epochs < 0) throw std::invalid_argument("train: max_epochs must be >= 0");
  if (split.train.empty() || split.validation.empty())
    throw std::invalid_argument("train: empty train or validation split");
  if (def.num_classes != base.def.num_classes)
    throw std::invalid_argument("train: model has " +
                                std::to_string(base.def.num_classes) +
                                " outputs but class definition wants " +
                                std::to_string(def.num_classes));

  TrainedModel model = base;
  if (cfg.max_epochs == 0) return model;

  const std::size_t n_params = model.net.n_params();
  nn::SgdMomentum opt(n_params, cfg.momentum);

  std::vector<std::size_t> order(split.train.size());
  std::iota(order.begin(), order.end(), 0);

  // per-sample gradient buffers; summed in index order so the result does not
  // depend on the thread count
  std::vector<std::vector<float>> sample_grads(
      static_cast<std::size_t>(cfg.batch_size), std::vector<float>(n_params));
  std::vector<double> sample_losses(static_cast<std::size_t>(cfg.batch_size));
  std::vector<float> grad_sum(n_params);

  std::vector<float> best_params;
  double best_acc = -1.0;
  int epochs_since_best = 0;
  int epochs_run = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = schedule_lr(cfg, epoch);
    auto rng = make_rng(derive_seed(cfg.seed, 0xE90C, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t bsz = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                                    order.size() - start);
      const auto nb = static_cast<std::ptrdiff_t>(bsz);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
      for (std::ptrdiff_t b = 0; b < nb; ++b) {
        thread_local nn::Tape tape;
        const auto& item = split.train[order[start + static_cast<std::size_t>(b)]];
        auto& grad = sample_grads[static_cast<std::size_t>(b)];
        std::fill(grad.begin(), grad.end(), 0.0f);
        const auto& logits = model.net.forward(item.patch.pixels.data(), tape);
        const auto ce = nn::cross_entropy_with_grad(
            logits, dataset::coarsen(item.fine_label, def));
        sample_losses[static_cast<std::size_t>(b)] = ce.loss;
        model.net.backward(item.patch.pixels.data(), tape, ce.dlogits,
                           grad.data(), nullptr);
      }
      std::fill(grad_sum.begin(), grad_sum.end(), 0.0f);
      for (std::size_t b = 0; b < bsz; ++b) {
        const auto& g = sample_grads[b];
        for (std::size_t i = 0; i < n_params; ++i) grad_sum[i] += g[i];
        epoch_loss += sample_losses[b];
      }
      seen += bsz;
      opt.step(model.net.params(), grad_sum, lr, 1.0 / static_cast<double>(bsz));
      model.net.project_constraints();
    }
    epoch_loss /= static_cast<double>(seen);
    if (!std::isfinite(epoch_loss))
      throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));

    const double val_acc = accuracy(model, split.validation, def);
    ++epochs_run;
    if (log) log->push_back({epoch, lr, epoch_loss, val_acc});

    if (val_acc > best_acc) {
      best_acc = val_acc;
      best_params.assign(model.net.params().begin(), model.net.params().end());
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
    }
    if (cfg.early_stop.enabled && epochs_since_best > cfg.early_stop.patience) break;
  }

  std::copy(best_params.begin(), best_params.end(), model.net.params().begin());
  model.meta.epochs_run = epochs_run;
  model.meta.best_val_accuracy = best_acc;
  model.meta.seed = cfg.seed;
  return model;
}

inline void write_training_log(const std::filesystem::path& path,
                               const std::vector<EpochRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write training log " + path.string());
  for (const auto& r : records) {
    nlohmann::json rec{{"epoch", r.epoch},
                       {"lr", r.lr},
                       {"train_loss", r.train_loss},
                       {"val_accuracy", r.val_accuracy}};
    out << rec.dump() << "\n";
  }
}

}  // namespace advxfer::models
