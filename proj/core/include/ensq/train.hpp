#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ensq/dataset.hpp"
#include "ensq/gradients.hpp"
#include "ensq/net.hpp"
#include "ensq/objectives.hpp"

namespace ensq {

struct TrainConfig {
  ObjectiveConfig objective;
  ArchitectureConfig arch;
  int batch_size = 16;  // labeled pairs per step; the unlabeled stream matches it
  int epochs = 12;
  double initial_lr = 1e-4;
  bool lr_halving = true;  // halve after every epoch
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip_norm = 0.0;  // global-norm clip; 0 disables (the default)
  enum class SelectionMetric { kSrcc, kPlcc } selection = SelectionMetric::kSrcc;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double lr = 0.0;
  double loss_total = 0.0;  // == loss_acc + gamma * loss_div by construction
  double loss_acc = 0.0;    // mean per-pair accuracy loss over the epoch
  double loss_div = 0.0;    // mean per-pair diversity term; 0 when gamma == 0
  double val_srcc = 0.0;
  double wall_seconds = 0.0;  // in-memory only, never serialized
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;  // 1-based; earliest epoch attaining the best validation metric
};

struct TrainResult {
  EnsembleParams params;  // the best-epoch checkpoint
  TrainHistory history;
};

// Optimizes the semi-supervised objective with Adam over per-epoch
// re-sampled pairs. Labeled pairs are regenerated every epoch (one pair per
// anchor); the unlabeled pair stream is drawn independently and cycles at
// the same per-step size. The unlabeled set may be empty: diversity then
// comes from the labeled pairs when include_labeled_in_diversity is set,
// and contributes zero otherwise.
TrainResult train(const TrainConfig& config, const Dataset& labeled_train,
                  const Dataset& unlabeled_train, const Dataset& validation);

// History file: one record per epoch, tab separated, fields in order
//   epoch lr loss_total loss_acc loss_div val_srcc
void save_history(const TrainHistory& history, const std::filesystem::path& path);

}  // namespace ensq
