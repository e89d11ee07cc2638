#include "ensq/train.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "ensq/adam.hpp"
#include "ensq/io_util.hpp"
#include "ensq/metrics.hpp"
#include "ensq/pairs.hpp"
#include "ensq/rng.hpp"

namespace ensq {

void TrainConfig::validate() const {
  objective.validate();
  arch.validate();
  if (batch_size < 2) throw std::invalid_argument("train: batch_size must be >= 2");
  if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(initial_lr > 0.0)) throw std::invalid_argument("train: initial_lr must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw std::invalid_argument("train: adam betas must be in [0, 1)");
  }
  if (!(adam_eps > 0.0)) throw std::invalid_argument("train: adam_eps must be positive");
  if (!(grad_clip_norm >= 0.0)) throw std::invalid_argument("train: grad_clip_norm must be >= 0");
  if (objective.gamma > 0.0 && objective.diversity == DiversityVariant::kPairwiseFidelity &&
      arch.num_heads < 2) {
    throw std::invalid_argument("train: pairwise diversity needs at least 2 heads");
  }
}

namespace {

// rows 2j/2j+1 hold the pair members; labels only for labeled pools
PairBatch build_pair_batch(const Mat& pool_features, std::span<const PairedExample> pairs,
                           bool labeled) {
  PairBatch batch;
  batch.features = Mat(2 * static_cast<int>(pairs.size()), pool_features.cols());
  if (labeled) batch.labels.reserve(pairs.size());
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const PairedExample& pair = pairs[j];
    for (int c = 0; c < pool_features.cols(); ++c) {
      batch.features(static_cast<int>(2 * j), c) = pool_features(pair.x, c);
      batch.features(static_cast<int>(2 * j + 1), c) = pool_features(pair.y, c);
    }
    if (labeled) batch.labels.push_back(pair.label.value().value());
  }
  return batch;
}

void clip_global_norm(GradRecord& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grad_tensors(grads)) {
    for (double v : g) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0.0) return;
  const double factor = max_norm / norm;
  for (auto& [name, g] : grad_tensors(grads)) {
    for (double& v : g) v *= factor;
  }
}

}  // namespace

TrainResult train(const TrainConfig& config, const Dataset& labeled_train,
                  const Dataset& unlabeled_train, const Dataset& validation) {
  config.validate();
  if (labeled_train.size() < 2) {
    throw std::invalid_argument("train: need at least 2 labeled training samples");
  }
  if (!labeled_train.all_labeled()) {
    throw std::invalid_argument("train: labeled training set has samples without MOS");
  }
  if (unlabeled_train.size() == 1) {
    throw std::invalid_argument("train: unlabeled set must be empty or hold >= 2 samples");
  }
  if (validation.size() < 3 || !validation.all_labeled()) {
    throw std::invalid_argument("train: validation set needs >= 3 labeled samples");
  }

  const Mat labeled_features = feature_matrix(labeled_train);
  const std::vector<double> labeled_mos = mos_values(labeled_train);
  const Mat val_features = feature_matrix(validation);
  const std::vector<double> val_mos = mos_values(validation);
  const bool has_unlabeled = unlabeled_train.size() >= 2;
  const Mat unlabeled_features = has_unlabeled ? feature_matrix(unlabeled_train) : Mat();

  EnsembleParams params = init(config.arch, config.seed);
  AdamState adam =
      make_adam_state(params, config.adam_beta1, config.adam_beta2, config.adam_eps);

  TrainResult result;
  result.params = params;
  double best_metric = -2.0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    const double lr = config.lr_halving
                          ? config.initial_lr * std::pow(2.0, -(epoch - 1))
                          : config.initial_lr;

    const std::vector<PairedExample> labeled_pairs =
        make_labeled_pairs(labeled_mos, mix_seed(config.seed, 2 * static_cast<std::uint64_t>(epoch)));
    const std::vector<PairedExample> unlabeled_pairs =
        has_unlabeled ? make_unlabeled_pairs(unlabeled_train.size(), labeled_pairs.size(),
                                             mix_seed(config.seed,
                                                      2 * static_cast<std::uint64_t>(epoch) + 1))
                      : std::vector<PairedExample>{};

    double acc_sum = 0.0;
    double div_sum = 0.0;
    std::size_t acc_pairs = 0;
    std::size_t div_pairs = 0;
    const std::size_t total = labeled_pairs.size();
    for (std::size_t begin = 0; begin < total; begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t count = std::min(static_cast<std::size_t>(config.batch_size),
                                         total - begin);
      const PairBatch lb = build_pair_batch(
          labeled_features, std::span(labeled_pairs).subspan(begin, count), /*labeled=*/true);
      const PairBatch ub =
          has_unlabeled
              ? build_pair_batch(unlabeled_features,
                                 std::span(unlabeled_pairs).subspan(begin, count),
                                 /*labeled=*/false)
              : PairBatch{};

      GradResult step = grad(params, lb, ub, config.objective);
      if (!std::isfinite(step.loss.total)) {
        throw std::runtime_error(
            "train: non-finite loss at epoch " + std::to_string(epoch) + ", pair offset " +
            std::to_string(begin) + " (acc=" + format_double(step.loss.accuracy) +
            ", div=" + format_double(step.loss.diversity) + ")");
      }
      if (config.grad_clip_norm > 0.0) clip_global_norm(step.grads, config.grad_clip_norm);
      adam_step(params, step.grads, adam, lr);

      acc_sum += step.loss.accuracy * static_cast<double>(count);
      acc_pairs += count;
      if (config.objective.gamma != 0.0) {
        const std::size_t step_div_pairs =
            (has_unlabeled ? count : 0) +
            (config.objective.include_labeled_in_diversity ? count : 0);
        div_sum += step.loss.diversity * static_cast<double>(step_div_pairs);
        div_pairs += step_div_pairs;
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.lr = lr;
    record.loss_acc = acc_sum / static_cast<double>(acc_pairs);
    record.loss_div = div_pairs > 0 ? div_sum / static_cast<double>(div_pairs) : 0.0;
    record.loss_total = record.loss_acc + config.objective.gamma * record.loss_div;

    const std::vector<double> val_preds = predict(params, val_features);
    record.val_srcc = srcc(val_preds, val_mos);
    double metric = record.val_srcc;
    if (config.selection == TrainConfig::SelectionMetric::kPlcc) {
      metric = plcc_with_logistic(val_preds, val_mos).plcc;
    }
    record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
    result.history.epochs.push_back(record);

    if (metric > best_metric) {
      best_metric = metric;
      result.history.best_epoch = epoch;
      result.params = params;
    }
  }
  return result;
}

void save_history(const TrainHistory& history, const std::filesystem::path& path) {
  std::string out;
  for (const EpochRecord& r : history.epochs) {
    out += std::to_string(r.epoch);
    out += '\t';
    out += format_double(r.lr);
    out += '\t';
    out += format_double(r.loss_total);
    out += '\t';
    out += format_double(r.loss_acc);
    out += '\t';
    out += format_double(r.loss_div);
    out += '\t';
    out += format_double(r.val_srcc);
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace ensq
