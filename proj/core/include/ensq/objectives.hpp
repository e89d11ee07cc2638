#pragma once

#include <span>
#include <vector>

#include "ensq/prob.hpp"

namespace ensq {

enum class DiversityVariant {
  kPairwiseFidelity,  // negative mean fidelity loss over unordered head pairs
  kVariance,          // negative per-sample prediction variance
  kToEnsemble,        // negative mean fidelity loss between each head and the ensemble
};

struct ObjectiveConfig {
  double lambda = 1.0;
  double gamma = 0.06;
  DiversityVariant diversity = DiversityVariant::kPairwiseFidelity;
  bool include_labeled_in_diversity = true;

  void validate() const;  // throws std::invalid_argument
};

// Per-pair head scores for the two pair members; both vectors have length M.
struct PairHeadScores {
  std::vector<double> x;
  std::vector<double> y;
};

// Mean over pairs of [ ensemble fidelity loss + (lambda/M) * sum of the
// per-head fidelity losses ]. Preference probabilities are derived from the
// scores (averaged scores for the ensemble term) and clamped before each
// fidelity evaluation.
double accuracy_loss(std::span<const PairHeadScores> pairs, std::span<const Probability> labels,
                     double lambda);

// -(1 / (C(M,2) * |B|)) * sum over pairs and unordered head pairs of the
// fidelity loss between head predictions. Needs M >= 2. In [-1, 0].
// Probability arguments are used as given.
double diversity_pairwise(std::span<const std::vector<double>> pair_head_probs);

// Mean over samples of -(1/M) * sum_i (f_i - mean)^2. Always <= 0 and
// unbounded below.
double diversity_variance(std::span<const std::vector<double>> sample_head_scores);

// Mean over pairs of -(1/M) * sum_i fidelity(p_i, p_ensemble). In [-1, 0].
double diversity_to_ensemble(std::span<const std::vector<double>> pair_head_probs,
                             std::span<const double> ensemble_probs);

// accuracy + gamma * diversity
double semi_loss(double accuracy, double diversity, double gamma);

// Mean of the per-head preference probabilities. The non-default ensemble
// rule; the default derives the ensemble probability from averaged scores.
Probability prob_average(std::span<const double> head_probs);

}  // namespace ensq
