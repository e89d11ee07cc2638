#include "ensq/objectives.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ensq {

void ObjectiveConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("objective: lambda must be >= 0");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("objective: gamma must be >= 0");
  }
}

namespace {

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + ": probability outside [0, 1]");
  }
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double accuracy_loss(std::span<const PairHeadScores> pairs, std::span<const Probability> labels,
                     double lambda) {
  if (pairs.empty()) throw std::invalid_argument("accuracy_loss: empty pair batch");
  if (pairs.size() != labels.size()) {
    throw std::invalid_argument("accuracy_loss: pairs/labels length mismatch");
  }
  const std::size_t m = pairs.front().x.size();
  if (m == 0) throw std::invalid_argument("accuracy_loss: no head scores");

  double total = 0.0;
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const PairHeadScores& pair = pairs[j];
    if (pair.x.size() != m || pair.y.size() != m) {
      throw std::invalid_argument("accuracy_loss: inconsistent head count");
    }
    const double p = labels[j].value();
    const double ens_prob = clamp_probability(thurstone_prob_raw(mean(pair.x), mean(pair.y)));
    double pair_loss = fidelity_loss_raw(p, ens_prob);
    if (lambda != 0.0) {
      double individual = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double prob = clamp_probability(thurstone_prob_raw(pair.x[i], pair.y[i]));
        individual += fidelity_loss_raw(p, prob);
      }
      pair_loss += lambda / static_cast<double>(m) * individual;
    }
    total += pair_loss;
  }
  return total / static_cast<double>(pairs.size());
}

double diversity_pairwise(std::span<const std::vector<double>> pair_head_probs) {
  if (pair_head_probs.empty()) throw std::invalid_argument("diversity_pairwise: empty batch");
  const std::size_t m = pair_head_probs.front().size();
  if (m < 2) {
    throw std::invalid_argument("diversity_pairwise: needs at least 2 heads");
  }
  double total = 0.0;
  for (const auto& probs : pair_head_probs) {
    if (probs.size() != m) {
      throw std::invalid_argument("diversity_pairwise: inconsistent head count");
    }
    for (std::size_t i = 0; i < m; ++i) {
      check_prob(probs[i], "diversity_pairwise");
      for (std::size_t j = i + 1; j < m; ++j) {
        total += fidelity_loss_raw(probs[i], probs[j]);
      }
    }
  }
  const double norm = static_cast<double>(m * (m - 1) / 2) *
                      static_cast<double>(pair_head_probs.size());
  return -total / norm;
}

double diversity_variance(std::span<const std::vector<double>> sample_head_scores) {
  if (sample_head_scores.empty()) throw std::invalid_argument("diversity_variance: empty batch");
  const std::size_t m = sample_head_scores.front().size();
  if (m == 0) throw std::invalid_argument("diversity_variance: no head scores");
  double total = 0.0;
  for (const auto& scores : sample_head_scores) {
    if (scores.size() != m) {
      throw std::invalid_argument("diversity_variance: inconsistent head count");
    }
    const double f = mean(scores);
    double sq = 0.0;
    for (double s : scores) sq += (s - f) * (s - f);
    total += sq / static_cast<double>(m);
  }
  return -total / static_cast<double>(sample_head_scores.size());
}

double diversity_to_ensemble(std::span<const std::vector<double>> pair_head_probs,
                             std::span<const double> ensemble_probs) {
  if (pair_head_probs.empty()) throw std::invalid_argument("diversity_to_ensemble: empty batch");
  if (pair_head_probs.size() != ensemble_probs.size()) {
    throw std::invalid_argument("diversity_to_ensemble: head/ensemble length mismatch");
  }
  const std::size_t m = pair_head_probs.front().size();
  if (m == 0) throw std::invalid_argument("diversity_to_ensemble: no head probabilities");
  double total = 0.0;
  for (std::size_t j = 0; j < pair_head_probs.size(); ++j) {
    check_prob(ensemble_probs[j], "diversity_to_ensemble");
    const auto& probs = pair_head_probs[j];
    if (probs.size() != m) {
      throw std::invalid_argument("diversity_to_ensemble: inconsistent head count");
    }
    double sum = 0.0;
    for (double p : probs) {
      check_prob(p, "diversity_to_ensemble");
      sum += fidelity_loss_raw(p, ensemble_probs[j]);
    }
    total += sum / static_cast<double>(m);
  }
  return -total / static_cast<double>(pair_head_probs.size());
}

double semi_loss(double accuracy, double diversity, double gamma) {
  if (!(gamma >= 0.0)) throw std::invalid_argument("semi_loss: gamma must be >= 0");
  return accuracy + gamma * diversity;
}

Probability prob_average(std::span<const double> head_probs) {
  if (head_probs.empty()) throw std::invalid_argument("prob_average: empty head sequence");
  double sum = 0.0;
  for (double p : head_probs) {
    check_prob(p, "prob_average");
    sum += p;
  }
  return Probability(sum / static_cast<double>(head_probs.size()));
}

}  // namespace ensq
