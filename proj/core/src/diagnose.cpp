#include "ensq/diagnose.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ensq {

DisagreementRanking rank_disagreement(std::span<const std::string> ids, const Mat& head_scores,
                                      int k) {
  const int n = head_scores.rows();
  const int m = head_scores.cols();
  if (static_cast<int>(ids.size()) != n) {
    throw std::invalid_argument("rank_disagreement: ids/scores length mismatch");
  }
  if (k < 0 || k > n) {
    throw std::invalid_argument("rank_disagreement: k must be in [0, pool size]");
  }

  std::vector<double> variances(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    double mean = 0.0;
    for (int h = 0; h < m; ++h) mean += head_scores(r, h);
    mean /= m;
    double var = 0.0;
    for (int h = 0; h < m; ++h) {
      const double d = head_scores(r, h) - mean;
      var += d * d;
    }
    variances[static_cast<std::size_t>(r)] = var / m;
  }

  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (variances[a] != variances[b]) return variances[a] > variances[b];
    return ids[a] < ids[b];
  });

  DisagreementRanking ranking;
  ranking.ids.reserve(static_cast<std::size_t>(k));
  ranking.variances.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    ranking.ids.push_back(ids[order[static_cast<std::size_t>(i)]]);
    ranking.variances.push_back(variances[order[static_cast<std::size_t>(i)]]);
  }
  return ranking;
}

DisagreementRanking spot_failures(const EnsembleParams& params, const Dataset& pool, int k) {
  if (k > static_cast<int>(pool.size())) {
    throw std::invalid_argument("spot_failures: k exceeds pool size");
  }
  const ForwardTrace trace = peek_forward(params, feature_matrix(pool), Mode::kInference);
  std::vector<std::string> ids;
  ids.reserve(pool.size());
  for (const Sample& s : pool.samples) ids.push_back(s.id);
  return rank_disagreement(ids, trace.norm_scores, k);
}

GmadResult gmad_pairs(const std::map<std::string, double>& defender_scores,
                      const std::map<std::string, double>& attacker_scores, int num_levels) {
  if (defender_scores.empty()) throw std::invalid_argument("gmad_pairs: empty pool");
  if (num_levels < 1) throw std::invalid_argument("gmad_pairs: num_levels must be >= 1");
  if (defender_scores.size() != attacker_scores.size()) {
    throw std::invalid_argument("gmad_pairs: defender/attacker id sets differ");
  }
  for (const auto& [id, score] : defender_scores) {
    if (!attacker_scores.contains(id)) {
      throw std::invalid_argument("gmad_pairs: id '" + id + "' missing from attacker scores");
    }
  }

  // ascending defender order, ids as tiebreak; bucket membership then depends
  // only on the defender's ranking
  std::vector<const std::pair<const std::string, double>*> order;
  order.reserve(defender_scores.size());
  for (const auto& entry : defender_scores) order.push_back(&entry);
  std::stable_sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    if (a->second != b->second) return a->second < b->second;
    return a->first < b->first;
  });

  const std::size_t n = order.size();
  GmadResult result;
  for (int level = 0; level < num_levels; ++level) {
    const std::size_t begin = n * static_cast<std::size_t>(level) / num_levels;
    const std::size_t end = n * (static_cast<std::size_t>(level) + 1) / num_levels;
    if (end - begin < 2) {
      result.skipped_levels.push_back(level);
      continue;
    }
    const std::string* top = nullptr;
    const std::string* bottom = nullptr;
    double top_score = 0.0;
    double bottom_score = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::string& id = order[i]->first;
      const double attacker = attacker_scores.at(id);
      if (top == nullptr || attacker > top_score || (attacker == top_score && id < *top)) {
        top = &id;
        top_score = attacker;
      }
      if (bottom == nullptr || attacker < bottom_score ||
          (attacker == bottom_score && id < *bottom)) {
        bottom = &id;
        bottom_score = attacker;
      }
    }
    result.levels.push_back({level, *top, *bottom, top_score - bottom_score});
  }
  return result;
}

}  // namespace ensq
