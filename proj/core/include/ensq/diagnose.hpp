#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ensq/dataset.hpp"
#include "ensq/net.hpp"

namespace ensq {

// Samples ordered by descending head-score variance (the query-by-committee
// disagreement measure; the positive magnitude, not the negated loss form).
// Ties break by ascending sample id.
struct DisagreementRanking {
  std::vector<std::string> ids;
  std::vector<double> variances;
};

// Ranks `ids` by the per-row variance of `head_scores` (rows x M) and keeps
// the top k. Exposed separately so rankings can be tested on planted scores.
DisagreementRanking rank_disagreement(std::span<const std::string> ids, const Mat& head_scores,
                                      int k);

// Inference-mode head scores over the pool, ranked as above.
DisagreementRanking spot_failures(const EnsembleParams& params, const Dataset& pool, int k);

struct GmadLevel {
  int level = 0;
  std::string top_id;
  std::string bottom_id;
  double gap = 0.0;  // attacker score separation inside the level
};

struct GmadResult {
  std::vector<GmadLevel> levels;
  std::vector<int> skipped_levels;  // levels with fewer than 2 members
};

// Splits the pool into num_levels equal-frequency buckets by defender score
// (level 0 = lowest) and returns, per bucket, the pair the attacker
// separates the most. Ties in defender order, attacker argmax and argmin all
// break by ascending id.
GmadResult gmad_pairs(const std::map<std::string, double>& defender_scores,
                      const std::map<std::string, double>& attacker_scores, int num_levels);

}  // namespace ensq
