#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ensq/dataset.hpp"

namespace ensq {

enum class MonotoneMap { kIdentity, kCube, kSigmoid };

MonotoneMap monotone_map_from_string(const std::string& name);
std::string to_string(MonotoneMap map);

// Desk-scale stand-in for a rated image corpus: features from a standard
// multivariate normal, latent quality q* = monotone(w . x), MOS = q* plus
// Gaussian noise min-max rescaled to [0, 100]. A fraction of samples is
// drawn from a +3-shifted distribution on a random coordinate subspace to
// plant failure-spotting targets.
struct SyntheticSpec {
  int n_samples = 0;    // labeled count
  int n_unlabeled = 0;  // unlabeled pool count
  int feature_dim = 0;
  std::vector<double> weights;  // drawn from the seed (unit norm) when empty
  MonotoneMap nonlinearity = MonotoneMap::kIdentity;
  double noise_std = 0.0;
  double ood_fraction = 0.0;  // in [0, 1)
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticData {
  Dataset labeled;    // ids L000000..., MOS in [0, 100]
  Dataset unlabeled;  // ids U000000..., no MOS
  std::map<std::string, double> true_quality;  // id -> latent q*, both sets
  std::vector<int> ood_dims;                   // the shifted coordinate subspace
  std::vector<double> weights_used;

  // human-readable record of the generation parameters (the shifted
  // subspace included)
  std::string meta_text(const SyntheticSpec& spec) const;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

}  // namespace ensq
