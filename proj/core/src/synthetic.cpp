#include "ensq/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ensq/io_util.hpp"
#include "ensq/rng.hpp"

namespace ensq {

MonotoneMap monotone_map_from_string(const std::string& name) {
  if (name == "identity") return MonotoneMap::kIdentity;
  if (name == "cube") return MonotoneMap::kCube;
  if (name == "sigmoid") return MonotoneMap::kSigmoid;
  throw std::invalid_argument("unknown nonlinearity '" + name +
                              "' (expected identity|cube|sigmoid)");
}

std::string to_string(MonotoneMap map) {
  switch (map) {
    case MonotoneMap::kIdentity: return "identity";
    case MonotoneMap::kCube: return "cube";
    case MonotoneMap::kSigmoid: return "sigmoid";
  }
  return "identity";
}

void SyntheticSpec::validate() const {
  if (n_samples < 1) throw std::invalid_argument("synthetic: n_samples must be positive");
  if (n_unlabeled < 0) throw std::invalid_argument("synthetic: n_unlabeled must be >= 0");
  if (feature_dim < 1) throw std::invalid_argument("synthetic: feature_dim must be positive");
  if (!weights.empty() && static_cast<int>(weights.size()) != feature_dim) {
    throw std::invalid_argument("synthetic: weight count must match feature_dim");
  }
  if (!(noise_std >= 0.0)) throw std::invalid_argument("synthetic: noise_std must be >= 0");
  if (!(ood_fraction >= 0.0 && ood_fraction < 1.0)) {
    throw std::invalid_argument("synthetic: ood_fraction must be in [0, 1)");
  }
}

namespace {

constexpr double kOodShift = 3.0;  // +3 std on the chosen subspace

double apply_monotone(MonotoneMap map, double t) {
  switch (map) {
    case MonotoneMap::kIdentity: return t;
    case MonotoneMap::kCube: return t * t * t;
    case MonotoneMap::kSigmoid: return std::tanh(t);
  }
  return t;
}

std::string padded_id(char prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%06d", prefix, i);
  return buf;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticData data;

  data.weights_used = spec.weights;
  if (data.weights_used.empty()) {
    data.weights_used.resize(static_cast<std::size_t>(spec.feature_dim));
    double norm_sq = 0.0;
    for (double& w : data.weights_used) {
      w = rng.normal();
      norm_sq += w * w;
    }
    const double norm = std::max(std::sqrt(norm_sq), 1e-12);
    for (double& w : data.weights_used) w /= norm;
  }

  // random coordinate subspace for the OOD shift: dim/4 coordinates, at least one
  {
    std::vector<int> dims(static_cast<std::size_t>(spec.feature_dim));
    std::iota(dims.begin(), dims.end(), 0);
    for (std::size_t i = dims.size() - 1; i > 0; --i) {
      std::swap(dims[i], dims[rng.uniform_index(i + 1)]);
    }
    const int subspace = std::max(1, spec.feature_dim / 4);
    data.ood_dims.assign(dims.begin(), dims.begin() + subspace);
    std::sort(data.ood_dims.begin(), data.ood_dims.end());
  }

  auto draw_sample = [&](char prefix, int index, bool with_mos,
                         Dataset& out, std::vector<double>& raw_mos) {
    Sample sample;
    sample.id = padded_id(prefix, index);
    const bool ood = spec.ood_fraction > 0.0 && rng.uniform01() < spec.ood_fraction;
    sample.features.resize(static_cast<std::size_t>(spec.feature_dim));
    for (double& f : sample.features) f = rng.normal();
    if (ood) {
      for (int d : data.ood_dims) sample.features[static_cast<std::size_t>(d)] += kOodShift;
    }
    double latent = 0.0;
    for (int d = 0; d < spec.feature_dim; ++d) {
      latent += data.weights_used[static_cast<std::size_t>(d)] *
                sample.features[static_cast<std::size_t>(d)];
    }
    const double quality = apply_monotone(spec.nonlinearity, latent);
    data.true_quality[sample.id] = quality;
    if (with_mos) raw_mos.push_back(quality + spec.noise_std * rng.normal());
    out.samples.push_back(std::move(sample));
  };

  data.labeled.feature_dim = spec.feature_dim;
  data.unlabeled.feature_dim = spec.feature_dim;
  std::vector<double> raw_mos;
  raw_mos.reserve(static_cast<std::size_t>(spec.n_samples));
  for (int i = 0; i < spec.n_samples; ++i) {
    draw_sample('L', i, /*with_mos=*/true, data.labeled, raw_mos);
  }
  std::vector<double> unused;
  for (int i = 0; i < spec.n_unlabeled; ++i) {
    draw_sample('U', i, /*with_mos=*/false, data.unlabeled, unused);
  }

  // MOS rescaled to [0, 100]; min-max is monotone, preserving the ranking
  const auto [lo_it, hi_it] = std::minmax_element(raw_mos.begin(), raw_mos.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  for (int i = 0; i < spec.n_samples; ++i) {
    const double raw = raw_mos[static_cast<std::size_t>(i)];
    data.labeled.samples[static_cast<std::size_t>(i)].mos =
        range > 0.0 ? 100.0 * (raw - lo) / range : 50.0;
  }
  return data;
}

std::string SyntheticData::meta_text(const SyntheticSpec& spec) const {
  std::string out;
  out += "n_samples\t" + std::to_string(spec.n_samples) + "\n";
  out += "n_unlabeled\t" + std::to_string(spec.n_unlabeled) + "\n";
  out += "feature_dim\t" + std::to_string(spec.feature_dim) + "\n";
  out += "nonlinearity\t" + to_string(spec.nonlinearity) + "\n";
  out += "noise_std\t" + format_double(spec.noise_std) + "\n";
  out += "ood_fraction\t" + format_double(spec.ood_fraction) + "\n";
  out += "ood_shift\t" + format_double(kOodShift) + "\n";
  out += "seed\t" + std::to_string(spec.seed) + "\n";
  std::string dims;
  for (std::size_t i = 0; i < ood_dims.size(); ++i) {
    if (i > 0) dims += ',';
    dims += std::to_string(ood_dims[i]);
  }
  out += "ood_dims\t" + dims + "\n";
  std::string w;
  for (std::size_t i = 0; i < weights_used.size(); ++i) {
    if (i > 0) w += ',';
    w += format_double(weights_used[i]);
  }
  out += "weights\t" + w + "\n";
  return out;
}

}  // namespace ensq
