#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ensq/gradients.hpp"
#include "ensq/net.hpp"
#include "ensq/rng.hpp"

namespace ensq::testing {

// Independent high-precision standard normal CDF for checking the
// production erfc-based path: the positive-term series
//   Phi(z) = 1/2 + pdf(z) * sum_{k>=0} z^(2k+1) / (1*3*5*...*(2k+1))
// evaluated in long double. No cancellation for z >= 0 (all terms positive);
// negative z goes through the symmetry Phi(-z) = 1 - Phi(z).
inline long double normal_cdf_oracle(long double z) {
  if (z < 0.0L) return 1.0L - normal_cdf_oracle(-z);
  long double term = z;
  long double sum = z;
  for (int k = 1; k < 400; ++k) {
    term *= z * z / static_cast<long double>(2 * k + 1);
    sum += term;
    if (term < sum * 1e-22L) break;
  }
  const long double pdf = std::exp(-0.5L * z * z) * 0.398942280401432677941L;
  return 0.5L + pdf * sum;
}

// Every parameter nudged by +-h through the value-only objective path.
inline GradRecord fd_gradient(const EnsembleParams& params, const PairBatch& labeled,
                              const PairBatch& unlabeled, const ObjectiveConfig& cfg, double h) {
  GradRecord fd = zeros_like(params);
  EnsembleParams work = params;
  auto views = param_tensors(work);
  auto fd_views = grad_tensors(fd);
  for (std::size_t t = 0; t < views.size(); ++t) {
    auto& [name, values] = views[t];
    auto& [fd_name, slots] = fd_views[t];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = objective_value(work, labeled, unlabeled, cfg).total;
      values[i] = saved - h;
      const double down = objective_value(work, labeled, unlabeled, cfg).total;
      values[i] = saved;
      slots[i] = (up - down) / (2.0 * h);
    }
  }
  return fd;
}

inline double max_relative_error(const GradRecord& analytic, const GradRecord& reference) {
  auto a_views = grad_tensors(analytic);
  auto r_views = grad_tensors(reference);
  double worst = 0.0;
  for (std::size_t t = 0; t < a_views.size(); ++t) {
    const auto& a = a_views[t].second;
    const auto& r = r_views[t].second;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double denom = std::max({std::abs(a[i]), std::abs(r[i]), 1e-6});
      worst = std::max(worst, std::abs(a[i] - r[i]) / denom);
    }
  }
  return worst;
}

inline Mat random_features(Rng& rng, int rows, int cols) {
  Mat m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

inline PairBatch random_labeled_batch(Rng& rng, int pairs, int dim) {
  PairBatch batch;
  batch.features = random_features(rng, 2 * pairs, dim);
  for (int j = 0; j < pairs; ++j) {
    batch.labels.push_back(rng.uniform01() < 0.5 ? 0.0 : 1.0);
  }
  return batch;
}

inline PairBatch random_unlabeled_batch(Rng& rng, int pairs, int dim) {
  PairBatch batch;
  batch.features = random_features(rng, 2 * pairs, dim);
  return batch;
}

// in-place random walk over every parameter, for checking properties away
// from the init point
inline void jitter_params(EnsembleParams& params, Rng& rng, double amount) {
  for (auto& [name, values] : param_tensors(params)) {
    for (double& v : values) v += amount * rng.normal();
  }
  if (params.output_scale <= 0.1) params.output_scale = 0.1;
}

}  // namespace ensq::testing
