#pragma once

#include <cstdint>
#include <vector>

#include "ensq/gradients.hpp"

namespace ensq {

// Adam first/second-moment accumulators, one slot per parameter tensor in
// param_tensors() order.
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

AdamState make_adam_state(const EnsembleParams& params, double beta1 = 0.9, double beta2 = 0.999,
                          double eps = 1e-8);

// One bias-corrected Adam update in place. A non-finite gradient entry
// throws std::runtime_error naming the parameter path.
void adam_step(EnsembleParams& params, const GradRecord& grads, AdamState& state, double lr);

}  // namespace ensq
