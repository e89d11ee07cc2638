#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ensq/net.hpp"
#include "ensq/objectives.hpp"

namespace ensq {

// A batch of sample pairs laid out as rows: pair j occupies rows 2j (x) and
// 2j+1 (y) of `features`.
struct PairBatch {
  Mat features;
  std::vector<double> labels;  // size P for labeled batches; empty for unlabeled

  int num_pairs() const { return features.rows() / 2; }
  bool empty() const { return features.rows() == 0; }
};

// Gradient storage congruent with EnsembleParams.
struct GradRecord {
  std::vector<DenseLayer> trunk;
  std::vector<std::vector<DenseLayer>> heads;
  double output_scale = 0.0;
};

GradRecord zeros_like(const EnsembleParams& params);

struct LossBreakdown {
  double total = 0.0;
  double accuracy = 0.0;
  double diversity = 0.0;  // the recorded diversity term; 0 when gamma == 0
};

struct GradResult {
  GradRecord grads;
  LossBreakdown loss;
};

// Named spans over every parameter tensor in a stable order (trunk layers,
// head stacks, then the shared output scale). The optimizer, the gradient
// clipper and the checkpoint format all iterate this order.
using TensorView = std::pair<std::string, std::span<double>>;
using ConstTensorView = std::pair<std::string, std::span<const double>>;
std::vector<TensorView> param_tensors(EnsembleParams& params);
std::vector<ConstTensorView> param_tensors(const EnsembleParams& params);
std::vector<TensorView> grad_tensors(GradRecord& grads);
std::vector<ConstTensorView> grad_tensors(const GradRecord& grads);

// Objective value only. Runs training-mode math but never writes the running
// statistics, so it is safe as a finite-difference probe.
LossBreakdown objective_value(const EnsembleParams& params, const PairBatch& labeled,
                              const PairBatch& unlabeled, const ObjectiveConfig& cfg);

// Analytic gradient of the full semi-supervised objective with respect to
// every parameter, including the shared output scale and the paths through
// the l2 projection and the output normalization. Runs training-mode
// forwards (labeled batch first, then unlabeled), so the running statistics
// advance exactly as in a training step.
GradResult grad(EnsembleParams& params, const PairBatch& labeled, const PairBatch& unlabeled,
                const ObjectiveConfig& cfg);

}  // namespace ensq
