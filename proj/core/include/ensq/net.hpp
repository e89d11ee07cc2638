#pragma once

#include <cstdint>
#include <vector>

#include "ensq/matrix.hpp"

namespace ensq {

// Epsilon floor on the output-normalization std. It enters as a floor
// (sigma = max(sqrt(var), eps)) rather than an additive variance term, so
// the normalized outputs hit the shared scale exactly whenever the batch is
// not degenerate.
inline constexpr double kOutputNormEps = 1e-5;
inline constexpr double kL2NormGuard = 1e-12;
inline constexpr double kRunningStatMomentum = 0.1;  // new = 0.9*old + 0.1*batch

// Multi-head predictor shape: a shared dense trunk (ReLU), then one dense
// stack per head. The number of shared layers is the splitting-point knob.
struct ArchitectureConfig {
  int input_dim = 0;
  std::vector<int> shared_widths;  // may be empty: heads split directly off the input
  std::vector<int> head_widths;    // final width-1 output layer implied if absent
  int num_heads = 1;

  void validate() const;  // throws std::invalid_argument

  // head_widths with the implied final 1 appended when not already present
  std::vector<int> effective_head_widths() const;

  bool operator==(const ArchitectureConfig&) const = default;
};

struct DenseLayer {
  Mat weight;                // out x in
  std::vector<double> bias;  // empty for the bias-free head output layers

  bool operator==(const DenseLayer&) const = default;
};

// All learnable state plus the output-normalization running statistics.
// Calibration constraints baked into the layout:
//  - each head's output layer has no bias entries,
//  - one output_scale shared by every head; the normalization bias is
//    identically zero and is not a parameter,
//  - running mean/var are tracked per head.
struct EnsembleParams {
  ArchitectureConfig arch;
  std::vector<DenseLayer> trunk;
  std::vector<std::vector<DenseLayer>> heads;  // heads[i]: hidden layers, then the output layer
  double output_scale = 1.0;
  std::vector<double> run_mean;  // per head
  std::vector<double> run_var;   // per head
  std::uint64_t init_seed = 0;

  bool operator==(const EnsembleParams&) const = default;
};

enum class Mode { kTraining, kInference };

// Everything the backward pass needs, cached per forward call.
struct ForwardTrace {
  Mode mode = Mode::kInference;
  int batch_size = 0;
  int num_heads = 0;

  Mat input;
  std::vector<Mat> trunk_pre;  // per trunk layer, pre-activation
  std::vector<Mat> trunk_act;

  struct HeadTrace {
    std::vector<Mat> hidden_pre;
    std::vector<Mat> hidden_act;
    std::vector<double> input_norm;  // l2 norm of the vector entering the output layer
    Mat unit_input;                  // that vector projected onto the unit sphere
  };
  std::vector<HeadTrace> heads;

  Mat raw_scores;   // batch x M
  Mat norm_scores;  // batch x M, the scores every loss consumes
  Mat std_scores;   // batch x M, (raw - mean)/sigma; norm_scores = scale * std_scores
  std::vector<double> stat_mean;   // per head: batch mean (training) or running mean (inference)
  std::vector<double> stat_var;    // per head: the variance those stats came from
  std::vector<double> stat_sigma;  // per head: denominator used, after the epsilon floor

  std::vector<double> head_scores(int row) const;
  double ensemble(int row) const;  // mean of the normalized head scores
};

// Parameter record with the right tensor shapes, all values zero except
// output_scale = 1 and running stats (0, 1).
EnsembleParams make_skeleton(const ArchitectureConfig& arch);

// He fan-in initialization, deterministic in (arch, seed). Biases start at
// zero, output_scale at 1, running stats at (0, 1).
EnsembleParams init(const ArchitectureConfig& arch, std::uint64_t seed);

// Batch forward. Training mode normalizes head outputs by batch statistics
// and folds them into the running stats; it needs at least two rows.
// Inference mode normalizes by the running stats and leaves params untouched.
ForwardTrace forward(EnsembleParams& params, const Mat& batch, Mode mode);

// Same math as forward() but never writes the running stats. This is what
// evaluation and the finite-difference probes use.
ForwardTrace peek_forward(const EnsembleParams& params, const Mat& batch, Mode mode);

// Inference-mode ensemble predictions, one per row.
std::vector<double> predict(const EnsembleParams& params, const Mat& batch);

}  // namespace ensq
