#include "ensq/net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ensq/rng.hpp"

namespace ensq {

void ArchitectureConfig::validate() const {
  if (input_dim < 1) throw std::invalid_argument("arch: input_dim must be positive");
  if (num_heads < 1) throw std::invalid_argument("arch: num_heads must be positive");
  for (int w : shared_widths) {
    if (w < 1) throw std::invalid_argument("arch: shared widths must be positive");
  }
  for (int w : head_widths) {
    if (w < 1) throw std::invalid_argument("arch: head widths must be positive");
  }
}

std::vector<int> ArchitectureConfig::effective_head_widths() const {
  std::vector<int> widths = head_widths;
  if (widths.empty() || widths.back() != 1) widths.push_back(1);
  return widths;
}

namespace {

void fill_he(Mat& w, int fan_in, Rng& rng) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& v : w.data()) v = rng.normal() * stddev;
}

// y[r] = x[r] * W^T + b, optional ReLU applied separately
Mat linear(const Mat& x, const DenseLayer& layer) {
  const int out = layer.weight.rows();
  const int in = layer.weight.cols();
  Mat y(x.rows(), out);
  for (int r = 0; r < x.rows(); ++r) {
    const auto xr = x.row(r);
    for (int o = 0; o < out; ++o) {
      double acc = layer.bias.empty() ? 0.0 : layer.bias[o];
      const auto wr = layer.weight.row(o);
      for (int i = 0; i < in; ++i) acc += wr[i] * xr[i];
      y(r, o) = acc;
    }
  }
  return y;
}

Mat relu(const Mat& x) {
  Mat y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

}  // namespace

EnsembleParams make_skeleton(const ArchitectureConfig& arch) {
  arch.validate();
  EnsembleParams params;
  params.arch = arch;

  int in = arch.input_dim;
  for (int width : arch.shared_widths) {
    DenseLayer layer;
    layer.weight = Mat(width, in);
    layer.bias.assign(static_cast<std::size_t>(width), 0.0);
    params.trunk.push_back(std::move(layer));
    in = width;
  }

  const std::vector<int> head_widths = arch.effective_head_widths();
  params.heads.resize(static_cast<std::size_t>(arch.num_heads));
  for (int h = 0; h < arch.num_heads; ++h) {
    int hid_in = in;
    for (std::size_t l = 0; l < head_widths.size(); ++l) {
      const int width = head_widths[l];
      const bool is_output = (l + 1 == head_widths.size());
      DenseLayer layer;
      layer.weight = Mat(width, hid_in);
      if (!is_output) layer.bias.assign(static_cast<std::size_t>(width), 0.0);
      params.heads[static_cast<std::size_t>(h)].push_back(std::move(layer));
      hid_in = width;
    }
  }

  params.output_scale = 1.0;
  params.run_mean.assign(static_cast<std::size_t>(arch.num_heads), 0.0);
  params.run_var.assign(static_cast<std::size_t>(arch.num_heads), 1.0);
  return params;
}

EnsembleParams init(const ArchitectureConfig& arch, std::uint64_t seed) {
  EnsembleParams params = make_skeleton(arch);
  params.init_seed = seed;
  Rng rng(seed);
  for (DenseLayer& layer : params.trunk) fill_he(layer.weight, layer.weight.cols(), rng);
  for (auto& stack : params.heads) {
    for (DenseLayer& layer : stack) fill_he(layer.weight, layer.weight.cols(), rng);
  }
  return params;
}

std::vector<double> ForwardTrace::head_scores(int row) const {
  std::vector<double> scores(static_cast<std::size_t>(num_heads));
  for (int h = 0; h < num_heads; ++h) scores[static_cast<std::size_t>(h)] = norm_scores(row, h);
  return scores;
}

double ForwardTrace::ensemble(int row) const {
  double sum = 0.0;
  for (int h = 0; h < num_heads; ++h) sum += norm_scores(row, h);
  return sum / static_cast<double>(num_heads);
}

namespace {

ForwardTrace run_forward(const EnsembleParams& params, const Mat& batch, Mode mode) {
  const ArchitectureConfig& arch = params.arch;
  if (batch.rows() < 1) throw std::invalid_argument("forward: empty batch");
  if (batch.cols() != arch.input_dim) {
    throw std::invalid_argument("forward: feature dim " + std::to_string(batch.cols()) +
                                " does not match arch input_dim " +
                                std::to_string(arch.input_dim));
  }
  if (mode == Mode::kTraining && batch.rows() < 2) {
    throw std::invalid_argument("forward: training mode needs a batch of at least 2");
  }

  const int n = batch.rows();
  const int heads = arch.num_heads;

  ForwardTrace trace;
  trace.mode = mode;
  trace.batch_size = n;
  trace.num_heads = heads;
  trace.input = batch;

  const Mat* current = &trace.input;
  for (const DenseLayer& layer : params.trunk) {
    trace.trunk_pre.push_back(linear(*current, layer));
    trace.trunk_act.push_back(relu(trace.trunk_pre.back()));
    current = &trace.trunk_act.back();
  }
  const Mat& trunk_out = *current;

  trace.heads.resize(static_cast<std::size_t>(heads));
  trace.raw_scores = Mat(n, heads);
  for (int h = 0; h < heads; ++h) {
    const auto& stack = params.heads[static_cast<std::size_t>(h)];
    ForwardTrace::HeadTrace& ht = trace.heads[static_cast<std::size_t>(h)];

    const Mat* head_in = &trunk_out;
    for (std::size_t l = 0; l + 1 < stack.size(); ++l) {
      ht.hidden_pre.push_back(linear(*head_in, stack[l]));
      ht.hidden_act.push_back(relu(ht.hidden_pre.back()));
      head_in = &ht.hidden_act.back();
    }

    // project the vector entering the output layer onto the unit sphere
    ht.input_norm.resize(static_cast<std::size_t>(n));
    ht.unit_input = Mat(n, head_in->cols());
    for (int r = 0; r < n; ++r) {
      double sq = 0.0;
      const auto row = head_in->row(r);
      for (double v : row) sq += v * v;
      const double norm = std::max(std::sqrt(sq), kL2NormGuard);
      ht.input_norm[static_cast<std::size_t>(r)] = norm;
      for (int c = 0; c < head_in->cols(); ++c) ht.unit_input(r, c) = row[c] / norm;
    }

    const DenseLayer& out_layer = stack.back();
    for (int r = 0; r < n; ++r) {
      double acc = 0.0;
      const auto wr = out_layer.weight.row(0);
      const auto ur = ht.unit_input.row(r);
      for (int c = 0; c < ht.unit_input.cols(); ++c) acc += wr[c] * ur[c];
      trace.raw_scores(r, h) = acc;
    }
  }

  // output normalization: zero bias, shared scale
  trace.std_scores = Mat(n, heads);
  trace.norm_scores = Mat(n, heads);
  trace.stat_mean.resize(static_cast<std::size_t>(heads));
  trace.stat_var.resize(static_cast<std::size_t>(heads));
  trace.stat_sigma.resize(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    double mean = 0.0;
    double var = 0.0;
    if (mode == Mode::kTraining) {
      for (int r = 0; r < n; ++r) mean += trace.raw_scores(r, h);
      mean /= n;
      for (int r = 0; r < n; ++r) {
        const double d = trace.raw_scores(r, h) - mean;
        var += d * d;
      }
      var /= n;
    } else {
      mean = params.run_mean[static_cast<std::size_t>(h)];
      var = params.run_var[static_cast<std::size_t>(h)];
    }
    const double sigma = std::max(std::sqrt(std::max(var, 0.0)), kOutputNormEps);
    trace.stat_mean[static_cast<std::size_t>(h)] = mean;
    trace.stat_var[static_cast<std::size_t>(h)] = var;
    trace.stat_sigma[static_cast<std::size_t>(h)] = sigma;
    for (int r = 0; r < n; ++r) {
      const double z = (trace.raw_scores(r, h) - mean) / sigma;
      trace.std_scores(r, h) = z;
      trace.norm_scores(r, h) = params.output_scale * z;
    }
  }
  return trace;
}

}  // namespace

ForwardTrace peek_forward(const EnsembleParams& params, const Mat& batch, Mode mode) {
  return run_forward(params, batch, mode);
}

ForwardTrace forward(EnsembleParams& params, const Mat& batch, Mode mode) {
  ForwardTrace trace = run_forward(params, batch, mode);
  if (mode == Mode::kTraining) {
    for (int h = 0; h < params.arch.num_heads; ++h) {
      auto& rm = params.run_mean[static_cast<std::size_t>(h)];
      auto& rv = params.run_var[static_cast<std::size_t>(h)];
      rm = (1.0 - kRunningStatMomentum) * rm +
           kRunningStatMomentum * trace.stat_mean[static_cast<std::size_t>(h)];
      rv = (1.0 - kRunningStatMomentum) * rv +
           kRunningStatMomentum * trace.stat_var[static_cast<std::size_t>(h)];
    }
  }
  return trace;
}

std::vector<double> predict(const EnsembleParams& params, const Mat& batch) {
  const ForwardTrace trace = peek_forward(params, batch, Mode::kInference);
  std::vector<double> preds(static_cast<std::size_t>(batch.rows()));
  for (int r = 0; r < batch.rows(); ++r) preds[static_cast<std::size_t>(r)] = trace.ensemble(r);
  return preds;
}

}  // namespace ensq
