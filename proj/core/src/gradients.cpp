#include "ensq/gradients.hpp"

#include <cmath>
#include <stdexcept>

#include "ensq/prob.hpp"

namespace ensq {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

void check_pair_batch(const PairBatch& batch, bool labeled, int input_dim) {
  if (batch.features.rows() % 2 != 0) {
    throw std::invalid_argument("pair batch: feature rows must come in pairs");
  }
  if (!batch.empty() && batch.features.cols() != input_dim) {
    throw std::invalid_argument("pair batch: feature dim mismatch");
  }
  const std::size_t pairs = static_cast<std::size_t>(batch.num_pairs());
  if (labeled) {
    if (batch.labels.size() != pairs) {
      throw std::invalid_argument("pair batch: one label per pair required");
    }
    for (double p : batch.labels) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("pair batch: label outside [0, 1]");
      }
    }
  } else if (!batch.labels.empty()) {
    throw std::invalid_argument("pair batch: unlabeled batch carries labels");
  }
}

// Preference probability derived from two normalized scores, with the clamp
// applied and the pre-clamp derivative w.r.t. (zx - zy) attached.
struct PrefProb {
  double q = 0.0;
  double dgap = 0.0;  // zero when the clamp is active
};

PrefProb pref_prob(double zx, double zy) {
  const double arg = (zx - zy) / kSqrt2;
  const double raw = std_normal_cdf_raw(arg);
  PrefProb out;
  out.q = clamp_probability(raw);
  if (raw > kProbClampEps && raw < 1.0 - kProbClampEps) {
    out.dgap = std_normal_pdf(arg) / kSqrt2;
  }
  return out;
}

struct DivPairRef {
  const ForwardTrace* trace;
  Mat* dz;  // may be null in value-only mode
  int row_x;
  int row_y;
};

// Accuracy term (labeled pairs) and, when dz != null, its contribution to
// dL/d norm_scores.
double accuracy_term(const ForwardTrace& trace, std::span<const double> labels, double lambda,
                     Mat* dz) {
  const int num_pairs = static_cast<int>(labels.size());
  const int m = trace.num_heads;
  const double pair_w = 1.0 / num_pairs;
  double acc = 0.0;
  for (int j = 0; j < num_pairs; ++j) {
    const int rx = 2 * j;
    const int ry = 2 * j + 1;
    const double p = labels[static_cast<std::size_t>(j)];

    const PrefProb ens = pref_prob(trace.ensemble(rx), trace.ensemble(ry));
    acc += pair_w * fidelity_loss_raw(p, ens.q);
    if (dz != nullptr && ens.dgap != 0.0) {
      const double dd = pair_w * fidelity_dq(p, ens.q) * ens.dgap / m;
      for (int h = 0; h < m; ++h) {
        (*dz)(rx, h) += dd;
        (*dz)(ry, h) -= dd;
      }
    }

    if (lambda != 0.0) {
      const double ind_w = pair_w * lambda / m;
      for (int h = 0; h < m; ++h) {
        const PrefProb ph = pref_prob(trace.norm_scores(rx, h), trace.norm_scores(ry, h));
        acc += ind_w * fidelity_loss_raw(p, ph.q);
        if (dz != nullptr && ph.dgap != 0.0) {
          const double dd = ind_w * fidelity_dq(p, ph.q) * ph.dgap;
          (*dz)(rx, h) += dd;
          (*dz)(ry, h) -= dd;
        }
      }
    }
  }
  return acc;
}

double diversity_pairwise_term(std::span<const DivPairRef> pairs, int m, double gamma) {
  if (m < 2) {
    throw std::invalid_argument("diversity: pairwise variant needs at least 2 heads");
  }
  const double norm = static_cast<double>(m * (m - 1) / 2) * static_cast<double>(pairs.size());
  double div = 0.0;
  std::vector<PrefProb> probs(static_cast<std::size_t>(m));
  for (const DivPairRef& ref : pairs) {
    for (int h = 0; h < m; ++h) {
      probs[static_cast<std::size_t>(h)] =
          pref_prob(ref.trace->norm_scores(ref.row_x, h), ref.trace->norm_scores(ref.row_y, h));
    }
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        const PrefProb& pi = probs[static_cast<std::size_t>(i)];
        const PrefProb& pj = probs[static_cast<std::size_t>(j)];
        div -= fidelity_loss_raw(pi.q, pj.q) / norm;
        if (ref.dz != nullptr && gamma != 0.0) {
          const double wi = -gamma / norm * fidelity_dq(pj.q, pi.q) * pi.dgap;
          const double wj = -gamma / norm * fidelity_dq(pi.q, pj.q) * pj.dgap;
          (*ref.dz)(ref.row_x, i) += wi;
          (*ref.dz)(ref.row_y, i) -= wi;
          (*ref.dz)(ref.row_x, j) += wj;
          (*ref.dz)(ref.row_y, j) -= wj;
        }
      }
    }
  }
  return div;
}

double diversity_to_ensemble_term(std::span<const DivPairRef> pairs, int m, double gamma) {
  const double norm = static_cast<double>(m) * static_cast<double>(pairs.size());
  double div = 0.0;
  for (const DivPairRef& ref : pairs) {
    const PrefProb pe = pref_prob(ref.trace->ensemble(ref.row_x), ref.trace->ensemble(ref.row_y));
    double de_gap = 0.0;  // accumulated dL/d(ensemble gap)
    for (int h = 0; h < m; ++h) {
      const PrefProb ph =
          pref_prob(ref.trace->norm_scores(ref.row_x, h), ref.trace->norm_scores(ref.row_y, h));
      div -= fidelity_loss_raw(ph.q, pe.q) / norm;
      if (ref.dz != nullptr && gamma != 0.0) {
        const double wh = -gamma / norm * fidelity_dq(pe.q, ph.q) * ph.dgap;
        (*ref.dz)(ref.row_x, h) += wh;
        (*ref.dz)(ref.row_y, h) -= wh;
        de_gap += -gamma / norm * fidelity_dq(ph.q, pe.q);
      }
    }
    if (ref.dz != nullptr && de_gap != 0.0 && pe.dgap != 0.0) {
      const double dd = de_gap * pe.dgap / m;
      for (int h = 0; h < m; ++h) {
        (*ref.dz)(ref.row_x, h) += dd;
        (*ref.dz)(ref.row_y, h) -= dd;
      }
    }
  }
  return div;
}

double diversity_variance_term(std::span<const DivPairRef> pairs, int m, double gamma) {
  // Eq-7-style diversity is defined per sample; every pair member counts.
  const double rows = 2.0 * static_cast<double>(pairs.size());
  double div = 0.0;
  for (const DivPairRef& ref : pairs) {
    for (const int r : {ref.row_x, ref.row_y}) {
      const double f = ref.trace->ensemble(r);
      for (int h = 0; h < m; ++h) {
        const double dev = ref.trace->norm_scores(r, h) - f;
        div -= dev * dev / (m * rows);
        if (ref.dz != nullptr && gamma != 0.0) {
          (*ref.dz)(r, h) += gamma * (-2.0 / (m * rows)) * dev;
        }
      }
    }
  }
  return div;
}

LossBreakdown assemble_losses(const ForwardTrace& trace_l, const ForwardTrace* trace_u,
                              std::span<const double> labels, const ObjectiveConfig& cfg,
                              Mat* dzl, Mat* dzu) {
  const int m = trace_l.num_heads;
  LossBreakdown loss;
  loss.accuracy = accuracy_term(trace_l, labels, cfg.lambda, dzl);

  if (cfg.gamma != 0.0) {
    std::vector<DivPairRef> div_pairs;
    if (trace_u != nullptr) {
      for (int j = 0; j < trace_u->batch_size / 2; ++j) {
        div_pairs.push_back({trace_u, dzu, 2 * j, 2 * j + 1});
      }
    }
    if (cfg.include_labeled_in_diversity) {
      for (int j = 0; j < trace_l.batch_size / 2; ++j) {
        div_pairs.push_back({&trace_l, dzl, 2 * j, 2 * j + 1});
      }
    }
    if (!div_pairs.empty()) {
      switch (cfg.diversity) {
        case DiversityVariant::kPairwiseFidelity:
          loss.diversity = diversity_pairwise_term(div_pairs, m, cfg.gamma);
          break;
        case DiversityVariant::kToEnsemble:
          loss.diversity = diversity_to_ensemble_term(div_pairs, m, cfg.gamma);
          break;
        case DiversityVariant::kVariance:
          loss.diversity = diversity_variance_term(div_pairs, m, cfg.gamma);
          break;
      }
    }
  }
  loss.total = loss.accuracy + cfg.gamma * loss.diversity;
  return loss;
}

void accumulate_linear_grads(const Mat& dz, const Mat& input, DenseLayer& grads) {
  const int n = dz.rows();
  const int out = dz.cols();
  const int in = input.cols();
  for (int r = 0; r < n; ++r) {
    const auto dzr = dz.row(r);
    const auto inr = input.row(r);
    for (int o = 0; o < out; ++o) {
      const double g = dzr[o];
      if (g == 0.0) continue;
      auto wr = grads.weight.row(o);
      for (int i = 0; i < in; ++i) wr[i] += g * inr[i];
      if (!grads.bias.empty()) grads.bias[static_cast<std::size_t>(o)] += g;
    }
  }
}

Mat backprop_linear_input(const Mat& dz, const Mat& weight) {
  const int n = dz.rows();
  const int out = weight.rows();
  const int in = weight.cols();
  Mat din(n, in);
  for (int r = 0; r < n; ++r) {
    auto dinr = din.row(r);
    const auto dzr = dz.row(r);
    for (int o = 0; o < out; ++o) {
      const double g = dzr[o];
      if (g == 0.0) continue;
      const auto wr = weight.row(o);
      for (int i = 0; i < in; ++i) dinr[i] += g * wr[i];
    }
  }
  return din;
}

void apply_relu_mask(Mat& da, const Mat& pre) {
  for (int r = 0; r < da.rows(); ++r) {
    for (int c = 0; c < da.cols(); ++c) {
      if (!(pre(r, c) > 0.0)) da(r, c) = 0.0;
    }
  }
}

// Reverse pass from dL/d norm_scores down to every parameter tensor.
void backprop_trace(const EnsembleParams& params, const ForwardTrace& trace, const Mat& dz,
                    GradRecord& out) {
  if (trace.mode != Mode::kTraining) {
    throw std::logic_error("backprop: trace was not produced in training mode");
  }
  const int n = trace.batch_size;
  const int m = trace.num_heads;
  const double scale = params.output_scale;
  const Mat& trunk_out = params.trunk.empty() ? trace.input : trace.trunk_act.back();

  Mat d_trunk_out(n, trunk_out.cols());

  for (int h = 0; h < m; ++h) {
    // output normalization backward (batch statistics couple the rows)
    double g_sum = 0.0;
    double gz_sum = 0.0;
    for (int r = 0; r < n; ++r) {
      g_sum += dz(r, h);
      gz_sum += dz(r, h) * trace.std_scores(r, h);
    }
    out.output_scale += gz_sum;

    const double sigma = trace.stat_sigma[static_cast<std::size_t>(h)];
    const double batch_std =
        std::sqrt(std::max(trace.stat_var[static_cast<std::size_t>(h)], 0.0));
    const bool floored = batch_std < sigma;
    std::vector<double> ds(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) {
      double t = dz(r, h) - g_sum / n;
      if (!floored) t -= trace.std_scores(r, h) * gz_sum / n;
      ds[static_cast<std::size_t>(r)] = scale / sigma * t;
    }

    // bias-free output layer over the unit-sphere input
    const auto& stack = params.heads[static_cast<std::size_t>(h)];
    auto& gstack = out.heads[static_cast<std::size_t>(h)];
    const ForwardTrace::HeadTrace& ht = trace.heads[static_cast<std::size_t>(h)];
    const Mat& unit = ht.unit_input;
    const Mat& out_w = stack.back().weight;
    Mat du(n, unit.cols());
    {
      auto gw = gstack.back().weight.row(0);
      const auto wr = out_w.row(0);
      for (int r = 0; r < n; ++r) {
        const double g = ds[static_cast<std::size_t>(r)];
        for (int c = 0; c < unit.cols(); ++c) {
          gw[c] += g * unit(r, c);
          du(r, c) = g * wr[c];
        }
      }
    }

    // l2 projection backward
    Mat da(n, unit.cols());
    for (int r = 0; r < n; ++r) {
      const double nrm = ht.input_norm[static_cast<std::size_t>(r)];
      if (nrm > kL2NormGuard) {
        double dot = 0.0;
        for (int c = 0; c < unit.cols(); ++c) dot += du(r, c) * unit(r, c);
        for (int c = 0; c < unit.cols(); ++c) {
          da(r, c) = (du(r, c) - dot * unit(r, c)) / nrm;
        }
      } else {
        for (int c = 0; c < unit.cols(); ++c) da(r, c) = du(r, c) / nrm;
      }
    }

    // hidden head layers, in reverse
    const int hidden = static_cast<int>(stack.size()) - 1;
    for (int l = hidden - 1; l >= 0; --l) {
      apply_relu_mask(da, ht.hidden_pre[static_cast<std::size_t>(l)]);
      const Mat& input = l == 0 ? trunk_out : ht.hidden_act[static_cast<std::size_t>(l - 1)];
      accumulate_linear_grads(da, input, gstack[static_cast<std::size_t>(l)]);
      da = backprop_linear_input(da, stack[static_cast<std::size_t>(l)].weight);
    }
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < trunk_out.cols(); ++c) d_trunk_out(r, c) += da(r, c);
    }
  }

  // shared trunk, in reverse
  Mat da = std::move(d_trunk_out);
  for (int l = static_cast<int>(params.trunk.size()) - 1; l >= 0; --l) {
    apply_relu_mask(da, trace.trunk_pre[static_cast<std::size_t>(l)]);
    const Mat& input = l == 0 ? trace.input : trace.trunk_act[static_cast<std::size_t>(l - 1)];
    accumulate_linear_grads(da, input, out.trunk[static_cast<std::size_t>(l)]);
    if (l > 0) da = backprop_linear_input(da, params.trunk[static_cast<std::size_t>(l)].weight);
  }
}

}  // namespace

GradRecord zeros_like(const EnsembleParams& params) {
  GradRecord g;
  g.trunk.reserve(params.trunk.size());
  for (const DenseLayer& layer : params.trunk) {
    DenseLayer z;
    z.weight = Mat(layer.weight.rows(), layer.weight.cols());
    z.bias.assign(layer.bias.size(), 0.0);
    g.trunk.push_back(std::move(z));
  }
  g.heads.resize(params.heads.size());
  for (std::size_t h = 0; h < params.heads.size(); ++h) {
    for (const DenseLayer& layer : params.heads[h]) {
      DenseLayer z;
      z.weight = Mat(layer.weight.rows(), layer.weight.cols());
      z.bias.assign(layer.bias.size(), 0.0);
      g.heads[h].push_back(std::move(z));
    }
  }
  g.output_scale = 0.0;
  return g;
}

namespace {

template <typename Layers, typename Views>
void collect_layer_views(Layers& layers, const std::string& prefix, Views& views) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& layer = layers[l];
    views.emplace_back(prefix + "." + std::to_string(l) + ".weight",
                       std::span(layer.weight.data()));
    if (!layer.bias.empty()) {
      views.emplace_back(prefix + "." + std::to_string(l) + ".bias", std::span(layer.bias));
    }
  }
}

template <typename Record, typename View>
std::vector<View> collect_views(Record& record) {
  std::vector<View> views;
  collect_layer_views(record.trunk, "trunk", views);
  for (std::size_t h = 0; h < record.heads.size(); ++h) {
    collect_layer_views(record.heads[h], "head." + std::to_string(h), views);
  }
  views.emplace_back("output_scale", std::span(&record.output_scale, 1));
  return views;
}

}  // namespace

std::vector<TensorView> param_tensors(EnsembleParams& params) {
  return collect_views<EnsembleParams, TensorView>(params);
}
std::vector<ConstTensorView> param_tensors(const EnsembleParams& params) {
  return collect_views<const EnsembleParams, ConstTensorView>(params);
}
std::vector<TensorView> grad_tensors(GradRecord& grads) {
  return collect_views<GradRecord, TensorView>(grads);
}
std::vector<ConstTensorView> grad_tensors(const GradRecord& grads) {
  return collect_views<const GradRecord, ConstTensorView>(grads);
}

LossBreakdown objective_value(const EnsembleParams& params, const PairBatch& labeled,
                              const PairBatch& unlabeled, const ObjectiveConfig& cfg) {
  cfg.validate();
  check_pair_batch(labeled, /*labeled=*/true, params.arch.input_dim);
  check_pair_batch(unlabeled, /*labeled=*/false, params.arch.input_dim);
  if (labeled.empty()) throw std::invalid_argument("objective: labeled batch is empty");

  const ForwardTrace trace_l = peek_forward(params, labeled.features, Mode::kTraining);
  ForwardTrace trace_u;
  const bool has_unlabeled = !unlabeled.empty();
  if (has_unlabeled) trace_u = peek_forward(params, unlabeled.features, Mode::kTraining);
  return assemble_losses(trace_l, has_unlabeled ? &trace_u : nullptr, labeled.labels, cfg,
                         nullptr, nullptr);
}

GradResult grad(EnsembleParams& params, const PairBatch& labeled, const PairBatch& unlabeled,
                const ObjectiveConfig& cfg) {
  cfg.validate();
  check_pair_batch(labeled, /*labeled=*/true, params.arch.input_dim);
  check_pair_batch(unlabeled, /*labeled=*/false, params.arch.input_dim);
  if (labeled.empty()) throw std::invalid_argument("objective: labeled batch is empty");

  const ForwardTrace trace_l = forward(params, labeled.features, Mode::kTraining);
  ForwardTrace trace_u;
  const bool has_unlabeled = !unlabeled.empty();
  if (has_unlabeled) trace_u = forward(params, unlabeled.features, Mode::kTraining);

  Mat dzl(trace_l.batch_size, trace_l.num_heads);
  Mat dzu;
  if (has_unlabeled) dzu = Mat(trace_u.batch_size, trace_u.num_heads);

  GradResult result;
  result.loss = assemble_losses(trace_l, has_unlabeled ? &trace_u : nullptr, labeled.labels, cfg,
                                &dzl, has_unlabeled ? &dzu : nullptr);
  result.grads = zeros_like(params);
  backprop_trace(params, trace_l, dzl, result.grads);
  if (has_unlabeled) backprop_trace(params, trace_u, dzu, result.grads);
  return result;
}

}  // namespace ensq
