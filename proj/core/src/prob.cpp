#include "ensq/prob.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ensq {

namespace {
constexpr double kSqrt2 = 1.41421356237309504880;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

Probability::Probability(double value) : value_(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument("Probability outside [0, 1]");
  }
}

QualityScore::QualityScore(double value) : value_(value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("QualityScore must be finite");
  }
}

double std_normal_cdf_raw(double z) {
  return 0.5 * std::erfc(-z / kSqrt2);
}

double std_normal_pdf(double z) {
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

Probability std_normal_cdf(double z) {
  if (!std::isfinite(z)) {
    throw std::invalid_argument("std_normal_cdf: non-finite input");
  }
  return Probability(std_normal_cdf_raw(z));
}

double fidelity_loss_raw(double p, double phat) {
  const double loss = 1.0 - std::sqrt(p * phat) - std::sqrt((1.0 - p) * (1.0 - phat));
  // the exact value is in [0, 1]; rounding can leave a -1e-17 residue at p == phat
  return std::max(0.0, loss);
}

double fidelity_loss(Probability p, Probability phat) {
  return fidelity_loss_raw(p.value(), phat.value());
}

double clamp_probability(double p) {
  return std::clamp(p, kProbClampEps, 1.0 - kProbClampEps);
}

double fidelity_dq(double p, double q) {
  return -0.5 * (std::sqrt(p / q) - std::sqrt((1.0 - p) / (1.0 - q)));
}

Probability binary_preference(double mu_x, double mu_y) {
  if (!std::isfinite(mu_x) || !std::isfinite(mu_y)) {
    throw std::invalid_argument("binary_preference: non-finite MOS");
  }
  return Probability(mu_x >= mu_y ? 1.0 : 0.0);
}

double thurstone_prob_raw(double fx, double fy) {
  return std_normal_cdf_raw((fx - fy) / kSqrt2);
}

Probability thurstone_prob(QualityScore fx, QualityScore fy) {
  return Probability(thurstone_prob_raw(fx.value(), fy.value()));
}

QualityScore ensemble_score(std::span<const QualityScore> head_scores) {
  if (head_scores.empty()) {
    throw std::invalid_argument("ensemble_score: empty head sequence");
  }
  double sum = 0.0;
  for (const QualityScore& s : head_scores) sum += s.value();
  return QualityScore(sum / static_cast<double>(head_scores.size()));
}

}  // namespace ensq
