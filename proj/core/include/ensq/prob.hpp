#pragma once

#include <span>

namespace ensq {

// Predicted preference probabilities are clamped to [eps, 1-eps] before any
// fidelity loss/gradient evaluation in the training path: the gradient
// carries 1/sqrt(phat) and 1/sqrt(1-phat) factors, and the normal CDF
// saturates numerically for well-separated scores.
inline constexpr double kProbClampEps = 1e-6;

// A value in [0, 1]. Construction outside the range (or non-finite) throws
// std::invalid_argument.
class Probability {
 public:
  explicit Probability(double value);
  double value() const { return value_; }
  bool operator==(const Probability&) const = default;

 private:
  double value_;
};

// A finite dimensionless perceptual-scale score.
class QualityScore {
 public:
  explicit QualityScore(double value);
  double value() const { return value_; }
  bool operator==(const QualityScore&) const = default;

 private:
  double value_;
};

// Standard normal CDF, computed through the complementary error function
// (Phi(z) = erfc(-z/sqrt(2)) / 2, absolute error well under 1e-12).
// Throws std::invalid_argument for non-finite z.
Probability std_normal_cdf(double z);

// 1 - sqrt(p*phat) - sqrt((1-p)(1-phat)). Symmetric, in [0, 1], zero iff the
// two distributions agree. Arguments are used as given; clamping happens
// where probabilities are derived from scores.
double fidelity_loss(Probability p, Probability phat);

// Binary preference target: 1 if mu_x >= mu_y, else 0.
Probability binary_preference(double mu_x, double mu_y);

// Preference probability under the unit-variance paired-comparison model:
// Phi((fx - fy) / sqrt(2)).
Probability thurstone_prob(QualityScore fx, QualityScore fy);

// Arithmetic mean of the head scores. Empty input throws
// std::invalid_argument.
QualityScore ensemble_score(std::span<const QualityScore> head_scores);

// Raw-double working set for the training path. The typed operations above
// delegate here.
double std_normal_cdf_raw(double z);
double std_normal_pdf(double z);
double fidelity_loss_raw(double p, double phat);
double clamp_probability(double p);
// d fidelity_loss(p, q) / dq. Callers clamp q first; the derivative is only
// evaluated on clamped predictions.
double fidelity_dq(double p, double q);
double thurstone_prob_raw(double fx, double fy);

}  // namespace ensq
