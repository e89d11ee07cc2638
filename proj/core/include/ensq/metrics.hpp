#pragma once

#include <span>
#include <stdexcept>

namespace ensq {

// Raised when a correlation is requested on constant or too-short input.
class DegenerateInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double pearson(std::span<const double> a, std::span<const double> b);

// Spearman rank-order correlation: Pearson over fractional (tie-averaged)
// ranks. Needs length >= 3 and non-constant inputs.
double srcc(std::span<const double> preds, std::span<const double> moss);

// Four-parameter logistic, fitted before PLCC:
//   yhat = (eta1 - eta2) / (1 + exp(-(x - eta3) / |eta4|)) + eta2
struct LogisticFit {
  double eta1 = 0.0;
  double eta2 = 0.0;
  double eta3 = 0.0;
  double eta4 = 0.0;
  bool converged = false;
  double residual = 0.0;  // RMSE of the fitted curve
};

double logistic4(double x, const LogisticFit& fit);

struct PlccResult {
  double plcc = 0.0;
  LogisticFit fit;
};

// Damped least squares (Levenberg-Marquardt) with the analytic Jacobian,
// initialized at eta = (max moss, min moss, mean preds, std preds), at most
// 500 iterations, converged when the relative residual change drops below
// 1e-10. Returns the Pearson correlation between fitted values and MOS. If
// the fit does not converge the identity-mapped PLCC is returned with
// converged == false. Needs length >= 5 and non-constant inputs.
PlccResult plcc_with_logistic(std::span<const double> preds, std::span<const double> moss);

struct EvalReport {
  double srcc = 0.0;
  double plcc = 0.0;
  LogisticFit fit;
  int n = 0;
};

EvalReport evaluate(std::span<const double> preds, std::span<const double> moss);

}  // namespace ensq
