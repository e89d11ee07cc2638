#include "ensq/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

namespace ensq {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

bool is_constant(std::span<const double> v) {
  for (double x : v) {
    if (x != v.front()) return false;
  }
  return true;
}

// fractional ranks, ties averaged
std::vector<double> ranks_of(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw std::invalid_argument("pearson: need two equal-length sequences of >= 2");
  }
  if (is_constant(a) || is_constant(b)) {
    throw DegenerateInputError("pearson: constant input");
  }
  const double ma = mean_of(a);
  const double mb = mean_of(b);
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  return cov / std::sqrt(va * vb);
}

double srcc(std::span<const double> preds, std::span<const double> moss) {
  if (preds.size() != moss.size() || preds.size() < 3) {
    throw std::invalid_argument("srcc: need two equal-length sequences of >= 3");
  }
  if (is_constant(preds) || is_constant(moss)) {
    throw DegenerateInputError("srcc: constant input");
  }
  const std::vector<double> ra = ranks_of(preds);
  const std::vector<double> rb = ranks_of(moss);
  return pearson(ra, rb);
}

double logistic4(double x, const LogisticFit& fit) {
  const double t = (x - fit.eta3) / std::abs(fit.eta4);
  return (fit.eta1 - fit.eta2) / (1.0 + std::exp(-t)) + fit.eta2;
}

namespace {

constexpr int kMaxLmIterations = 500;
constexpr double kLmRelTolerance = 1e-10;

// residual vector r_i = moss_i - model(preds_i); returns SSE
double residuals(std::span<const double> preds, std::span<const double> moss,
                 const std::array<double, 4>& eta, std::vector<double>& r) {
  LogisticFit fit{eta[0], eta[1], eta[2], eta[3], false, 0.0};
  double sse = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    r[i] = moss[i] - logistic4(preds[i], fit);
    sse += r[i] * r[i];
  }
  return sse;
}

// rows of the Jacobian of the model (not the residual)
void jacobian_row(double x, const std::array<double, 4>& eta, std::array<double, 4>& row) {
  const double a4 = std::abs(eta[3]);
  const double t = (x - eta[2]) / a4;
  const double s = 1.0 / (1.0 + std::exp(-t));
  const double ds = s * (1.0 - s);
  const double span = eta[0] - eta[1];
  row[0] = s;
  row[1] = 1.0 - s;
  row[2] = span * ds * (-1.0 / a4);
  row[3] = span * ds * (-(x - eta[2]) / (a4 * a4)) * (eta[3] < 0.0 ? -1.0 : 1.0);
}

// solve the 4x4 system (JtJ + mu * diag(JtJ)) delta = Jtr in place
bool solve4(std::array<std::array<double, 4>, 4> m, std::array<double, 4> rhs,
            std::array<double, 4>& out) {
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < 1e-300) return false;
    std::swap(m[col], m[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int i = 0; i < 4; ++i) out[i] = rhs[i] / m[i][i];
  return true;
}

}  // namespace

PlccResult plcc_with_logistic(std::span<const double> preds, std::span<const double> moss) {
  if (preds.size() != moss.size() || preds.size() < 5) {
    throw std::invalid_argument("plcc_with_logistic: need two equal-length sequences of >= 5");
  }
  if (is_constant(preds) || is_constant(moss)) {
    throw DegenerateInputError("plcc_with_logistic: constant input");
  }
  const std::size_t n = preds.size();

  // initialization brackets the data
  std::array<double, 4> eta;
  eta[0] = *std::max_element(moss.begin(), moss.end());
  eta[1] = *std::min_element(moss.begin(), moss.end());
  eta[2] = mean_of(preds);
  double var = 0.0;
  for (double x : preds) var += (x - eta[2]) * (x - eta[2]);
  eta[3] = std::sqrt(var / static_cast<double>(n));

  std::vector<double> r(n);
  double sse = residuals(preds, moss, eta, r);
  double mu = 1e-3;
  bool converged = false;

  for (int iter = 0; iter < kMaxLmIterations; ++iter) {
    std::array<std::array<double, 4>, 4> jtj{};
    std::array<double, 4> jtr{};
    std::array<double, 4> row;
    for (std::size_t i = 0; i < n; ++i) {
      jacobian_row(preds[i], eta, row);
      for (int a = 0; a < 4; ++a) {
        jtr[a] += row[a] * r[i];
        for (int b = a; b < 4; ++b) jtj[a][b] += row[a] * row[b];
      }
    }
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];
    }

    bool stepped = false;
    for (int attempt = 0; attempt < 32 && !stepped; ++attempt) {
      auto damped = jtj;
      for (int a = 0; a < 4; ++a) damped[a][a] += mu * std::max(jtj[a][a], 1e-12);
      std::array<double, 4> delta;
      if (!solve4(damped, jtr, delta)) {
        mu *= 10.0;
        continue;
      }
      std::array<double, 4> trial = eta;
      for (int a = 0; a < 4; ++a) trial[a] += delta[a];
      if (std::abs(trial[3]) < 1e-12) trial[3] = trial[3] < 0.0 ? -1e-12 : 1e-12;
      std::vector<double> r_trial(n);
      const double sse_trial = residuals(preds, moss, trial, r_trial);
      if (std::isfinite(sse_trial) && sse_trial <= sse) {
        const double rel = (sse - sse_trial) / std::max(sse, 1e-300);
        eta = trial;
        r = std::move(r_trial);
        sse = sse_trial;
        mu = std::max(mu * 0.1, 1e-12);
        stepped = true;
        if (rel < kLmRelTolerance) converged = true;
      } else {
        mu *= 10.0;
      }
    }
    if (!stepped || converged) {
      converged = converged || stepped;
      break;
    }
  }

  PlccResult result;
  result.fit.eta1 = eta[0];
  result.fit.eta2 = eta[1];
  result.fit.eta3 = eta[2];
  result.fit.eta4 = eta[3];
  result.fit.converged = converged;
  result.fit.residual = std::sqrt(sse / static_cast<double>(n));

  if (!converged) {
    // flagged fallback: identity-mapped PLCC
    result.plcc = pearson(preds, moss);
    return result;
  }
  std::vector<double> fitted(n);
  for (std::size_t i = 0; i < n; ++i) fitted[i] = logistic4(preds[i], result.fit);
  result.plcc = is_constant(fitted) ? pearson(preds, moss) : pearson(fitted, moss);
  return result;
}

EvalReport evaluate(std::span<const double> preds, std::span<const double> moss) {
  EvalReport report;
  report.n = static_cast<int>(preds.size());
  report.srcc = srcc(preds, moss);
  const PlccResult plcc = plcc_with_logistic(preds, moss);
  report.plcc = plcc.plcc;
  report.fit = plcc.fit;
  return report;
}

}  // namespace ensq
