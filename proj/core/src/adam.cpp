#include "ensq/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace ensq {

AdamState make_adam_state(const EnsembleParams& params, double beta1, double beta2, double eps) {
  AdamState state;
  state.beta1 = beta1;
  state.beta2 = beta2;
  state.eps = eps;
  for (const auto& [name, values] : param_tensors(params)) {
    state.m.emplace_back(values.size(), 0.0);
    state.v.emplace_back(values.size(), 0.0);
  }
  return state;
}

void adam_step(EnsembleParams& params, const GradRecord& grads, AdamState& state, double lr) {
  const auto pviews = param_tensors(params);
  const auto gviews = grad_tensors(grads);
  if (pviews.size() != gviews.size() || pviews.size() != state.m.size()) {
    throw std::invalid_argument("adam_step: gradient record not congruent with params");
  }

  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

  for (std::size_t t = 0; t < pviews.size(); ++t) {
    auto& [pname, p] = pviews[t];
    const auto& [gname, g] = gviews[t];
    if (p.size() != g.size()) {
      throw std::invalid_argument("adam_step: tensor shape mismatch at " + pname);
    }
    auto& m = state.m[t];
    auto& v = state.v[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      if (!std::isfinite(gi)) {
        throw std::runtime_error("adam_step: non-finite gradient in " + gname + "[" +
                                 std::to_string(i) + "]");
      }
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace ensq
