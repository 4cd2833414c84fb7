#include "pmarl/nn/adam.hpp"

#include <algorithm>
#include <cmath>

#include "pmarl/common/error.hpp"

namespace pmarl::nn {

void adam_step(std::span<const ParamView> params, std::span<const GradView> grads, AdamState& state) {
  if (params.size() != grads.size()) throw ConfigError("Adam: parameter/gradient count mismatch");
  const bool fresh = state.first_moment.empty();
  if (!fresh && state.first_moment.size() != params.size()) {
    throw ConfigError("Adam: state tracks a different number of tensors");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].values.size() != grads[k].values.size()) {
      throw ConfigError("Adam: shape mismatch for tensor '" + params[k].name + "'");
    }
    if (!fresh && state.first_moment[k].size() != params[k].values.size()) {
      throw ConfigError("Adam: state shape mismatch for tensor '" + params[k].name + "'");
    }
    for (double g : grads[k].values) {
      if (!std::isfinite(g)) throw NumericError("Adam: non-finite gradient in tensor '" + grads[k].name + "'");
    }
  }
  if (fresh) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.values.size(), 0.0);
      state.second_moment.emplace_back(p.values.size(), 0.0);
    }
  }

  const auto& c = state.config;
  const std::int64_t t = state.step + 1;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));

  // Compute into scratch first so a non-finite result leaves everything untouched.
  std::vector<std::vector<double>> m_next(params.size()), v_next(params.size()), p_next(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto n = params[k].values.size();
    m_next[k].resize(n);
    v_next[k].resize(n);
    p_next[k].resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double g = grads[k].values[j];
      const double m = c.beta1 * state.first_moment[k][j] + (1.0 - c.beta1) * g;
      const double v = c.beta2 * state.second_moment[k][j] + (1.0 - c.beta2) * g * g;
      const double m_hat = m / correction1;
      const double v_hat = v / correction2;
      const double p = params[k].values[j] - c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
      if (!std::isfinite(p)) throw NumericError("Adam: update made tensor '" + params[k].name + "' non-finite");
      m_next[k][j] = m;
      v_next[k][j] = v;
      p_next[k][j] = p;
    }
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    std::copy(p_next[k].begin(), p_next[k].end(), params[k].values.begin());
  }
  state.first_moment = std::move(m_next);
  state.second_moment = std::move(v_next);
  state.step = t;
}

double clip_global_norm(std::span<const ParamView> grads_mut, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads_mut) {
    for (double x : g.values) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    for (const auto& g : grads_mut) {
      for (double& x : g.values) x *= factor;
    }
  }
  return norm;
}

}  // namespace pmarl::nn
