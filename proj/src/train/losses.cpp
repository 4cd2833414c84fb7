#include "pmarl/train/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmarl/common/error.hpp"

namespace pmarl::train {

double clipped_surrogate(double ratio, double advantage, double eps) {
  const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps);
  return std::min(ratio * advantage, clipped * advantage);
}

double clipped_value_error(double value, double old_value, double target, double eps) {
  const double unclipped = value - target;
  const double clipped = old_value + std::clamp(value - old_value, -eps, eps) - target;
  return std::min(unclipped * unclipped, clipped * clipped);
}

void normalize_advantages(Eigen::VectorXd& advantages) {
  if (advantages.size() == 0) return;
  const double mean = advantages.mean();
  const double var = (advantages.array() - mean).square().mean();
  advantages = ((advantages.array() - mean) / std::max(std::sqrt(var), 1e-8)).matrix();
}

ActorLoss actor_loss(const nn::Mlp& actor, const nn::GaussianPolicyHead& head, const PolicyBatch& batch,
                     double clip_eps, double entropy_coef, nn::ActionScope scope) {
  const Eigen::Index n = batch.size();
  if (n == 0) throw ConfigError("actor_loss: empty batch");
  const auto cache = actor.forward_cached(batch.observations);
  const nn::Matrix& means = cache.output();

  ActorLoss out;
  out.ratios.resize(n);
  out.log_std_grad = nn::Vector::Zero(head.output_dim());
  nn::Matrix output_grad(head.output_dim(), n);
  nn::Vector d_mean(head.output_dim());
  nn::Vector d_log_std(head.output_dim());

  const double inv_n = 1.0 / static_cast<double>(n);
  double surrogate = 0.0;
  Eigen::Index clipped = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lp = head.log_prob_gradients(means.col(k), batch.action(k), scope, d_mean, d_log_std);
    const double ratio = std::exp(lp - batch.old_log_probs[k]);
    if (!std::isfinite(ratio)) {
      throw NumericError("actor_loss: non-finite probability ratio at sample " + std::to_string(k));
    }
    out.ratios[k] = ratio;
    const double adv = batch.advantages[k];
    const double plain = ratio * adv;
    const double obj = clipped_surrogate(ratio, adv, clip_eps);
    surrogate += obj;
    // The unclipped branch carries the gradient unless the clipped one is strictly smaller.
    const bool unclipped_active = plain <= obj;
    if (!unclipped_active) ++clipped;
    const double d_loss_d_lp = unclipped_active ? -inv_n * plain : 0.0;
    output_grad.col(k) = d_loss_d_lp * d_mean;
    out.log_std_grad += d_loss_d_lp * d_log_std;
  }
  out.surrogate = surrogate * inv_n;
  out.entropy = head.entropy(scope);
  out.loss = -out.surrogate - entropy_coef * out.entropy;
  out.clip_fraction = static_cast<double>(clipped) * inv_n;

  // d entropy / d log_std = 1 for every dim in scope
  const int dims = scope == nn::ActionScope::ControlAndPriority ? head.output_dim() : head.control_dims();
  out.log_std_grad.head(dims).array() -= entropy_coef;

  out.actor_grads = actor.backward(cache, output_grad);
  return out;
}

CriticLoss critic_loss(const nn::Mlp& critic, const ValueBatch& batch, double clip_eps) {
  const Eigen::Index n = batch.observations.cols();
  if (n == 0) throw ConfigError("critic_loss: empty batch");
  if (critic.output_dim() != 1) throw ConfigError("critic_loss: critic must have a scalar output");
  const auto cache = critic.forward_cached(batch.observations);
  const nn::Matrix& values = cache.output();

  const double inv_n = 1.0 / static_cast<double>(n);
  CriticLoss out;
  nn::Matrix output_grad(1, n);
  double total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double v = values(0, k);
    const double v_old = batch.old_values[k];
    const double target = batch.targets[k];
    const double unclipped = v - target;
    const double shift = v - v_old;
    const double clipped = v_old + std::clamp(shift, -clip_eps, clip_eps) - target;
    const double sq_u = unclipped * unclipped;
    const double sq_c = clipped * clipped;
    if (sq_u <= sq_c) {
      total += sq_u;
      output_grad(0, k) = 2.0 * unclipped * inv_n;
    } else {
      total += sq_c;
      const bool inside = shift > -clip_eps && shift < clip_eps;
      output_grad(0, k) = inside ? 2.0 * clipped * inv_n : 0.0;
    }
  }
  out.loss = total * inv_n;
  if (!std::isfinite(out.loss)) throw NumericError("critic_loss: non-finite loss");
  out.grads = critic.backward(cache, output_grad);
  return out;
}

}  // namespace pmarl::train
