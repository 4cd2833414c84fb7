#pragma once

#include <Eigen/Dense>

#include "pmarl/nn/mlp.hpp"
#include "pmarl/nn/policy_head.hpp"

namespace pmarl::train {

/// min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A) for one sample.
double clipped_surrogate(double ratio, double advantage, double eps);

/// min((v - target)^2, (v_old + clip(v - v_old, -eps, eps) - target)^2),
/// the element-wise minimum exactly as the value objective is written.
double clipped_value_error(double value, double old_value, double target, double eps);

/// Standardizes to zero mean / unit std (population std, 1e-8 floor).
void normalize_advantages(Eigen::VectorXd& advantages);

/// One minibatch for the actor. Columns of `observations` are samples.
struct PolicyBatch {
  nn::Matrix observations;
  nn::Matrix controls;
  nn::Vector priorities;
  nn::Vector old_log_probs;
  nn::Vector advantages;

  Eigen::Index size() const { return observations.cols(); }
  nn::AgentAction action(Eigen::Index k) const { return {controls.col(k), priorities[k]}; }
};

struct ActorLoss {
  /// -mean(clipped surrogate) - entropy_coef * entropy
  double loss = 0.0;
  double surrogate = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  nn::Vector ratios;
  nn::MlpGradients actor_grads;
  nn::Vector log_std_grad;
};

/// Throws NumericError naming the sample index when a ratio is non-finite.
ActorLoss actor_loss(const nn::Mlp& actor, const nn::GaussianPolicyHead& head, const PolicyBatch& batch,
                     double clip_eps, double entropy_coef, nn::ActionScope scope);

struct ValueBatch {
  nn::Matrix observations;
  nn::Vector old_values;
  nn::Vector targets;
};

struct CriticLoss {
  double loss = 0.0;
  nn::MlpGradients grads;
};

CriticLoss critic_loss(const nn::Mlp& critic, const ValueBatch& batch, double clip_eps);

}  // namespace pmarl::train
