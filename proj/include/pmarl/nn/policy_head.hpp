#pragma once

#include <Eigen/Dense>

#include "pmarl/common/rng.hpp"

namespace pmarl::nn {

/// Per-agent action: continuous control vector plus a communication
/// priority strictly inside (0, 1).
struct AgentAction {
  Eigen::VectorXd control;
  double priority = 0.5;
};

struct ActionSample {
  AgentAction action;
  double log_prob = 0.0;
};

struct LogProbEntropy {
  double log_prob = 0.0;
  double entropy = 0.0;
};

/// Which action components enter the density. The round-robin baseline
/// learns control only, so its priority output is not part of the policy.
enum class ActionScope { ControlAndPriority, ControlOnly };

/// Diagonal Gaussian over m control dims plus one pre-squash priority dim,
/// with a state-independent learnable log standard deviation. The priority
/// is the logistic sigmoid of its Gaussian sample; densities carry the
/// change-of-variables term -log(a_p (1 - a_p)).
class GaussianPolicyHead {
 public:
  static constexpr double kMinLogStd = -20.0;
  static constexpr double kMaxLogStd = 2.0;
  /// Pre-squash priority samples are clamped to +-kMaxLogit so that the
  /// sigmoid stays strictly inside (0, 1) in double precision.
  static constexpr double kMaxLogit = 30.0;

  GaussianPolicyHead() = default;
  GaussianPolicyHead(int control_dims, double init_log_std);

  int control_dims() const { return control_dims_; }
  /// Length of the raw mean vector the actor must produce (m + 1).
  int output_dim() const { return control_dims_ + 1; }

  const Eigen::VectorXd& log_std() const { return log_std_; }
  /// Mutable access for the optimizer; call clamp_log_std() after writing.
  Eigen::VectorXd& log_std_mut() { return log_std_; }
  void set_log_std(const Eigen::VectorXd& values);
  void clamp_log_std();

  ActionSample sample(const Eigen::Ref<const Eigen::VectorXd>& mean_raw, Rng& rng,
                      ActionScope scope = ActionScope::ControlAndPriority) const;

  /// Deterministic action: control = mean, priority = sigmoid(mean).
  AgentAction mean_action(const Eigen::Ref<const Eigen::VectorXd>& mean_raw) const;

  /// Throws DomainError when the priority is 0 or 1 (or outside (0,1)).
  LogProbEntropy log_prob_and_entropy(const Eigen::Ref<const Eigen::VectorXd>& mean_raw,
                                      const AgentAction& action,
                                      ActionScope scope = ActionScope::ControlAndPriority) const;

  /// log_prob plus its gradients with respect to mean_raw and log_std
  /// (d_mean and d_log_std are overwritten; excluded dims get zero).
  double log_prob_gradients(const Eigen::Ref<const Eigen::VectorXd>& mean_raw,
                            const AgentAction& action, ActionScope scope,
                            Eigen::Ref<Eigen::VectorXd> d_mean,
                            Eigen::Ref<Eigen::VectorXd> d_log_std) const;

  /// Analytic entropy of the pre-squash Gaussian over the dims in scope.
  double entropy(ActionScope scope = ActionScope::ControlAndPriority) const;

 private:
  void check_mean(const Eigen::Ref<const Eigen::VectorXd>& mean_raw) const;

  int control_dims_ = 0;
  Eigen::VectorXd log_std_;
};

double sigmoid(double z);
/// Inverse sigmoid; DomainError outside (0, 1).
double logit(double p);

}  // namespace pmarl::nn
