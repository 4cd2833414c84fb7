#include "pmarl/nn/policy_head.hpp"

#include <cmath>
#include <algorithm>
#include <random>
#include <string>

#include "pmarl/common/error.hpp"

namespace pmarl::nn {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2*pi)

int scope_dims(int control_dims, ActionScope scope) {
  return scope == ActionScope::ControlAndPriority ? control_dims + 1 : control_dims;
}

}  // namespace

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("logit undefined for priority " + std::to_string(p));
  }
  return std::log(p) - std::log1p(-p);
}

GaussianPolicyHead::GaussianPolicyHead(int control_dims, double init_log_std)
    : control_dims_(control_dims), log_std_(Eigen::VectorXd::Constant(control_dims + 1, init_log_std)) {
  if (control_dims <= 0) throw ConfigError("policy head needs at least one control dim");
  clamp_log_std();
}

void GaussianPolicyHead::set_log_std(const Eigen::VectorXd& values) {
  if (values.size() != log_std_.size()) throw ConfigError("log_std size mismatch");
  log_std_ = values;
  clamp_log_std();
}

void GaussianPolicyHead::clamp_log_std() {
  log_std_ = log_std_.cwiseMax(kMinLogStd).cwiseMin(kMaxLogStd);
}

void GaussianPolicyHead::check_mean(const Eigen::Ref<const Eigen::VectorXd>& mean_raw) const {
  if (mean_raw.size() != output_dim()) {
    throw ConfigError("policy mean has length " + std::to_string(mean_raw.size()) + ", expected " +
                      std::to_string(output_dim()));
  }
}

ActionSample GaussianPolicyHead::sample(const Eigen::Ref<const Eigen::VectorXd>& mean_raw, Rng& rng,
                                        ActionScope scope) const {
  check_mean(mean_raw);
  std::normal_distribution<double> normal(0.0, 1.0);
  ActionSample out;
  out.action.control.resize(control_dims_);
  for (int d = 0; d < control_dims_; ++d) {
    out.action.control[d] = mean_raw[d] + std::exp(log_std_[d]) * normal(rng);
  }
  const int p = control_dims_;
  double z = mean_raw[p] + std::exp(log_std_[p]) * normal(rng);
  z = std::clamp(z, -kMaxLogit, kMaxLogit);
  out.action.priority = sigmoid(z);
  if (!out.action.control.allFinite() || !std::isfinite(out.action.priority)) {
    throw NumericError("sampled action is non-finite");
  }
  // Same code path as re-evaluation, so stored and recomputed densities agree bitwise.
  out.log_prob = log_prob_and_entropy(mean_raw, out.action, scope).log_prob;
  return out;
}

AgentAction GaussianPolicyHead::mean_action(const Eigen::Ref<const Eigen::VectorXd>& mean_raw) const {
  check_mean(mean_raw);
  AgentAction a;
  a.control = mean_raw.head(control_dims_);
  a.priority = sigmoid(std::clamp(mean_raw[control_dims_], -kMaxLogit, kMaxLogit));
  return a;
}

LogProbEntropy GaussianPolicyHead::log_prob_and_entropy(const Eigen::Ref<const Eigen::VectorXd>& mean_raw,
                                                        const AgentAction& action,
                                                        ActionScope scope) const {
  check_mean(mean_raw);
  if (action.control.size() != control_dims_) throw ConfigError("action control size mismatch");
  double lp = 0.0;
  for (int d = 0; d < control_dims_; ++d) {
    const double u = (action.control[d] - mean_raw[d]) * std::exp(-log_std_[d]);
    lp += -0.5 * u * u - log_std_[d] - kHalfLog2Pi;
  }
  if (scope == ActionScope::ControlAndPriority) {
    const int p = control_dims_;
    const double a = action.priority;
    const double z = logit(a);
    const double u = (z - mean_raw[p]) * std::exp(-log_std_[p]);
    lp += -0.5 * u * u - log_std_[p] - kHalfLog2Pi;
    lp -= std::log(a) + std::log1p(-a);
  }
  if (!std::isfinite(lp)) throw NumericError("log-probability is non-finite");
  return {lp, entropy(scope)};
}

double GaussianPolicyHead::log_prob_gradients(const Eigen::Ref<const Eigen::VectorXd>& mean_raw,
                                              const AgentAction& action, ActionScope scope,
                                              Eigen::Ref<Eigen::VectorXd> d_mean,
                                              Eigen::Ref<Eigen::VectorXd> d_log_std) const {
  check_mean(mean_raw);
  d_mean.setZero();
  d_log_std.setZero();
  const int dims = scope_dims(control_dims_, scope);
  for (int d = 0; d < dims; ++d) {
    const double x = d < control_dims_ ? action.control[d] : logit(action.priority);
    const double inv_var = std::exp(-2.0 * log_std_[d]);
    const double diff = x - mean_raw[d];
    d_mean[d] = diff * inv_var;
    d_log_std[d] = diff * diff * inv_var - 1.0;
  }
  return log_prob_and_entropy(mean_raw, action, scope).log_prob;
}

double GaussianPolicyHead::entropy(ActionScope scope) const {
  const int dims = scope_dims(control_dims_, scope);
  return log_std_.head(dims).sum() + dims * (0.5 + kHalfLog2Pi);
}

}  // namespace pmarl::nn
