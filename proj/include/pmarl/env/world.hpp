#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <vector>

#include "pmarl/common/rng.hpp"

namespace pmarl::env {

enum class Task { Coverage, Formation };

std::string to_string(Task task);
/// "coverage" | "formation"; ConfigError otherwise.
Task parse_task(const std::string& name);

struct EnvConfig {
  Task task = Task::Coverage;
  int n_agents = 3;
  int n_landmarks = 3;
  int episode_length = 50;
  double dt = 0.1;
  double damping = 0.25;
  /// Acceleration per unit action (particle-environment "sensitivity").
  double accel_gain = 5.0;
  double max_speed = 1.0;
  double world_half = 1.5;
  /// Landmarks are sampled in [-landmark_half, landmark_half]^2.
  double landmark_half = 1.0;
  /// Std of Gaussian process noise added to velocities each step.
  double noise_std = 0.0;
  double formation_radius = 0.5;
  double angle_weight = 1.0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Length of one agent's local observation.
  int obs_dim() const;
};

using Vec2 = Eigen::Vector2d;

struct WorldState {
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;
  std::vector<Vec2> landmarks;
  int step = 0;
};

using Observation = Eigen::VectorXd;
using JointObservation = std::vector<Observation>;

struct StepResult {
  JointObservation observations;
  /// Shared control reward, identical for every agent.
  double reward = 0.0;
  bool done = false;
};

/// Local observation of one agent: [p (2), v (2), landmark_j - p (2 per landmark)].
Observation observe(const EnvConfig& config, const WorldState& state, int agent);

/// -(1/M) * sum over landmarks of the distance to the nearest agent.
double coverage_reward(const WorldState& state);

/// Negative mean radial error to `radius` around landmark 0, minus
/// angle_weight times the mean absolute deviation of the sorted polar-angle
/// gaps from 2*pi/N. An agent exactly on the landmark has polar angle 0.
double formation_reward(const WorldState& state, double radius = 0.5, double angle_weight = 1.0);

double shared_reward(const EnvConfig& config, const WorldState& state);

/// [p.x, p.y, v.x, v.y] of one agent: what it broadcasts when granted a slot.
std::array<double, 4> broadcast_payload(const WorldState& state, int agent);

/// Damped double integrator on a box. Agents and landmarks are resampled at
/// every reset; landmarks stay fixed within an episode.
class Environment {
 public:
  explicit Environment(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  const WorldState& state() const { return state_; }
  /// Direct state access for tests and agent relabelling.
  WorldState& mutable_state() { return state_; }

  JointObservation reset(Rng& rng);

  /// Actions are clipped to [-1, 1]^2 before integration. Throws InputError
  /// for a non-finite action, a wrong action count, or stepping a finished
  /// episode.
  StepResult step(std::span<const Vec2> actions, Rng& rng);

  JointObservation observe_all() const;
  bool done() const { return state_.step >= config_.episode_length; }

 private:
  EnvConfig config_;
  WorldState state_;
};

}  // namespace pmarl::env
