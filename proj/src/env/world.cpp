#include "pmarl/env/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "pmarl/common/error.hpp"

namespace pmarl::env {

std::string to_string(Task task) { return task == Task::Coverage ? "coverage" : "formation"; }

Task parse_task(const std::string& name) {
  if (name == "coverage") return Task::Coverage;
  if (name == "formation") return Task::Formation;
  throw ConfigError("env.task: unknown task '" + name + "' (expected coverage|formation)");
}

void EnvConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(n_agents >= 2, "env.n_agents must be >= 2");
  if (task == Task::Coverage) require(n_landmarks >= 1, "env.n_landmarks must be >= 1 for coverage");
  if (task == Task::Formation) require(n_landmarks == 1, "env.n_landmarks must be 1 for formation");
  require(episode_length >= 1, "env.episode_length must be >= 1");
  require(dt > 0.0 && std::isfinite(dt), "env.dt must be positive");
  require(damping >= 0.0 && damping <= 1.0, "env.damping must be in [0, 1]");
  require(accel_gain > 0.0 && std::isfinite(accel_gain), "env.accel_gain must be positive");
  require(max_speed > 0.0 && std::isfinite(max_speed), "env.max_speed must be positive");
  require(world_half > 0.0 && std::isfinite(world_half), "env.world_half must be positive");
  require(landmark_half > 0.0 && landmark_half <= world_half, "env.landmark_half must be in (0, world_half]");
  require(noise_std >= 0.0 && std::isfinite(noise_std), "env.noise_std must be >= 0");
  require(formation_radius > 0.0, "env.formation_radius must be positive");
  require(angle_weight >= 0.0, "env.angle_weight must be >= 0");
}

int EnvConfig::obs_dim() const { return 4 + 2 * n_landmarks; }

Observation observe(const EnvConfig& config, const WorldState& state, int agent) {
  Observation o(config.obs_dim());
  const Vec2& p = state.positions[agent];
  o.segment<2>(0) = p;
  o.segment<2>(2) = state.velocities[agent];
  for (int j = 0; j < config.n_landmarks; ++j) o.segment<2>(4 + 2 * j) = state.landmarks[j] - p;
  return o;
}

double coverage_reward(const WorldState& state) {
  double total = 0.0;
  for (const Vec2& l : state.landmarks) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const Vec2& p : state.positions) nearest = std::min(nearest, (l - p).norm());
    total += nearest;
  }
  return -total / static_cast<double>(state.landmarks.size());
}

double formation_reward(const WorldState& state, double radius, double angle_weight) {
  const Vec2& centre = state.landmarks.at(0);
  const auto n = static_cast<double>(state.positions.size());
  double radial = 0.0;
  std::vector<double> angles;
  angles.reserve(state.positions.size());
  for (const Vec2& p : state.positions) {
    const Vec2 d = p - centre;
    radial += std::abs(d.norm() - radius);
    const bool on_centre = d.x() == 0.0 && d.y() == 0.0;
    double a = on_centre ? 0.0 : std::atan2(d.y(), d.x());
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    angles.push_back(a);
  }
  std::sort(angles.begin(), angles.end());
  const double ideal = 2.0 * std::numbers::pi / n;
  double angular = 0.0;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const double gap = k + 1 < angles.size() ? angles[k + 1] - angles[k]
                                             : angles.front() + 2.0 * std::numbers::pi - angles.back();
    angular += std::abs(gap - ideal);
  }
  return -radial / n - angle_weight * angular / n;
}

double shared_reward(const EnvConfig& config, const WorldState& state) {
  return config.task == Task::Coverage ? coverage_reward(state)
                                       : formation_reward(state, config.formation_radius, config.angle_weight);
}

std::array<double, 4> broadcast_payload(const WorldState& state, int agent) {
  if (agent < 0 || agent >= static_cast<int>(state.positions.size())) {
    throw InputError("broadcast_payload: agent index " + std::to_string(agent) + " out of range");
  }
  const Vec2& p = state.positions[agent];
  const Vec2& v = state.velocities[agent];
  return {p.x(), p.y(), v.x(), v.y()};
}

Environment::Environment(EnvConfig config) : config_(config) {
  config_.validate();
  state_.positions.assign(config_.n_agents, Vec2::Zero());
  state_.velocities.assign(config_.n_agents, Vec2::Zero());
  state_.landmarks.assign(config_.n_landmarks, Vec2::Zero());
}

JointObservation Environment::reset(Rng& rng) {
  std::uniform_real_distribution<double> landmark(-config_.landmark_half, config_.landmark_half);
  std::uniform_real_distribution<double> agent(-config_.world_half, config_.world_half);
  for (auto& l : state_.landmarks) {
    const double x = landmark(rng);
    l = Vec2(x, landmark(rng));
  }
  for (auto& p : state_.positions) {
    const double x = agent(rng);
    p = Vec2(x, agent(rng));
  }
  for (auto& v : state_.velocities) v.setZero();
  state_.step = 0;
  return observe_all();
}

StepResult Environment::step(std::span<const Vec2> actions, Rng& rng) {
  if (static_cast<int>(actions.size()) != config_.n_agents) {
    throw InputError("step: expected " + std::to_string(config_.n_agents) + " actions, got " +
                     std::to_string(actions.size()));
  }
  if (done()) throw InputError("step: episode is finished, call reset first");
  for (const Vec2& a : actions) {
    if (!a.allFinite()) throw InputError("step: non-finite control action");
  }
  std::normal_distribution<double> noise(0.0, config_.noise_std > 0.0 ? config_.noise_std : 1.0);
  for (int i = 0; i < config_.n_agents; ++i) {
    const Vec2 a = actions[i].cwiseMax(-1.0).cwiseMin(1.0);
    Vec2& v = state_.velocities[i];
    v = (1.0 - config_.damping) * v + config_.accel_gain * config_.dt * a;
    if (config_.noise_std > 0.0) {
      const double nx = noise(rng);
      v += Vec2(nx, noise(rng));
    }
    const double speed = v.norm();
    if (speed > config_.max_speed) v *= config_.max_speed / speed;
    Vec2& p = state_.positions[i];
    p = (p + v * config_.dt).cwiseMax(-config_.world_half).cwiseMin(config_.world_half);
  }
  ++state_.step;
  StepResult out;
  out.observations = observe_all();
  out.reward = shared_reward(config_, state_);
  out.done = done();
  return out;
}

JointObservation Environment::observe_all() const {
  JointObservation obs;
  obs.reserve(config_.n_agents);
  for (int i = 0; i < config_.n_agents; ++i) obs.push_back(observe(config_, state_, i));
  return obs;
}

}  // namespace pmarl::env
