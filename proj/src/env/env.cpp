#include "euclid/env/env.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "euclid/common/error.h"
#include "euclid/common/rng.h"

namespace euclid {

Env::Env(EnvSpec spec) : spec_(std::move(spec)) {
  if (spec_.episode_length <= 0) {
    throw ConfigError("episode_length must be positive");
  }
  if (spec_.action_repeat <= 0) {
    throw ConfigError("action_repeat must be positive");
  }
}

void Env::CheckTask(const std::string& task) const {
  if (std::find(spec_.tasks.begin(), spec_.tasks.end(), task) ==
      spec_.tasks.end()) {
    throw ConfigError("unknown task '" + task + "' for env " + spec_.id);
  }
}

void Env::SetTask(std::optional<std::string> task) {
  if (task) CheckTask(*task);
  task_ = std::move(task);
}

Vector Env::Reset(std::uint64_t seed) {
  state_ = SampleInitial(seed);
  t_ = 0;
  started_ = true;
  return state_;
}

StepResult Env::Step(const Vector& action) {
  if (!started_) throw EpisodeStateError("step() before reset()");
  if (done()) throw EpisodeStateError("step() after episode end; call reset()");
  if (action.size() != spec_.action_dim) {
    throw ShapeError("action has " + std::to_string(action.size()) +
                     " components, expected " +
                     std::to_string(spec_.action_dim));
  }
  const Vector a = action.cwiseMax(-1.0).cwiseMin(1.0);
  double reward = 0.0;
  for (int r = 0; r < spec_.action_repeat; ++r) {
    state_ = Dynamics(state_, a);
    if (task_) reward += TaskReward(*task_, state_, a);
  }
  ++t_;
  StepResult out;
  out.next_state = state_;
  if (task_) out.extrinsic_reward = reward;
  out.done = done();
  return out;
}

double Env::DownstreamReward(const std::string& task, const Vector& state,
                             const Vector& action) const {
  CheckTask(task);
  return TaskReward(task, state, action);
}

// ---------------------------------------------------------------- pointmass

PointMassReach::PointMassReach(int episode_length, int action_repeat)
    : Env(EnvSpec{"pointmass", 4, 2, episode_length, action_repeat,
                  {"reach_ne", "reach_nw", "reach_se", "reach_sw"}}) {}

Vector PointMassReach::SampleInitial(std::uint64_t seed) const {
  Rng rng(seed);
  Vector s = Vector::Zero(4);
  s(0) = Uniform(rng, -0.1, 0.1);
  s(1) = Uniform(rng, -0.1, 0.1);
  return s;
}

Vector PointMassReach::Dynamics(const Vector& state,
                                const Vector& action) const {
  Vector s = state;
  for (int i = 0; i < 2; ++i) {
    double v = s(2 + i) + kDt * (action(i) - kDamping * s(2 + i));
    double p = s(i) + kDt * v;
    if (p > kWall || p < -kWall) {
      p = std::clamp(p, -kWall, kWall);
      v = 0.0;
    }
    s(i) = p;
    s(2 + i) = v;
  }
  return s;
}

double PointMassReach::TaskReward(const std::string& task, const Vector& state,
                                  const Vector&) const {
  double gx = 0.0;
  double gy = 0.0;
  if (task == "reach_ne") {
    gx = kGoal, gy = kGoal;
  } else if (task == "reach_nw") {
    gx = -kGoal, gy = kGoal;
  } else if (task == "reach_se") {
    gx = kGoal, gy = -kGoal;
  } else {
    gx = -kGoal, gy = -kGoal;
  }
  const double dist = std::hypot(state(0) - gx, state(1) - gy);
  return std::max(0.0, 1.0 - dist / 1.0);
}

// ----------------------------------------------------------------- pendulum

Pendulum::Pendulum(int episode_length, int action_repeat)
    : Env(EnvSpec{"pendulum", 3, 1, episode_length, action_repeat,
                  {"balance", "spin", "swing_left"}}) {}

double Pendulum::Angle(const Vector& state) {
  return std::atan2(state(1), state(0));
}

Vector Pendulum::SampleInitial(std::uint64_t seed) const {
  Rng rng(seed);
  const double theta = Uniform(rng, -std::numbers::pi, std::numbers::pi);
  Vector s(3);
  s << std::cos(theta), std::sin(theta), 0.0;
  return s;
}

Vector Pendulum::Dynamics(const Vector& state, const Vector& action) const {
  const double theta = Angle(state);
  double omega = state(2) + kDt * (kGravityOverLength * std::sin(theta) +
                                   action(0) * kMaxTorque);
  omega = std::clamp(omega, -kMaxSpeed, kMaxSpeed);
  const double next = theta + kDt * omega;
  Vector s(3);
  s << std::cos(next), std::sin(next), omega;
  return s;
}

double Pendulum::TaskReward(const std::string& task, const Vector& state,
                            const Vector&) const {
  const double theta = Angle(state);
  if (task == "balance") return (1.0 + std::cos(theta)) / 2.0;
  if (task == "spin") return std::clamp(std::abs(state(2)) / kMaxSpeed, 0.0, 1.0);
  return (1.0 + std::sin(theta)) / 2.0;
}

// ------------------------------------------------------------------ twomode

namespace {

const Eigen::Matrix2d kStateA = (Eigen::Matrix2d() << 0.95, 0.05, 0.0, 0.9).finished();
const Eigen::Matrix2d kStateB = (Eigen::Matrix2d() << 0.9, 0.0, -0.05, 0.95).finished();
const Eigen::Matrix2d kControlA = (Eigen::Matrix2d() << 0.1, 0.0, 0.0, 0.1).finished();
const Eigen::Matrix2d kControlB = (Eigen::Matrix2d() << -0.1, 0.0, 0.0, 0.1).finished();

}  // namespace

TwoModeLinear::TwoModeLinear(int episode_length, int action_repeat)
    : Env(EnvSpec{"twomode", 2, 2, episode_length, action_repeat,
                  {"mode_a", "mode_b"}}) {}

TwoModeLinear::Region TwoModeLinear::RegionOf(const Vector& state) {
  return state(0) >= 0.0 ? Region::kA : Region::kB;
}

const Eigen::Matrix2d& TwoModeLinear::StateMatrix(Region region) {
  return region == Region::kA ? kStateA : kStateB;
}

const Eigen::Matrix2d& TwoModeLinear::ControlMatrix(Region region) {
  return region == Region::kA ? kControlA : kControlB;
}

Vector TwoModeLinear::SampleInitial(std::uint64_t seed) const {
  Rng rng(seed);
  Vector s(2);
  s(0) = Uniform(rng, -0.1, 0.1);
  s(1) = Uniform(rng, -0.1, 0.1);
  return s;
}

Vector TwoModeLinear::Dynamics(const Vector& state,
                               const Vector& action) const {
  const Region r = RegionOf(state);
  return StateMatrix(r) * state + ControlMatrix(r) * action;
}

double TwoModeLinear::TaskReward(const std::string& task, const Vector& state,
                                 const Vector&) const {
  const Region want = task == "mode_a" ? Region::kA : Region::kB;
  return RegionOf(state) == want ? 1.0 : 0.0;
}

std::unique_ptr<Env> MakeEnv(const std::string& id, int episode_length,
                             int action_repeat) {
  if (id == "pointmass") {
    return std::make_unique<PointMassReach>(
        episode_length > 0 ? episode_length : 200, action_repeat);
  }
  if (id == "pendulum") {
    return std::make_unique<Pendulum>(episode_length > 0 ? episode_length : 250,
                                      action_repeat);
  }
  if (id == "twomode") {
    return std::make_unique<TwoModeLinear>(
        episode_length > 0 ? episode_length : 200, action_repeat);
  }
  throw ConfigError("unknown env '" + id + "'");
}

}  // namespace euclid
