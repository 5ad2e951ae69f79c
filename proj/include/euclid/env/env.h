#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "euclid/nn/types.h"

namespace euclid {

struct EnvSpec {
  std::string id;
  int state_dim = 0;
  int action_dim = 0;
  int episode_length = 0;
  int action_repeat = 1;
  std::vector<std::string> tasks;
};

struct StepResult {
  Vector next_state;
  std::optional<double> extrinsic_reward;  // absent in reward-free mode
  bool done = false;
};

// Fixed-horizon control environment. Actions are clipped to [-1, 1] per
// component before use. With no task set the environment is reward-free.
class Env {
 public:
  virtual ~Env() = default;

  const EnvSpec& spec() const { return spec_; }

  Vector Reset(std::uint64_t seed);
  StepResult Step(const Vector& action);

  // nullopt selects reward-free mode.
  void SetTask(std::optional<std::string> task);
  const std::optional<std::string>& task() const { return task_; }

  // Per-underlying-step reward of `task` at the state reached after
  // applying `action`; always in [0, 1].
  double DownstreamReward(const std::string& task, const Vector& state,
                          const Vector& action) const;

  const Vector& state() const { return state_; }
  // Overwrites the current state (same episode bookkeeping).
  void SetState(const Vector& state) { state_ = state; }
  int steps_taken() const { return t_; }
  bool done() const { return t_ >= spec_.episode_length; }

 protected:
  explicit Env(EnvSpec spec);

  virtual Vector SampleInitial(std::uint64_t seed) const = 0;
  virtual Vector Dynamics(const Vector& state, const Vector& action) const = 0;
  virtual double TaskReward(const std::string& task, const Vector& state,
                            const Vector& action) const = 0;

 private:
  void CheckTask(const std::string& task) const;

  EnvSpec spec_;
  std::optional<std::string> task_;
  Vector state_;
  int t_ = 0;
  bool started_ = false;
};

// Planar double integrator. state = (x, y, vx, vy); action = acceleration.
//   v' = v + dt * (a - damping * v),  p' = p + dt * v'
// Positions are confined to [-1, 1]; hitting a wall zeroes that velocity
// component. Tasks reach_{ne,nw,se,sw}: r = max(0, 1 - |p - goal|) with goals
// at (+-0.7, +-0.7).
class PointMassReach : public Env {
 public:
  static constexpr double kDt = 0.05;
  static constexpr double kDamping = 0.1;
  static constexpr double kWall = 1.0;
  static constexpr double kGoal = 0.7;

  explicit PointMassReach(int episode_length = 200, int action_repeat = 1);

 protected:
  Vector SampleInitial(std::uint64_t seed) const override;
  Vector Dynamics(const Vector& state, const Vector& action) const override;
  double TaskReward(const std::string& task, const Vector& state,
                    const Vector& action) const override;
};

// Torque-driven pendulum, theta = 0 upright. state = (cos, sin, theta_dot).
//   theta_dot' = clip(theta_dot + dt * (g / l * sin(theta) + u * max_torque), +-8)
//   theta' = theta + dt * theta_dot'
// Tasks: balance (1 + cos)/2, spin clip(|theta_dot|/8, 0, 1),
// swing_left (1 + sin)/2.
class Pendulum : public Env {
 public:
  static constexpr double kDt = 0.05;
  static constexpr double kGravityOverLength = 10.0;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kMaxSpeed = 8.0;

  explicit Pendulum(int episode_length = 250, int action_repeat = 1);

  static double Angle(const Vector& state);

 protected:
  Vector SampleInitial(std::uint64_t seed) const override;
  Vector Dynamics(const Vector& state, const Vector& action) const override;
  double TaskReward(const std::string& task, const Vector& state,
                    const Vector& action) const override;
};

// Piecewise-linear system with two regions split by the sign of s[0]:
// region A (s[0] >= 0) and region B (s[0] < 0); s' = A_r s + B_r a.
// Tasks mode_a / mode_b pay 1 while the state is in the named region.
class TwoModeLinear : public Env {
 public:
  enum class Region { kA, kB };

  explicit TwoModeLinear(int episode_length = 200, int action_repeat = 1);

  static Region RegionOf(const Vector& state);
  static const Eigen::Matrix2d& StateMatrix(Region region);
  static const Eigen::Matrix2d& ControlMatrix(Region region);

 protected:
  Vector SampleInitial(std::uint64_t seed) const override;
  Vector Dynamics(const Vector& state, const Vector& action) const override;
  double TaskReward(const std::string& task, const Vector& state,
                    const Vector& action) const override;
};

// "pointmass" | "pendulum" | "twomode". episode_length <= 0 keeps the
// environment default.
std::unique_ptr<Env> MakeEnv(const std::string& id, int episode_length = 0,
                             int action_repeat = 1);

}  // namespace euclid
