#pragma once

// 1-D bandit for the planner: R(z, a) = -(a - target)^2, z' = z, Q = 0.
// The policy returns a constant action.

#include "euclid/planner/planner.h"

namespace euclid::testing {

class QuadraticBandit : public PlanningModel {
 public:
  explicit QuadraticBandit(double target = 0.3, double policy_action = 0.0)
      : target_(target), policy_(policy_action) {}
  int latent_dim() const override { return 1; }
  int action_dim() const override { return 1; }
  Matrix Reward(const Matrix&, const Matrix& a) const override {
    return -(a.array() - target_).square().matrix();
  }
  Matrix Next(const Matrix& z, const Matrix&) const override { return z; }
  Matrix Policy(const Matrix& z) const override {
    return Matrix::Constant(1, z.cols(), policy_);
  }
  Matrix Value(const Matrix& z) const override { return Matrix::Zero(1, z.cols()); }

 private:
  double target_;
  double policy_;
};

}  // namespace euclid::testing
