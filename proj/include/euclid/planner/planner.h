#pragma once

#include <optional>
#include <vector>

#include "euclid/common/rng.h"
#include "euclid/model/world_model.h"

namespace euclid {

struct PlannerConfig {
  int iterations = 6;      // J
  int horizon = 5;         // L
  int population = 128;    // N (512 at full scale)
  int elites = 8;          // k (12 at full scale)
  double policy_fraction = 0.05;
  double temperature = 0.5;  // tau
  double gamma = 0.99;
  double min_std = 0.05;
  double init_std = 0.5;
  double policy_jitter = 0.05;  // 0 disables jitter on policy rollouts

  // round-half-up(policy_fraction * population)
  int num_policy() const;
  void Validate() const;  // ConfigError
};

// Per-timestep Gaussian over action sequences; column t is step t.
struct PlanDistribution {
  Matrix mean;  // action_dim x L
  Matrix std;   // action_dim x L
};

// Batched latent model seen by the planner. One column per candidate.
class PlanningModel {
 public:
  virtual ~PlanningModel() = default;
  virtual int latent_dim() const = 0;
  virtual int action_dim() const = 0;
  virtual Matrix Reward(const Matrix& z, const Matrix& a) const = 0;  // 1 x M
  virtual Matrix Next(const Matrix& z, const Matrix& a) const = 0;
  virtual Matrix Policy(const Matrix& z) const = 0;
  // Bootstrap value at the end of the horizon, Q(z, pi(z)).
  virtual Matrix Value(const Matrix& z) const = 0;  // 1 x M
};

// World model with a fixed dynamics head and actor. `condition` is a single
// column broadcast to every candidate (empty when the actor takes none).
class WorldModelPlanning : public PlanningModel {
 public:
  WorldModelPlanning(const WorldModel& model, const Actor& actor, int head,
                     Matrix condition = Matrix());
  int latent_dim() const override { return model_.latent_dim(); }
  int action_dim() const override { return actor_.action_dim(); }
  Matrix Reward(const Matrix& z, const Matrix& a) const override;
  Matrix Next(const Matrix& z, const Matrix& a) const override;
  Matrix Policy(const Matrix& z) const override;
  Matrix Value(const Matrix& z) const override;

 private:
  Matrix Condition(Eigen::Index cols) const;

  const WorldModel& model_;
  const Actor& actor_;
  int head_;
  Matrix condition_;
};

// Action sequences for M candidates: entry t is action_dim x M.
using CandidateSet = std::vector<Matrix>;

// sum_t gamma^t R(z_t, a_t) + gamma^L Value(z_L), z_{t+1} = Next(z_t, a_t).
// Candidates are processed in fixed chunks of kScoreChunk columns, so the
// result does not depend on the thread count.
constexpr int kScoreChunk = 32;
Matrix ScoreCandidates(const PlanningModel& model, const Vector& z0,
                       const CandidateSet& actions, double gamma);
// Same chunking, single thread.
Matrix ScoreCandidatesSerial(const PlanningModel& model, const Vector& z0,
                             const CandidateSet& actions, double gamma);

// Single sequence, actions as action_dim x L.
double ScoreTrajectory(const PlanningModel& model, const Vector& z0,
                       const Matrix& actions, double gamma);

struct PlanResult {
  Vector action;                 // first action of the final mean
  PlanDistribution distribution;  // final mean / std
  PlanDistribution warm_start;   // shifted by one step for the next decision
  Matrix best_sequence;          // top-scoring candidate of the last iteration
  std::vector<double> best_scores;  // best elite score per iteration
  std::vector<int> scored;          // candidates scored per iteration
  std::vector<int> policy_elites;   // elites that came from policy rollouts
};

// Iterative refinement of a Gaussian over action sequences mixed with policy
// rollouts; elites re-weighted by exp(tau * (score - max)). Reads the model
// only; all randomness comes from `rng`.
PlanResult Plan(const PlanningModel& model, const PlannerConfig& config,
                const Vector& z0, const std::optional<PlanDistribution>& warm_start,
                Rng& rng, bool parallel = true);

}  // namespace euclid
