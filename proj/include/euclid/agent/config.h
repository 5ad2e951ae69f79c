#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "euclid/intrinsic/explorer.h"
#include "euclid/mcl/policy_ensemble.h"
#include "euclid/model/losses.h"
#include "euclid/model/world_model.h"
#include "euclid/planner/planner.h"

namespace euclid {

// Every run setting. Text form is one `key = value` per line; `#` starts a
// comment. Defaults are the desk-scale values; see DescribeConfigKeys().
struct RunConfig {
  std::string env = "pointmass";
  std::string task = "reach_ne";
  std::string explorer = "disagreement";
  std::uint64_t seed = 0;
  int episode_length = 0;  // 0: environment default
  int action_repeat = 1;

  std::int64_t pt_steps = 20000;
  std::int64_t ft_steps = 10000;
  std::int64_t pt_seed_steps = 0;
  std::int64_t ft_seed_steps = 4000;
  double pt_lr = 1e-4;
  double ft_lr = 1e-3;
  double explorer_lr = 1e-4;
  int update_every = 1;
  std::int64_t replay_capacity = 1000000;
  double explore_std = 0.2;

  int batch_size = 256;
  int rollout_horizon = 5;
  double reward_coef = 0.5;
  double consistency_coef = 2.0;
  double value_coef = 0.1;
  double gamma = 0.99;
  double horizon_rho = 1.0;
  int latent_dim = 16;
  int hidden_dim = 128;
  int encoder_hidden_dim = 128;
  int actor_hidden_dim = 128;
  int target_period = 2;
  double target_blend = 0.01;

  bool use_mcl = true;
  int num_heads = 4;
  double alpha = 0.1;
  std::int64_t snapshot_interval = 0;  // 0: pt_steps / num_heads

  int explorer_hidden_dim = 128;
  int ensemble_size = 5;
  int knn_k = 12;
  int skill_dim = 16;
  int skill_period = 50;

  int plan_iterations = 6;
  int plan_horizon = 5;
  int plan_population = 128;
  int plan_elites = 8;
  double plan_policy_fraction = 0.05;
  double plan_temperature = 0.5;
  double plan_min_std = 0.05;
  double plan_init_std = 0.5;
  double plan_policy_jitter = 0.05;

  bool reuse_encoder = true;
  bool reuse_dynamics = true;
  bool reuse_reward = true;
  bool reuse_critic = true;
  bool reuse_actor = true;

  int eval_episodes = 5;
  bool eval_fixed_start = false;
  std::int64_t metrics_interval = 500;
  bool log_wall_clock = false;

  // Throws ConfigError naming the key for unknown keys or bad values.
  void Set(const std::string& key, const std::string& value);
  // `key=value`; throws ConfigError naming the token if there is no '='.
  void SetAssignment(const std::string& assignment);
  void LoadFile(const std::string& path);
  void Parse(const std::string& text, const std::string& source = "<config>");
  std::string ToText() const;
  void Validate() const;

  std::int64_t ResolvedSnapshotInterval() const;
  WorldModelConfig ModelConfig(int state_dim, int action_dim) const;
  LossWeights Weights() const;
  PlannerConfig Planner() const;
  MCLConfig Mcl() const;
  ExplorerConfig Explorer(int latent_dim, int action_dim, double lr) const;
};

struct ConfigKeyDoc {
  std::string key;
  std::string description;
};
std::vector<ConfigKeyDoc> DescribeConfigKeys();

}  // namespace euclid
