#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "euclid/agent/config.h"

namespace euclid::testing {

// Fresh scratch directory under the system temp dir.
inline std::string ScratchDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("euclid_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

inline std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small enough that a pre-train + fine-tune pair runs in about a second.
inline RunConfig TinyConfig() {
  RunConfig c;
  c.env = "pointmass";
  c.task = "reach_ne";
  c.episode_length = 50;
  c.pt_steps = 300;
  c.ft_steps = 400;
  c.ft_seed_steps = 250;
  c.batch_size = 16;
  c.rollout_horizon = 2;
  c.latent_dim = 4;
  c.hidden_dim = 16;
  c.encoder_hidden_dim = 16;
  c.actor_hidden_dim = 16;
  c.explorer_hidden_dim = 16;
  c.num_heads = 4;
  c.ensemble_size = 3;
  c.knn_k = 4;
  c.skill_dim = 4;
  c.skill_period = 20;
  c.plan_population = 16;
  c.plan_elites = 4;
  c.plan_iterations = 2;
  c.plan_horizon = 2;
  c.eval_episodes = 2;
  c.metrics_interval = 100;
  return c;
}

}  // namespace euclid::testing
