#include "euclid/agent/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "euclid/common/error.h"

namespace euclid {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty()) {
    throw ConfigError("bad value '" + v + "' for key '" + key + "'");
  }
  return out;
}

bool ParseBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("bad value '" + v + "' for key '" + key + "' (expected true/false)");
}

std::string FormatDouble(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Field {
  const char* key;
  const char* doc;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define STR_FIELD(name, doc)                                                   \
  Field{#name, doc,                                                            \
        [](RunConfig& c, const std::string&, const std::string& v) { c.name = v; }, \
        [](const RunConfig& c) { return c.name; }}
#define NUM_FIELD(name, doc)                                                   \
  Field{#name, doc,                                                            \
        [](RunConfig& c, const std::string& k, const std::string& v) {        \
          c.name = ParseNumber<decltype(c.name)>(k, v);                        \
        },                                                                     \
        [](const RunConfig& c) { return std::to_string(c.name); }}
#define REAL_FIELD(name, doc)                                                  \
  Field{#name, doc,                                                            \
        [](RunConfig& c, const std::string& k, const std::string& v) {        \
          c.name = ParseNumber<double>(k, v);                                  \
        },                                                                     \
        [](const RunConfig& c) { return FormatDouble(c.name); }}
#define BOOL_FIELD(name, doc)                                                  \
  Field{#name, doc,                                                            \
        [](RunConfig& c, const std::string& k, const std::string& v) {        \
          c.name = ParseBool(k, v);                                            \
        },                                                                     \
        [](const RunConfig& c) { return std::string(c.name ? "true" : "false"); }}

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      STR_FIELD(env, "environment: pointmass | pendulum | twomode"),
      STR_FIELD(task, "downstream task used in fine-tuning and evaluation"),
      STR_FIELD(explorer, "pre-training reward: disagreement | apt | diayn"),
      NUM_FIELD(seed, "master seed; every random stream derives from it"),
      NUM_FIELD(episode_length, "agent steps per episode, 0 = environment default"),
      NUM_FIELD(action_repeat, "environment steps per agent action"),
      NUM_FIELD(pt_steps, "pre-training environment steps"),
      NUM_FIELD(ft_steps, "fine-tuning environment steps, head selection included"),
      NUM_FIELD(pt_seed_steps, "pre-training steps before the first update"),
      NUM_FIELD(ft_seed_steps, "fine-tuning steps before planning and updates start"),
      REAL_FIELD(pt_lr, "Adam learning rate in pre-training"),
      REAL_FIELD(ft_lr, "Adam learning rate in fine-tuning"),
      REAL_FIELD(explorer_lr, "learning rate of the explorer networks"),
      NUM_FIELD(update_every, "environment steps per gradient update"),
      NUM_FIELD(replay_capacity, "replay buffer size in transitions"),
      REAL_FIELD(explore_std, "Gaussian action noise while collecting data"),
      NUM_FIELD(batch_size, "sequences per gradient update"),
      NUM_FIELD(rollout_horizon, "latent rollout steps in the model loss"),
      REAL_FIELD(reward_coef, "reward loss weight c1"),
      REAL_FIELD(consistency_coef, "latent consistency loss weight c2"),
      REAL_FIELD(value_coef, "value loss weight c3"),
      REAL_FIELD(gamma, "discount factor"),
      REAL_FIELD(horizon_rho, "per-step weight rho^i in the model loss (1 = unweighted)"),
      NUM_FIELD(latent_dim, "latent size"),
      NUM_FIELD(hidden_dim, "hidden width of dynamics, reward and critic nets"),
      NUM_FIELD(encoder_hidden_dim, "hidden width of the encoder"),
      NUM_FIELD(actor_hidden_dim, "hidden width of the actor"),
      NUM_FIELD(target_period, "updates between target network blends"),
      REAL_FIELD(target_blend, "target blend factor"),
      BOOL_FIELD(use_mcl, "false: single head, no snapshots, no diversity term"),
      NUM_FIELD(num_heads, "dynamics heads and policy snapshots"),
      REAL_FIELD(alpha, "weight of the average-policy divergence"),
      NUM_FIELD(snapshot_interval, "steps between snapshots, 0 = pt_steps / num_heads"),
      NUM_FIELD(explorer_hidden_dim, "hidden width of explorer networks"),
      NUM_FIELD(ensemble_size, "disagreement: forward models"),
      NUM_FIELD(knn_k, "apt: neighbours"),
      NUM_FIELD(skill_dim, "diayn: number of skills"),
      NUM_FIELD(skill_period, "diayn: steps between skill resamples"),
      NUM_FIELD(plan_iterations, "planner refinement iterations J"),
      NUM_FIELD(plan_horizon, "planner horizon L"),
      NUM_FIELD(plan_population, "Gaussian samples N per iteration"),
      NUM_FIELD(plan_elites, "elites k"),
      REAL_FIELD(plan_policy_fraction, "policy rollouts as a fraction of N"),
      REAL_FIELD(plan_temperature, "elite weight temperature tau"),
      REAL_FIELD(plan_min_std, "floor on the sampling std"),
      REAL_FIELD(plan_init_std, "sampling std at the start of each decision"),
      REAL_FIELD(plan_policy_jitter, "noise std on policy rollout actions"),
      BOOL_FIELD(reuse_encoder, "fine-tuning starts from the pre-trained encoder"),
      BOOL_FIELD(reuse_dynamics, "... dynamics backbone and heads"),
      BOOL_FIELD(reuse_reward, "... reward predictor"),
      BOOL_FIELD(reuse_critic, "... critic"),
      BOOL_FIELD(reuse_actor, "... actor (snapshot of the selected head)"),
      NUM_FIELD(eval_episodes, "evaluation episodes after fine-tuning / per evaluate call"),
      BOOL_FIELD(eval_fixed_start, "every evaluation episode uses the same seeds"),
      NUM_FIELD(metrics_interval, "environment steps between metrics rows"),
      BOOL_FIELD(log_wall_clock, "write real elapsed time to wall_ms (breaks byte determinism)"),
  };
  return fields;
}

}  // namespace

void RunConfig::Set(const std::string& key, const std::string& value) {
  for (const auto& f : Fields()) {
    if (key == f.key) {
      f.set(*this, key, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::SetAssignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("malformed assignment '" + assignment + "' (expected key=value)");
  }
  Set(Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1)));
}

void RunConfig::Parse(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    try {
      SetAssignment(line);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

void RunConfig::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Parse(ss.str(), path);
}

std::string RunConfig::ToText() const {
  std::string out;
  for (const auto& f : Fields()) out += std::string(f.key) + " = " + f.get(*this) + "\n";
  return out;
}

void RunConfig::Validate() const {
  MakeEnv(env, episode_length, action_repeat);  // throws on unknown env
  ParseExplorerKind(explorer);
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(pt_steps >= 0 && ft_steps >= 0, "step counts must be >= 0");
  require(pt_seed_steps >= 0 && ft_seed_steps >= 0, "seed steps must be >= 0");
  require(pt_lr > 0 && ft_lr > 0 && explorer_lr > 0, "learning rates must be > 0");
  require(update_every >= 1, "update_every must be >= 1");
  require(replay_capacity >= 1, "replay_capacity must be >= 1");
  require(explore_std >= 0, "explore_std must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(rollout_horizon >= 0, "rollout_horizon must be >= 0");
  require(reward_coef >= 0 && consistency_coef >= 0 && value_coef >= 0,
          "loss coefficients must be >= 0");
  require(gamma > 0 && gamma < 1, "gamma must be in (0, 1)");
  require(latent_dim >= 1 && hidden_dim >= 1 && encoder_hidden_dim >= 1 &&
              actor_hidden_dim >= 1 && explorer_hidden_dim >= 1,
          "network sizes must be >= 1");
  require(target_period >= 1 && target_blend > 0 && target_blend <= 1,
          "target_period >= 1 and target_blend in (0, 1] required");
  require(eval_episodes >= 0, "eval_episodes must be >= 0");
  require(metrics_interval >= 1, "metrics_interval must be >= 1");
  Mcl().Validate();
  Planner().Validate();
}

std::int64_t RunConfig::ResolvedSnapshotInterval() const {
  if (snapshot_interval > 0) return snapshot_interval;
  return std::max<std::int64_t>(1, pt_steps / std::max(1, num_heads));
}

WorldModelConfig RunConfig::ModelConfig(int state_dim, int action_dim) const {
  WorldModelConfig c;
  c.state_dim = state_dim;
  c.action_dim = action_dim;
  c.latent_dim = latent_dim;
  c.hidden_dim = hidden_dim;
  c.encoder_hidden_dim = encoder_hidden_dim;
  c.num_heads = use_mcl ? num_heads : 1;
  c.target_period = target_period;
  c.target_blend = target_blend;
  return c;
}

LossWeights RunConfig::Weights() const {
  LossWeights w;
  w.reward = reward_coef;
  w.consistency = consistency_coef;
  w.value = value_coef;
  w.gamma = gamma;
  w.rollout_horizon = rollout_horizon;
  w.horizon_rho = horizon_rho;
  return w;
}

PlannerConfig RunConfig::Planner() const {
  PlannerConfig p;
  p.iterations = plan_iterations;
  p.horizon = plan_horizon;
  p.population = plan_population;
  p.elites = plan_elites;
  p.policy_fraction = plan_policy_fraction;
  p.temperature = plan_temperature;
  p.gamma = gamma;
  p.min_std = plan_min_std;
  p.init_std = plan_init_std;
  p.policy_jitter = plan_policy_jitter;
  return p;
}

MCLConfig RunConfig::Mcl() const {
  MCLConfig m;
  m.num_heads = num_heads;
  m.alpha = alpha;
  m.snapshot_interval = snapshot_interval;
  m.sigma = explore_std > 0 ? explore_std : 0.2;
  return m;
}

ExplorerConfig RunConfig::Explorer(int latent, int action, double lr) const {
  ExplorerConfig e;
  e.latent_dim = latent;
  e.action_dim = action;
  e.hidden_dim = explorer_hidden_dim;
  e.lr = lr;
  e.ensemble_size = ensemble_size;
  e.knn_k = knn_k;
  e.skill_dim = skill_dim;
  e.skill_period = skill_period;
  return e;
}

std::vector<ConfigKeyDoc> DescribeConfigKeys() {
  std::vector<ConfigKeyDoc> out;
  for (const auto& f : Fields()) out.push_back({f.key, f.doc});
  return out;
}

}  // namespace euclid
