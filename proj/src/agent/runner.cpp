#include "euclid/agent/runner.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>

#include "euclid/common/error.h"
#include "euclid/env/env.h"
#include "euclid/intrinsic/explorer.h"
#include "euclid/model/losses.h"
#include "euclid/planner/planner.h"
#include "euclid/replay/replay_buffer.h"

namespace euclid {
namespace {

// Random streams; each phase uses its own block.
enum Stream : std::uint64_t {
  kInit = 1,
  kEnv = 2,
  kNoise = 3,
  kReplay = 4,
  kExplorer = 5,
  kPlanner = 6,
  kSelect = 7,
};
constexpr std::uint64_t kPtBlock = 0;
constexpr std::uint64_t kFtBlock = 100;
constexpr std::uint64_t kEvalBlock = 200;

std::uint64_t StreamSeed(const RunConfig& c, std::uint64_t block, Stream s) {
  return DeriveSeed(c.seed, block + s);
}

using Clock = std::chrono::steady_clock;

class RunLog {
 public:
  RunLog(const RunConfig& config, const std::string& out_dir)
      : log_wall_(config.log_wall_clock), start_(Clock::now()) {
    std::filesystem::create_directories(out_dir);
    metrics_ = std::make_unique<MetricsWriter>(out_dir + "/metrics.csv");
    timing_.open(out_dir + "/timing.csv");
    timing_ << "phase,step,wall_ms\n";
    std::ofstream(out_dir + "/config.txt") << config.ToText();
  }

  void Write(MetricsRow row) {
    const double ms =
        std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    timing_ << row.phase << ',' << row.step << ',' << ms << '\n';
    row.wall_ms = log_wall_ ? ms : 0.0;
    metrics_->Write(row);
  }

  const std::vector<MetricsRow>& rows() const { return metrics_->rows(); }

 private:
  bool log_wall_;
  Clock::time_point start_;
  std::unique_ptr<MetricsWriter> metrics_;
  std::ofstream timing_;
};

// Running means over one metrics window.
struct Window {
  double reward = 0, consistency = 0, value = 0, actor = 0, intrinsic = 0;
  int updates = 0;
  std::vector<double> returns;

  void Add(const ModelLossTerms& m, double actor_loss, double intrinsic_mean) {
    reward += m.reward;
    consistency += m.consistency;
    value += m.value;
    actor += actor_loss;
    intrinsic += intrinsic_mean;
    ++updates;
  }

  MetricsRow Row(const std::string& phase, std::int64_t step, const std::string& task,
                 bool with_intrinsic) const {
    MetricsRow r;
    r.phase = phase;
    r.step = step;
    r.task = task;
    if (!returns.empty()) {
      double s = 0;
      for (double x : returns) s += x;
      r.episode_return = s / static_cast<double>(returns.size());
    }
    if (updates > 0) {
      r.loss_reward = reward / updates;
      r.loss_consistency = consistency / updates;
      r.loss_value = value / updates;
      r.loss_actor = actor / updates;
      if (with_intrinsic) r.intrinsic_mean = intrinsic / updates;
    }
    return r;
  }
};

Vector ClipAction(Vector a) { return a.cwiseMax(-1.0).cwiseMin(1.0); }

Vector AddNoise(const Vector& a, double std, Rng& rng) {
  Vector out = a;
  if (std > 0) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += std * Gaussian(rng);
  }
  return ClipAction(out);
}

Matrix SkillColumn(int condition_dim, int skill) {
  if (condition_dim == 0) return Matrix(0, 1);
  return OneHot({skill}, condition_dim);
}

// All components of one agent, built from the config and environment dims.
struct Agent {
  Agent(const RunConfig& c, std::uint64_t init_seed)
      : config(c),
        env(MakeEnv(c.env, c.episode_length, c.action_repeat)),
        kind(ParseExplorerKind(c.explorer)),
        init_rng(init_seed),
        model(c.ModelConfig(env->spec().state_dim, env->spec().action_dim), init_rng) {
    condition_dim = kind == ExplorerKind::kDiayn ? c.skill_dim : 0;
    actor = Actor(c.latent_dim, condition_dim, env->spec().action_dim,
                  c.actor_hidden_dim, init_rng);
    explorer = MakeExplorer(
        kind, c.Explorer(c.latent_dim, env->spec().action_dim, c.explorer_lr), init_rng);
  }

  int state_dim() const { return env->spec().state_dim; }
  int action_dim() const { return env->spec().action_dim; }

  const RunConfig& config;
  std::unique_ptr<Env> env;
  ExplorerKind kind;
  Rng init_rng;
  WorldModel model;
  Actor actor;
  std::unique_ptr<Explorer> explorer;
  int condition_dim = 0;
};

// ---------------------------------------------------------------- checkpoint

void WriteCheckpoint(const Agent& a, const PolicyEnsemble& ensemble,
                     const std::string& phase, int selected_head,
                     const std::string& path) {
  TensorArchive ar;
  ar.PutString("meta/env", a.config.env);
  ar.PutString("meta/phase", phase);
  ar.PutString("meta/explorer", a.config.explorer);
  ar.PutString("meta/task", a.config.task);
  ar.PutString("meta/config", a.config.ToText());
  ar.PutScalar("meta/state_dim", a.state_dim());
  ar.PutScalar("meta/action_dim", a.action_dim());
  ar.PutScalar("meta/num_heads", a.model.num_heads());
  ar.PutScalar("meta/latent_dim", a.config.latent_dim);
  ar.PutScalar("meta/hidden_dim", a.config.hidden_dim);
  ar.PutScalar("meta/encoder_hidden_dim", a.config.encoder_hidden_dim);
  ar.PutScalar("meta/actor_hidden_dim", a.config.actor_hidden_dim);
  ar.PutScalar("meta/condition_dim", a.condition_dim);
  ar.PutScalar("meta/use_mcl", a.config.use_mcl ? 1 : 0);
  ar.PutScalar("meta/selected_head", selected_head);
  a.model.ExportTo(ar, "model");
  a.actor.params().ExportTo(ar, "actor");
  ensemble.ExportTo(ar, "ensemble");
  if (phase == "pt") a.explorer->ExportTo(ar, "explorer");
  ar.Write(path);
}

void ExpectMeta(const TensorArchive& ar, const std::string& key, double want) {
  const double got = ar.GetScalar("meta/" + key);
  if (got != want) {
    throw CheckpointError("checkpoint " + key + " = " + std::to_string(got) +
                          " but config needs " + std::to_string(want));
  }
}

TensorArchive LoadCheckpoint(const Agent& a, const std::string& path,
                             const std::optional<std::string>& phase) {
  TensorArchive ar = TensorArchive::Read(path);
  if (!ar.Has("meta/env") || !ar.Has("meta/phase")) {
    throw CheckpointError("'" + path + "' is not a run checkpoint");
  }
  if (ar.GetString("meta/env") != a.config.env) {
    throw CheckpointError("checkpoint env '" + ar.GetString("meta/env") +
                          "' differs from config env '" + a.config.env + "'");
  }
  if (phase && ar.GetString("meta/phase") != *phase) {
    throw CheckpointError("expected a " + *phase + " checkpoint, got phase '" +
                          ar.GetString("meta/phase") + "'");
  }
  ExpectMeta(ar, "state_dim", a.state_dim());
  ExpectMeta(ar, "action_dim", a.action_dim());
  ExpectMeta(ar, "num_heads", a.model.num_heads());
  ExpectMeta(ar, "latent_dim", a.config.latent_dim);
  ExpectMeta(ar, "hidden_dim", a.config.hidden_dim);
  ExpectMeta(ar, "encoder_hidden_dim", a.config.encoder_hidden_dim);
  ExpectMeta(ar, "actor_hidden_dim", a.config.actor_hidden_dim);
  ExpectMeta(ar, "condition_dim", a.condition_dim);
  return ar;
}

void LoadActor(Actor& actor, const TensorArchive& ar, const std::string& prefix) {
  ParamStore p = ParamStore::ImportFrom(ar, prefix);
  if (!p.SameLayout(actor.params())) {
    throw CheckpointError("actor architecture differs from checkpoint");
  }
  actor.params() = std::move(p);
}

// ------------------------------------------------------------------- updates

struct UpdateStats {
  ModelLossTerms model;
  double actor = 0.0;
  double intrinsic = 0.0;
};

Matrix StackSteps(const std::vector<Matrix>& steps) {
  Matrix out(steps[0].rows(), steps[0].cols() * static_cast<Eigen::Index>(steps.size()));
  for (std::size_t i = 0; i < steps.size(); ++i) {
    out.middleCols(static_cast<Eigen::Index>(i) * steps[0].cols(), steps[0].cols()) =
        steps[i];
  }
  return out;
}

Matrix StackSkills(const SequenceBatch& b, int condition_dim) {
  if (condition_dim == 0) return Matrix(0, b.size() * b.steps());
  std::vector<int> all;
  for (const auto& s : b.skills) all.insert(all.end(), s.begin(), s.end());
  return OneHot(all, condition_dim);
}

// Model and actor step shared by both phases. `rewards` per step 1 x B.
UpdateStats TrainStep(Agent& a, const SequenceBatch& batch,
                      const std::vector<Matrix>& rewards, int head, double lr,
                      const PolicyEnsemble* diversity_from) {
  const LossWeights weights = a.config.Weights();
  UpdateStats out;
  ModelLossResult m = ModelLoss(a.model, a.actor, weights, batch, rewards, head,
                                a.condition_dim);
  a.model.params().AdamStep(m.grads, lr);
  a.model.tracker().Track(a.model.params());
  out.model = m.terms;

  const Matrix latents = a.model.Encode(StackSteps(batch.states));
  const Matrix condition = StackSkills(batch, a.condition_dim);
  ActorLossResult act;
  if (diversity_from != nullptr) {
    DiversityContext ctx;
    ctx.alpha = a.config.alpha;
    ctx.sigma = diversity_from->sigma();
    if (!diversity_from->empty()) {
      ctx.average_action = diversity_from->AverageAction(latents, condition);
    }
    act = ActorLoss(a.actor, a.model, latents, condition, &ctx);
  } else {
    act = ActorLoss(a.actor, a.model, latents, condition, nullptr);
  }
  a.actor.params().AdamStep(act.grads, lr);
  out.actor = act.total;
  return out;
}

Transition MakeTransition(const Vector& s, const Vector& a, const StepResult& r,
                          int segment, std::int64_t episode, int step, int skill) {
  Transition t;
  t.state = s;
  t.action = a;
  t.reward = r.extrinsic_reward;
  t.next_state = r.next_state;
  t.segment_id = segment;
  t.episode_id = episode;
  t.step_index = step;
  t.skill = skill;
  return t;
}

// Planning-based episode return without training or noise.
double PlanEpisode(const Agent& a, int head, std::uint64_t reset_seed, Rng& planner_rng) {
  const Matrix condition = SkillColumn(a.condition_dim, 0);
  WorldModelPlanning pm(a.model, a.actor, head, condition);
  const PlannerConfig pc = a.config.Planner();
  Vector s = a.env->Reset(reset_seed);
  std::optional<PlanDistribution> warm;
  double ret = 0.0;
  while (!a.env->done()) {
    const Vector z = a.model.Encode(s).col(0);
    PlanResult plan = Plan(pm, pc, z, warm, planner_rng);
    warm = plan.warm_start;
    StepResult r = a.env->Step(plan.action);
    ret += r.extrinsic_reward.value_or(0.0);
    s = r.next_state;
  }
  return ret;
}

std::vector<double> EvaluateAgent(const Agent& a, int head, int episodes) {
  std::vector<double> out;
  const std::uint64_t reset_base = StreamSeed(a.config, kEvalBlock, kEnv);
  const std::uint64_t planner_base = StreamSeed(a.config, kEvalBlock, kPlanner);
  for (int e = 0; e < episodes; ++e) {
    const std::uint64_t idx = a.config.eval_fixed_start ? 0 : static_cast<std::uint64_t>(e);
    Rng planner_rng(DeriveSeed(planner_base, idx));
    out.push_back(PlanEpisode(a, head, DeriveSeed(reset_base, idx), planner_rng));
  }
  return out;
}

void WriteEvalRows(RunLog& log, const RunConfig& c, const std::vector<double>& returns,
                   int head) {
  for (std::size_t i = 0; i < returns.size(); ++i) {
    MetricsRow r;
    r.phase = "eval";
    r.step = static_cast<std::int64_t>(i) + 1;
    r.task = c.task;
    r.episode_return = returns[i];
    r.selected_head = head;
    log.Write(r);
  }
}

}  // namespace

// ---------------------------------------------------------------- pretrain

PretrainResult Pretrain(const RunConfig& config, const std::string& out_dir) {
  config.Validate();
  Agent a(config, StreamSeed(config, kPtBlock, kInit));
  RunLog log(config, out_dir);
  Rng noise_rng(StreamSeed(config, kPtBlock, kNoise));
  Rng replay_rng(StreamSeed(config, kPtBlock, kReplay));
  Rng explorer_rng(StreamSeed(config, kPtBlock, kExplorer));
  const std::uint64_t reset_base = StreamSeed(config, kPtBlock, kEnv);

  const int heads = a.model.num_heads();
  PolicyEnsemble ensemble(heads, config.ResolvedSnapshotInterval(),
                          config.Mcl().sigma);
  ReplayBuffer replay(static_cast<std::size_t>(config.replay_capacity), heads);
  a.env->SetTask(std::nullopt);

  std::int64_t episode = 0;
  int step_in_episode = 0;
  Vector s = a.env->Reset(DeriveSeed(reset_base, 0));
  Window window;
  const int horizon = config.rollout_horizon;

  if (config.use_mcl) ensemble.MaybeSnapshot(0, a.actor);
  for (std::int64_t t = 0; t < config.pt_steps; ++t) {
    if (config.use_mcl) ensemble.MaybeSnapshot(t, a.actor);
    a.explorer->OnEnvStep(t, explorer_rng);
    const int skill = a.explorer->current_skill();
    const Matrix z = a.model.Encode(s);
    const Vector act =
        AddNoise(a.actor.Act(z, SkillColumn(a.condition_dim, skill)).col(0),
                 config.explore_std, noise_rng);
    StepResult r = a.env->Step(act);
    const int segment = config.use_mcl ? ensemble.current_segment() : 0;
    replay.Push(MakeTransition(s, act, r, segment, episode, step_in_episode, skill));
    ++step_in_episode;
    s = r.next_state;
    if (r.done) {
      ++episode;
      step_in_episode = 0;
      s = a.env->Reset(DeriveSeed(reset_base, static_cast<std::uint64_t>(episode)));
    }

    if (t + 1 > config.pt_seed_steps && (t + 1) % config.update_every == 0) {
      // Pick a segment uniformly among those that exist; fall back to the
      // current one if the pick has no complete sequence yet.
      std::optional<int> seg;
      int head = 0;
      if (config.use_mcl) {
        if (ensemble.size() > 1) head = UniformInt(replay_rng, 0, ensemble.size() - 1);
        if (replay.CountStarts(horizon, head) == 0) head = ensemble.current_segment();
        seg = head;
      }
      if (replay.CountStarts(horizon, seg) > 0) {
        SequenceBatch batch =
            replay.SampleSequences(config.batch_size, horizon, seg, replay_rng);
        std::vector<Matrix> rewards;
        LatentBatch first;
        for (int i = 0; i < batch.steps(); ++i) {
          LatentBatch lb;
          lb.latents = a.model.Encode(batch.states[i]);
          lb.actions = batch.actions[i];
          lb.next_latents = a.model.Encode(batch.next_states[i]);
          lb.skills = batch.skills[i];
          rewards.push_back(a.explorer->Reward(lb));
          if (i == 0) first = std::move(lb);
        }
        const double intrinsic = rewards[0].mean();
        a.explorer->Update(first, explorer_rng);
        UpdateStats u = TrainStep(a, batch, rewards, head, config.pt_lr,
                                  config.use_mcl ? &ensemble : nullptr);
        window.Add(u.model, u.actor, intrinsic);
      }
    }

    if ((t + 1) % config.metrics_interval == 0 || t + 1 == config.pt_steps) {
      log.Write(window.Row("pt", t + 1, "", true));
      window = Window();
    }
  }

  PretrainResult result;
  result.checkpoint = out_dir + "/pt.ckpt";
  WriteCheckpoint(a, ensemble, "pt", 0, result.checkpoint);
  result.snapshots = ensemble.size();
  result.rows = log.rows();
  return result;
}

// ---------------------------------------------------------------- finetune

FinetuneResult Finetune(const RunConfig& config,
                        const std::optional<std::string>& checkpoint,
                        const std::string& out_dir) {
  config.Validate();
  Agent a(config, StreamSeed(config, kFtBlock, kInit));
  a.env->SetTask(config.task);
  RunLog log(config, out_dir);
  Rng noise_rng(StreamSeed(config, kFtBlock, kNoise));
  Rng replay_rng(StreamSeed(config, kFtBlock, kReplay));
  Rng planner_rng(StreamSeed(config, kFtBlock, kPlanner));
  const std::uint64_t reset_base = StreamSeed(config, kFtBlock, kEnv);

  PolicyEnsemble ensemble;
  bool have_ensemble = false;
  if (checkpoint) {
    const TensorArchive ar = LoadCheckpoint(a, *checkpoint, std::string("pt"));
    WorldModel pt = a.model;
    pt.ImportFrom(ar, "model");
    // Values only: optimizer state starts fresh for the new phase.
    auto reuse = [&](const std::string& prefix, bool tracked) {
      a.model.params().CopyValuesFrom(pt.params(), prefix);
      if (tracked) a.model.tracker().mutable_shadow().CopyValuesFrom(pt.target(), prefix);
    };
    if (config.reuse_encoder) reuse(WorldModel::kEncoderPrefix, true);
    if (config.reuse_dynamics) {
      reuse(WorldModel::kBackbonePrefix, false);
      for (int h = 0; h < a.model.num_heads(); ++h) reuse(WorldModel::HeadPrefix(h), false);
    }
    if (config.reuse_reward) reuse(WorldModel::kRewardPrefix, false);
    if (config.reuse_critic) reuse(WorldModel::kCriticPrefix, true);
    ensemble.ImportFrom(ar, "ensemble", a.actor);
    have_ensemble = !ensemble.empty();
    if (config.reuse_actor && !config.use_mcl) {
      Actor live = a.actor;
      LoadActor(live, ar, "actor");
      a.actor.params().CopyValuesFrom(live.params(), "");
    }
  }

  ReplayBuffer replay(static_cast<std::size_t>(config.replay_capacity), 1);
  FinetuneResult result;
  std::int64_t t = 0;
  std::int64_t episode = 0;
  int head = 0;

  const bool select = checkpoint && config.use_mcl && have_ensemble &&
                      (config.reuse_actor || config.reuse_dynamics);
  if (select) {
    const std::int64_t needed =
        static_cast<std::int64_t>(std::min(ensemble.size(), a.model.num_heads())) *
        a.env->spec().episode_length;
    if (needed > config.ft_seed_steps || needed > config.ft_steps) {
      throw ConfigError("head selection needs " + std::to_string(needed) +
                        " steps but ft_seed_steps/ft_steps allow fewer");
    }
    HeadSelection sel =
        SelectHead(a.model, ensemble, *a.env,
                   StreamSeed(config, kFtBlock, kSelect), SkillColumn(a.condition_dim, 0));
    head = sel.head;
    result.selection_returns = sel.returns;
    for (auto& ep : sel.episodes) {
      for (auto& tr : ep) {
        tr.episode_id = episode;
        replay.Push(std::move(tr));
        ++t;
      }
      ++episode;
    }
    if (config.reuse_actor) {
      a.actor.params().CopyValuesFrom(ensemble.snapshot(head).params(), "");
    }
    MetricsRow row;
    row.phase = "select";
    row.step = t;
    row.task = config.task;
    row.episode_return = sel.returns[static_cast<std::size_t>(head)];
    row.selected_head = head;
    log.Write(row);
  }
  result.selected_head = head;

  const Matrix condition = SkillColumn(a.condition_dim, 0);
  const PlannerConfig pc = config.Planner();
  WorldModelPlanning planning(a.model, a.actor, head, condition);
  Window window;
  int step_in_episode = 0;
  double episode_return = 0.0;
  std::optional<PlanDistribution> warm;
  Vector s = a.env->Reset(DeriveSeed(reset_base, static_cast<std::uint64_t>(episode)));
  for (; t < config.ft_steps; ++t) {
    const bool seeding = t < config.ft_seed_steps;
    Vector act;
    if (seeding) {
      act = a.actor.Act(a.model.Encode(s), condition).col(0);
    } else {
      PlanResult plan = Plan(planning, pc, a.model.Encode(s).col(0), warm, planner_rng);
      warm = plan.warm_start;
      act = plan.action;
      ++result.planner_calls;
    }
    act = AddNoise(act, config.explore_std, noise_rng);
    StepResult r = a.env->Step(act);
    episode_return += *r.extrinsic_reward;
    replay.Push(MakeTransition(s, act, r, 0, episode, step_in_episode, -1));
    ++step_in_episode;
    s = r.next_state;
    if (r.done) {
      result.train_returns.push_back(episode_return);
      window.returns.push_back(episode_return);
      episode_return = 0.0;
      ++episode;
      step_in_episode = 0;
      warm.reset();
      s = a.env->Reset(DeriveSeed(reset_base, static_cast<std::uint64_t>(episode)));
    }

    if (!seeding && (t + 1) % config.update_every == 0 &&
        replay.CountStarts(config.rollout_horizon, std::nullopt) > 0) {
      SequenceBatch batch = replay.SampleSequences(config.batch_size,
                                                   config.rollout_horizon,
                                                   std::nullopt, replay_rng);
      UpdateStats u = TrainStep(a, batch, batch.rewards, head, config.ft_lr, nullptr);
      window.Add(u.model, u.actor, 0.0);
      ++result.updates;
    }

    if ((t + 1) % config.metrics_interval == 0 || t + 1 == config.ft_steps) {
      MetricsRow row = window.Row("ft", t + 1, config.task, false);
      row.selected_head = head;
      log.Write(row);
      window = Window();
    }
  }

  result.checkpoint = out_dir + "/ft.ckpt";
  WriteCheckpoint(a, ensemble, "ft", head, result.checkpoint);
  if (config.eval_episodes > 0) {
    result.eval_returns = EvaluateAgent(a, head, config.eval_episodes);
    result.eval = SummarizeReturns(result.eval_returns);
    WriteEvalRows(log, config, result.eval_returns, head);
  }
  result.rows = log.rows();
  return result;
}

// ---------------------------------------------------------------- evaluate

EvaluateResult Evaluate(const RunConfig& config, const std::string& checkpoint,
                        int episodes, const std::string& out_dir) {
  config.Validate();
  if (episodes < 1) throw ConfigError("evaluate needs at least one episode");
  Agent a(config, StreamSeed(config, kEvalBlock, kInit));
  const TensorArchive ar = LoadCheckpoint(a, checkpoint, std::nullopt);
  a.model.ImportFrom(ar, "model");
  LoadActor(a.actor, ar, "actor");
  const int head = static_cast<int>(ar.GetScalar("meta/selected_head"));
  a.env->SetTask(config.task);
  RunLog log(config, out_dir);
  EvaluateResult result;
  result.returns = EvaluateAgent(a, head, episodes);
  result.stats = SummarizeReturns(result.returns);
  WriteEvalRows(log, config, result.returns, head);
  return result;
}

HeadSelection SelectHeadFromCheckpoint(const RunConfig& config,
                                       const std::string& checkpoint,
                                       const std::string& out_dir) {
  config.Validate();
  Agent a(config, StreamSeed(config, kFtBlock, kInit));
  const TensorArchive ar = LoadCheckpoint(a, checkpoint, std::string("pt"));
  a.model.ImportFrom(ar, "model");
  PolicyEnsemble ensemble;
  ensemble.ImportFrom(ar, "ensemble", a.actor);
  if (ensemble.empty()) throw ConfigError("checkpoint has no policy snapshots");
  a.env->SetTask(config.task);
  RunLog log(config, out_dir);
  HeadSelection sel = SelectHead(a.model, ensemble, *a.env,
                                 StreamSeed(config, kFtBlock, kSelect),
                                 SkillColumn(a.condition_dim, 0));
  std::int64_t steps = 0;
  for (const auto& ep : sel.episodes) steps += static_cast<std::int64_t>(ep.size());
  MetricsRow row;
  row.phase = "select";
  row.step = steps;
  row.task = config.task;
  row.episode_return = sel.returns[static_cast<std::size_t>(sel.head)];
  row.selected_head = sel.head;
  log.Write(row);
  return sel;
}

}  // namespace euclid
