#pragma once

#include <optional>
#include <string>
#include <vector>

#include "euclid/agent/config.h"
#include "euclid/agent/metrics.h"
#include "euclid/mcl/policy_ensemble.h"

namespace euclid {

// Every run writes under `out_dir` (created if absent):
//   metrics.csv  fixed-header metrics, byte-deterministic unless
//                log_wall_clock is set
//   timing.csv   phase,step,wall_ms (real elapsed time)
//   config.txt   resolved configuration
//   pt.ckpt / ft.ckpt
struct PretrainResult {
  std::string checkpoint;
  int snapshots = 0;
  std::vector<MetricsRow> rows;
};

struct FinetuneResult {
  std::string checkpoint;
  int selected_head = 0;
  std::vector<double> selection_returns;  // empty when no selection ran
  std::vector<double> train_returns;      // completed training episodes
  std::vector<double> eval_returns;       // final evaluation episodes
  ReturnStats eval;
  std::int64_t updates = 0;
  std::int64_t planner_calls = 0;
  std::vector<MetricsRow> rows;
};

struct EvaluateResult {
  std::vector<double> returns;
  ReturnStats stats;
};

// Reward-free pre-training. The checkpoint holds the world model, live
// actor, policy snapshots and explorer state.
PretrainResult Pretrain(const RunConfig& config, const std::string& out_dir);

// Fine-tuning on config.task. Without a checkpoint every component starts
// fresh (same as all reuse flags false).
FinetuneResult Finetune(const RunConfig& config,
                        const std::optional<std::string>& checkpoint,
                        const std::string& out_dir);

// Planning episodes without training or noise, from a fine-tuning (or
// pre-training) checkpoint.
EvaluateResult Evaluate(const RunConfig& config, const std::string& checkpoint,
                        int episodes, const std::string& out_dir);

// Zero-shot head selection on config.task from a pre-training checkpoint.
HeadSelection SelectHeadFromCheckpoint(const RunConfig& config,
                                       const std::string& checkpoint,
                                       const std::string& out_dir);

}  // namespace euclid
