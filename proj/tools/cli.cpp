#include "euclid/cli/cli.h"

#include <CLI11.hpp>
#include <iostream>

#include "euclid/agent/runner.h"
#include "euclid/cli/plots.h"
#include "euclid/common/error.h"

namespace euclid {
namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string checkpoint;
  std::optional<std::int64_t> steps;
  std::string env, task, explorer;
  std::vector<std::string> sets;
  std::vector<std::string> metrics;
};

void AddRunFlags(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "key=value config file");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory")->required();
  cmd->add_option("--env", o.env, "environment id");
  cmd->add_option("--task", o.task, "downstream task");
  cmd->add_option("--explorer", o.explorer, "disagreement | apt | diayn");
  cmd->add_option("--set", o.sets, "override, key=value (repeatable)");
}

RunConfig BuildConfig(const Options& o) {
  RunConfig c;
  if (!o.config_path.empty()) c.LoadFile(o.config_path);
  if (!o.env.empty()) c.env = o.env;
  if (!o.task.empty()) c.task = o.task;
  if (!o.explorer.empty()) c.explorer = o.explorer;
  for (const auto& s : o.sets) c.SetAssignment(s);
  if (o.seed) c.seed = *o.seed;
  return c;
}

std::string KeyList() {
  std::string s = "\nConfig keys (--set key=value or one per line in --config):\n";
  for (const auto& d : DescribeConfigKeys()) {
    s += "  " + d.key + std::string(d.key.size() < 22 ? 22 - d.key.size() : 1, ' ') +
         d.description + "\n";
  }
  return s;
}

}  // namespace

int RunCli(const std::vector<std::string>& args) {
  CLI::App app{"Unsupervised pre-training and fine-tuning with a multi-head world model",
               "euclid"};
  app.require_subcommand(1, 1);
  app.footer(KeyList());
  Options o;

  auto* pretrain = app.add_subcommand("pretrain", "reward-free pre-training");
  AddRunFlags(pretrain, o);
  pretrain->add_option("--steps", o.steps, "pre-training steps (pt_steps)");

  auto* finetune = app.add_subcommand("finetune", "fine-tune a pre-trained checkpoint");
  AddRunFlags(finetune, o);
  finetune->add_option("--checkpoint", o.checkpoint, "pre-training checkpoint")->required();
  finetune->add_option("--steps", o.steps, "fine-tuning steps (ft_steps)");

  auto* evaluate = app.add_subcommand("evaluate", "planning episodes without training");
  AddRunFlags(evaluate, o);
  evaluate->add_option("--checkpoint", o.checkpoint, "run checkpoint")->required();
  evaluate->add_option("--steps", o.steps, "episodes (default eval_episodes)");

  auto* select = app.add_subcommand("select-head", "zero-shot head selection");
  AddRunFlags(select, o);
  select->add_option("--checkpoint", o.checkpoint, "pre-training checkpoint")->required();

  auto* plot = app.add_subcommand("plot", "emit curve data and a plotting script");
  plot->add_option("--metrics", o.metrics, "metrics CSV (repeatable, one per seed)")
      ->required();
  plot->add_option("--out", o.out, "output directory")->required();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  RunConfig config;
  try {
    if (!plot->parsed()) {
      config = BuildConfig(o);
      if (o.steps) {
        if (pretrain->parsed()) config.pt_steps = *o.steps;
        if (finetune->parsed()) config.ft_steps = *o.steps;
        if (evaluate->parsed()) config.eval_episodes = static_cast<int>(*o.steps);
      }
      config.Validate();
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (pretrain->parsed()) {
      const PretrainResult r = Pretrain(config, o.out);
      std::cout << "pretrain: " << r.snapshots << " snapshots, checkpoint " << r.checkpoint
                << "\n";
    } else if (finetune->parsed()) {
      const FinetuneResult r = Finetune(config, o.checkpoint, o.out);
      std::cout << "finetune: head " << r.selected_head << ", eval return " << r.eval.mean
                << " +- " << r.eval.half_width << ", checkpoint " << r.checkpoint << "\n";
    } else if (evaluate->parsed()) {
      const EvaluateResult r = Evaluate(config, o.checkpoint, config.eval_episodes, o.out);
      std::cout << "evaluate: return " << r.stats.mean << " +- " << r.stats.half_width
                << " over " << r.stats.n << " episodes\n";
    } else if (select->parsed()) {
      const HeadSelection s = SelectHeadFromCheckpoint(config, o.checkpoint, o.out);
      std::cout << "select-head: head " << s.head << ", returns";
      for (double r : s.returns) std::cout << ' ' << r;
      std::cout << "\n";
    } else if (plot->parsed()) {
      const PlotOutput p = EmitPlots(o.metrics, o.out);
      std::cout << "plot: wrote " << p.data << " and " << p.script << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace euclid
