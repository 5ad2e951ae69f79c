#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "euclid/cli/cli.h"
#include "euclid/cli/plots.h"
#include "euclid/common/error.h"
#include "support/run_helpers.h"

using namespace euclid;
using testing::ReadFile;
using testing::ScratchDir;

namespace {

struct Captured {
  int code;
  std::string out;
  std::string err;
};

Captured Run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = RunCli(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

std::string TinyConfigFile(const std::string& dir) {
  const std::string path = dir + "/tiny.cfg";
  std::ofstream(path) << testing::TinyConfig().ToText();
  return path;
}

std::string WriteMetrics(const std::string& path, const std::vector<double>& returns) {
  std::ofstream f(path);
  f << "phase,step,task,return,loss_reward,loss_consistency,loss_value,loss_actor,"
       "intrinsic_mean,selected_head,wall_ms\n";
  for (std::size_t i = 0; i < returns.size(); ++i) {
    f << "ft," << 100 * (i + 1) << ",reach_ne," << returns[i] << ",,,,,,,0\n";
  }
  return path;
}

// Rows of curves.csv keyed by step, for phase ft.
std::map<int, std::vector<double>> Curves(const std::string& path) {
  std::map<int, std::vector<double>> rows;
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "phase,task,step,n,mean,ci_low,ci_high");
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 7);
    rows[std::stoi(cells[2])] = {std::stod(cells[3]), std::stod(cells[4]),
                                 std::stod(cells[5]), std::stod(cells[6])};
  }
  return rows;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  const std::string dir = ScratchDir("cli_usage");
  CHECK(Run({}).code == kExitUsage);
  CHECK(Run({"train"}).code == kExitUsage);
  CHECK(Run({"pretrain", "--out", dir, "--bogus"}).code == kExitUsage);
  CHECK(Run({"pretrain"}).code == kExitUsage);  // --out missing
  CHECK(Run({"finetune", "--out", dir}).code == kExitUsage);
  CHECK(Run({"pretrain", "--out", dir, "--config", dir + "/missing.cfg"}).code == kExitUsage);
  CHECK(Run({"pretrain", "--out", dir, "--env", "cartpole"}).code == kExitUsage);

  const Captured bad_set = Run({"pretrain", "--out", dir, "--set", "latent_dim"});
  CHECK(bad_set.code == kExitUsage);
  CHECK(bad_set.err.find("latent_dim") != std::string::npos);
  const Captured bad_key = Run({"pretrain", "--out", dir, "--set", "laten_dim=4"});
  CHECK(bad_key.code == kExitUsage);
  CHECK(bad_key.err.find("laten_dim") != std::string::npos);
}

TEST_CASE("help lists every config key") {
  const Captured h = Run({"--help"});
  CHECK(h.code == kExitOk);
  for (const auto& d : DescribeConfigKeys()) {
    CHECK_MESSAGE(h.out.find(d.key) != std::string::npos, d.key);
  }
}

TEST_CASE("runtime errors exit 2") {
  const std::string dir = ScratchDir("cli_runtime");
  CHECK(Run({"finetune", "--out", dir, "--checkpoint", dir + "/none.ckpt"}).code ==
        kExitRuntime);
  std::ofstream(dir + "/garbage.ckpt") << "not a checkpoint";
  CHECK(Run({"evaluate", "--out", dir, "--checkpoint", dir + "/garbage.ckpt"}).code ==
        kExitRuntime);
  WriteMetrics(dir + "/ok.csv", {1.0});
  std::ofstream(dir + "/bad.csv") << "step,return\n1,2\n";
  CHECK(Run({"plot", "--out", dir, "--metrics", dir + "/ok.csv", "--metrics",
             dir + "/bad.csv"})
            .code == kExitRuntime);
}

TEST_CASE("pipeline through the CLI is deterministic") {
  const std::string dir = ScratchDir("cli_pipeline");
  const std::string cfg = TinyConfigFile(dir);
  auto pipeline = [&](const std::string& tag) {
    const std::string pt = dir + "/pt_" + tag;
    const std::string ft = dir + "/ft_" + tag;
    const std::string ev = dir + "/ev_" + tag;
    REQUIRE(Run({"pretrain", "--config", cfg, "--seed", "3", "--steps", "200", "--out", pt})
                .code == kExitOk);
    REQUIRE(Run({"finetune", "--config", cfg, "--seed", "3", "--checkpoint", pt + "/pt.ckpt",
                 "--set", "ft_steps=300", "--out", ft})
                .code == kExitOk);
    REQUIRE(Run({"evaluate", "--config", cfg, "--seed", "3", "--checkpoint",
                 ft + "/ft.ckpt", "--steps", "3", "--out", ev})
                .code == kExitOk);
    return ReadFile(pt + "/metrics.csv") + ReadFile(ft + "/metrics.csv") +
           ReadFile(ev + "/metrics.csv");
  };
  const std::string first = pipeline("a");
  CHECK(first == pipeline("b"));
  CHECK(first.find("\nft,300,") != std::string::npos);
  CHECK(first.find("\npt,200,") != std::string::npos);

  const Captured sel = Run({"select-head", "--config", cfg, "--seed", "3", "--checkpoint",
                            dir + "/pt_a/pt.ckpt", "--out", dir + "/sel"});
  CHECK(sel.code == kExitOk);
  CHECK(sel.out.rfind("select-head: head ", 0) == 0);
}

TEST_CASE("plot: interval oracles") {
  const std::string dir = ScratchDir("cli_plot");
  // Five seeds, constant at step 100, known spread at step 200.
  const std::vector<double> spread = {1.0, 2.0, 3.0, 4.0, 5.0};
  std::vector<std::string> paths;
  for (int s = 0; s < 5; ++s) {
    paths.push_back(WriteMetrics(dir + "/m" + std::to_string(s) + ".csv", {100.0, spread[s]}));
  }
  const PlotOutput out = EmitPlots(paths, dir + "/plots");
  const auto rows = Curves(out.data);
  REQUIRE(rows.count(100) == 1);
  REQUIRE(rows.count(200) == 1);
  CHECK(rows.at(100)[0] == 5);
  CHECK(rows.at(100)[1] == 100.0);
  CHECK(rows.at(100)[2] == 100.0);
  CHECK(rows.at(100)[3] == 100.0);
  const double half = 1.96 * std::sqrt(2.5) / std::sqrt(5.0);
  CHECK(rows.at(200)[1] == doctest::Approx(3.0));
  CHECK(rows.at(200)[2] == doctest::Approx(3.0 - half).epsilon(1e-9));
  CHECK(rows.at(200)[3] == doctest::Approx(3.0 + half).epsilon(1e-9));

  CHECK(Run({"plot", "--out", dir + "/cli", "--metrics", paths[0], "--metrics", paths[1]})
            .code == kExitOk);
  CHECK(std::filesystem::exists(dir + "/cli/curves.csv"));

  // The script is optional tooling; only run it where matplotlib exists.
  if (std::system("python3 -c 'import matplotlib' >/dev/null 2>&1") == 0) {
    CHECK(std::system(("python3 " + out.script + " >/dev/null 2>&1").c_str()) == 0);
    CHECK(std::filesystem::exists(dir + "/plots/curves.png"));
  } else {
    MESSAGE("matplotlib not installed; plot script not executed");
  }
}
