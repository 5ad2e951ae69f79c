#include "euclid/cli/plots.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <tuple>

#include "euclid/agent/metrics.h"

namespace euclid {
namespace {

constexpr const char* kScript = R"PY(#!/usr/bin/env python3
# Renders curves.csv (next to this script) into curves.png.
import csv
import os
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
series = defaultdict(list)
with open(os.path.join(here, "curves.csv")) as f:
    for row in csv.DictReader(f):
        key = (row["phase"], row["task"] or "-")
        series[key].append(
            (int(row["step"]), float(row["mean"]), float(row["ci_low"]), float(row["ci_high"]))
        )

if not series:
    sys.exit("curves.csv has no return data")

fig, axes = plt.subplots(1, len(series), figsize=(4.5 * len(series), 3.5), squeeze=False)
for ax, ((phase, task), pts) in zip(axes[0], sorted(series.items())):
    pts.sort()
    x = [p[0] for p in pts]
    ax.plot(x, [p[1] for p in pts], lw=1.5)
    ax.fill_between(x, [p[2] for p in pts], [p[3] for p in pts], alpha=0.25)
    ax.set_title(f"{task} ({phase})")
    ax.set_xlabel("step")
    ax.set_ylabel("episode return")
fig.tight_layout()
fig.savefig(os.path.join(here, "curves.png"), dpi=120)
)PY";

}  // namespace

PlotOutput EmitPlots(const std::vector<std::string>& metrics_paths,
                     const std::string& out_dir) {
  using Key = std::tuple<std::string, std::string, std::int64_t>;
  std::map<Key, std::vector<double>> values;
  for (const auto& path : metrics_paths) {
    for (const auto& row : ReadMetrics(path)) {
      if (row.episode_return) {
        values[{row.phase, row.task, row.step}].push_back(*row.episode_return);
      }
    }
  }
  std::filesystem::create_directories(out_dir);
  PlotOutput out{out_dir + "/curves.csv", out_dir + "/plot_curves.py"};
  std::ofstream data(out.data);
  data << "phase,task,step,n,mean,ci_low,ci_high\n";
  for (const auto& [key, v] : values) {
    const ReturnStats s = SummarizeReturns(v);
    char buf[160];
    std::snprintf(buf, sizeof buf, "%lld,%d,%.10g,%.10g,%.10g",
                  static_cast<long long>(std::get<2>(key)), s.n, s.mean,
                  s.mean - s.half_width, s.mean + s.half_width);
    data << std::get<0>(key) << ',' << std::get<1>(key) << ',' << buf << '\n';
  }
  std::ofstream(out.script) << kScript;
  std::filesystem::permissions(out.script, std::filesystem::perms::owner_exec,
                               std::filesystem::perm_options::add);
  return out;
}

}  // namespace euclid
