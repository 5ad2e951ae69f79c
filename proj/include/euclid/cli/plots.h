#pragma once

#include <string>
#include <vector>

namespace euclid {

struct PlotOutput {
  std::string data;    // curves.csv
  std::string script;  // plot_curves.py
};

// Reads metrics CSVs (one per seed), aggregates episode returns per
// (phase, task, step) across files and writes curves.csv with columns
// phase,task,step,n,mean,ci_low,ci_high (interval 1.96 sd / sqrt(n), sample
// sd, zero width for n = 1) plus a matplotlib script that renders it.
// Throws FormatError if any file lacks the metrics header.
PlotOutput EmitPlots(const std::vector<std::string>& metrics_paths,
                     const std::string& out_dir);

}  // namespace euclid
