#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace euclid {

inline constexpr const char* kMetricsHeader =
    "phase,step,task,return,loss_reward,loss_consistency,loss_value,loss_actor,"
    "intrinsic_mean,selected_head,wall_ms";

// Empty optionals are written as empty cells.
struct MetricsRow {
  std::string phase;  // pt | select | ft | eval
  std::int64_t step = 0;
  std::string task;
  std::optional<double> episode_return;
  std::optional<double> loss_reward;
  std::optional<double> loss_consistency;
  std::optional<double> loss_value;
  std::optional<double> loss_actor;
  std::optional<double> intrinsic_mean;
  std::optional<int> selected_head;
  double wall_ms = 0.0;
};

std::string FormatMetricsRow(const MetricsRow& row);

// Appends rows to a CSV. Rows must be strictly ordered by (phase, step) with
// phases in the order pt, select, ft, eval; violations throw FormatError.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path);
  void Write(const MetricsRow& row);
  const std::vector<MetricsRow>& rows() const { return rows_; }

 private:
  std::ofstream out_;
  std::vector<MetricsRow> rows_;
};

// Parses a metrics CSV. Throws FormatError on a header mismatch or a
// malformed row.
std::vector<MetricsRow> ReadMetrics(const std::string& path);

// Mean and normal-approximation 95% interval half-width 1.96 sd / sqrt(n)
// with the sample standard deviation (0 for n = 1).
struct ReturnStats {
  double mean = 0.0;
  double half_width = 0.0;
  int n = 0;
};
ReturnStats SummarizeReturns(const std::vector<double>& returns);

}  // namespace euclid
