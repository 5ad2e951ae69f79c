#include "euclid/agent/metrics.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "euclid/common/error.h"

namespace euclid {
namespace {

int PhaseRank(const std::string& phase) {
  if (phase == "pt") return 0;
  if (phase == "select") return 1;
  if (phase == "ft") return 2;
  if (phase == "eval") return 3;
  throw FormatError("unknown metrics phase '" + phase + "'");
}

std::string Cell(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  return buf;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<double> OptDouble(const std::string& s, int line) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw FormatError("metrics line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string FormatMetricsRow(const MetricsRow& r) {
  std::ostringstream os;
  os << r.phase << ',' << r.step << ',' << r.task << ',' << Cell(r.episode_return) << ','
     << Cell(r.loss_reward) << ',' << Cell(r.loss_consistency) << ','
     << Cell(r.loss_value) << ',' << Cell(r.loss_actor) << ','
     << Cell(r.intrinsic_mean) << ','
     << (r.selected_head ? std::to_string(*r.selected_head) : "") << ','
     << Cell(r.wall_ms);
  return os.str();
}

MetricsWriter::MetricsWriter(const std::string& path) : out_(path) {
  if (!out_) throw Error("cannot write metrics file '" + path + "'");
  out_ << kMetricsHeader << '\n';
  out_.flush();
}

void MetricsWriter::Write(const MetricsRow& row) {
  const int rank = PhaseRank(row.phase);
  if (!rows_.empty()) {
    const int prev = PhaseRank(rows_.back().phase);
    if (rank < prev || (rank == prev && row.step <= rows_.back().step)) {
      throw FormatError("metrics rows out of order at " + row.phase + "/" +
                        std::to_string(row.step));
    }
  }
  rows_.push_back(row);
  out_ << FormatMetricsRow(row) << '\n';
  out_.flush();
}

std::vector<MetricsRow> ReadMetrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read metrics file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || SplitCsv(line) != SplitCsv(kMetricsHeader)) {
    throw FormatError("'" + path + "' does not have the metrics header");
  }
  std::vector<MetricsRow> rows;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const auto c = SplitCsv(line);
    if (c.size() != 11) {
      throw FormatError("metrics line " + std::to_string(n) + ": expected 11 fields");
    }
    MetricsRow r;
    r.phase = c[0];
    PhaseRank(r.phase);
    const auto step = OptDouble(c[1], n);
    if (!step) throw FormatError("metrics line " + std::to_string(n) + ": missing step");
    r.step = static_cast<std::int64_t>(*step);
    r.task = c[2];
    r.episode_return = OptDouble(c[3], n);
    r.loss_reward = OptDouble(c[4], n);
    r.loss_consistency = OptDouble(c[5], n);
    r.loss_value = OptDouble(c[6], n);
    r.loss_actor = OptDouble(c[7], n);
    r.intrinsic_mean = OptDouble(c[8], n);
    if (auto h = OptDouble(c[9], n)) r.selected_head = static_cast<int>(*h);
    r.wall_ms = OptDouble(c[10], n).value_or(0.0);
    rows.push_back(std::move(r));
  }
  return rows;
}

ReturnStats SummarizeReturns(const std::vector<double>& returns) {
  ReturnStats s;
  s.n = static_cast<int>(returns.size());
  if (s.n == 0) return s;
  for (double r : returns) s.mean += r;
  s.mean /= s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double r : returns) ss += (r - s.mean) * (r - s.mean);
    s.half_width = 1.96 * std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

}  // namespace euclid
