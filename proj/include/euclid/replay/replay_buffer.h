#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "euclid/common/rng.h"
#include "euclid/nn/archive.h"
#include "euclid/nn/types.h"

namespace euclid {

struct Transition {
  Vector state;
  Vector action;
  std::optional<double> reward;  // absent during reward-free collection
  Vector next_state;
  int segment_id = 0;
  std::int64_t episode_id = 0;
  int step_index = 0;
  int skill = -1;  // active skill index when a skill-conditioned explorer runs
};

// horizon+1 consecutive transitions per sample, laid out step-major: entry i
// of each vector holds step i of every sample (one column per sample).
struct SequenceBatch {
  int horizon = 0;
  std::vector<Matrix> states;
  std::vector<Matrix> actions;
  std::vector<Matrix> next_states;
  std::vector<Matrix> rewards;  // 1 x B; NaN where the reward is absent
  std::vector<std::vector<int>> skills;
  std::vector<std::int64_t> episode_ids;
  std::vector<int> start_steps;
  std::vector<int> segment_ids;  // segment of the first transition

  int size() const { return static_cast<int>(episode_ids.size()); }
  int steps() const { return horizon + 1; }
};

// Bounded FIFO of whole episodes. Eviction drops the oldest complete episodes
// once the transition count exceeds capacity; the episode being written is
// never evicted.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity, int segment_limit = 1);

  // Rejects transitions whose segment_id is outside [0, segment_limit) or that
  // break the episode chain (step_index / state continuity).
  void Push(Transition transition);

  void set_segment_limit(int limit) { segment_limit_ = limit; }
  int segment_limit() const { return segment_limit_; }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t num_episodes() const { return episodes_.size(); }
  void Clear();

  // Number of valid sequence start positions for (horizon, filter).
  std::int64_t CountStarts(int horizon, std::optional<int> segment) const;

  // Throws NotEnoughDataError when no valid start exists.
  SequenceBatch SampleSequences(int batch, int horizon,
                                std::optional<int> segment, Rng& rng) const;

  // Visits every stored transition, oldest first.
  template <typename Fn>
  void ForEach(Fn&& fn) const {
    for (const auto& ep : episodes_) {
      for (const auto& t : ep.steps) fn(t);
    }
  }

  void ExportTo(TensorArchive& archive) const;
  static ReplayBuffer ImportFrom(const TensorArchive& archive);

 private:
  struct Run {
    int begin = 0;
    int length = 0;
    int segment = 0;
  };
  struct Episode {
    std::int64_t id = 0;
    std::vector<Transition> steps;
    std::vector<Run> runs;
  };

  std::deque<Episode> episodes_;
  std::size_t capacity_;
  std::size_t size_ = 0;
  int segment_limit_;
};

}  // namespace euclid
