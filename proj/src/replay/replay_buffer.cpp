#include "euclid/replay/replay_buffer.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "euclid/common/error.h"

namespace euclid {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int segment_limit)
    : capacity_(capacity), segment_limit_(segment_limit) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
}

void ReplayBuffer::Clear() {
  episodes_.clear();
  size_ = 0;
}

void ReplayBuffer::Push(Transition t) {
  if (t.segment_id < 0 || t.segment_id >= segment_limit_) {
    throw InvalidTransitionError(
        "segment_id " + std::to_string(t.segment_id) +
        " outside [0, " + std::to_string(segment_limit_) + ")");
  }
  if (t.state.size() != t.next_state.size()) {
    throw InvalidTransitionError("state / next_state sizes differ");
  }
  if (!episodes_.empty() && episodes_.back().id == t.episode_id) {
    const Transition& last = episodes_.back().steps.back();
    if (t.step_index != last.step_index + 1) {
      throw InvalidTransitionError("non-consecutive step_index in episode " +
                                   std::to_string(t.episode_id));
    }
    if (last.next_state != t.state) {
      throw InvalidTransitionError("state does not continue previous next_state");
    }
  } else {
    episodes_.push_back(Episode{t.episode_id, {}, {}});
  }

  Episode& ep = episodes_.back();
  const int index = static_cast<int>(ep.steps.size());
  if (!ep.runs.empty() && ep.runs.back().segment == t.segment_id) {
    ++ep.runs.back().length;
  } else {
    ep.runs.push_back(Run{index, 1, t.segment_id});
  }
  ep.steps.push_back(std::move(t));
  ++size_;

  while (size_ > capacity_ && episodes_.size() > 1) {
    size_ -= episodes_.front().steps.size();
    episodes_.pop_front();
  }
}

std::int64_t ReplayBuffer::CountStarts(int horizon,
                                       std::optional<int> segment) const {
  std::int64_t total = 0;
  for (const auto& ep : episodes_) {
    if (!segment) {
      total += std::max(0, static_cast<int>(ep.steps.size()) - horizon);
      continue;
    }
    for (const auto& run : ep.runs) {
      if (run.segment == *segment) total += std::max(0, run.length - horizon);
    }
  }
  return total;
}

SequenceBatch ReplayBuffer::SampleSequences(int batch, int horizon,
                                            std::optional<int> segment,
                                            Rng& rng) const {
  if (horizon < 0 || batch <= 0) {
    throw ConfigError("batch must be positive and horizon non-negative");
  }
  // (episode index, first valid start, count) in buffer order.
  struct Span {
    std::size_t episode;
    int begin;
    std::int64_t cumulative;
  };
  std::vector<Span> spans;
  std::int64_t total = 0;
  for (std::size_t e = 0; e < episodes_.size(); ++e) {
    const Episode& ep = episodes_[e];
    if (!segment) {
      const int n = std::max(0, static_cast<int>(ep.steps.size()) - horizon);
      if (n > 0) spans.push_back({e, 0, total += n});
      continue;
    }
    for (const auto& run : ep.runs) {
      if (run.segment != *segment) continue;
      const int n = std::max(0, run.length - horizon);
      if (n > 0) spans.push_back({e, run.begin, total += n});
    }
  }
  if (total == 0) {
    throw NotEnoughDataError(
        "replay holds no sequence of " + std::to_string(horizon + 1) +
        " transitions" +
        (segment ? " for segment " + std::to_string(*segment) : std::string()));
  }

  const Transition& probe = episodes_[spans.front().episode].steps.front();
  const auto sdim = probe.state.size();
  const auto adim = probe.action.size();
  SequenceBatch out;
  out.horizon = horizon;
  for (int i = 0; i <= horizon; ++i) {
    out.states.emplace_back(sdim, batch);
    out.actions.emplace_back(adim, batch);
    out.next_states.emplace_back(sdim, batch);
    out.rewards.emplace_back(1, batch);
    out.skills.emplace_back(static_cast<std::size_t>(batch));
  }
  std::uniform_int_distribution<std::int64_t> pick(0, total - 1);
  for (int b = 0; b < batch; ++b) {
    const std::int64_t u = pick(rng);
    auto it = std::upper_bound(
        spans.begin(), spans.end(), u,
        [](std::int64_t v, const Span& s) { return v < s.cumulative; });
    const std::int64_t before =
        it == spans.begin() ? 0 : std::prev(it)->cumulative;
    const Episode& ep = episodes_[it->episode];
    const int start = it->begin + static_cast<int>(u - before);
    out.episode_ids.push_back(ep.id);
    out.start_steps.push_back(ep.steps[start].step_index);
    out.segment_ids.push_back(ep.steps[start].segment_id);
    for (int i = 0; i <= horizon; ++i) {
      const Transition& t = ep.steps[start + i];
      out.states[i].col(b) = t.state;
      out.actions[i].col(b) = t.action;
      out.next_states[i].col(b) = t.next_state;
      out.rewards[i](0, b) =
          t.reward ? *t.reward : std::numeric_limits<double>::quiet_NaN();
      out.skills[i][b] = t.skill;
    }
  }
  return out;
}

void ReplayBuffer::ExportTo(TensorArchive& archive) const {
  if (size_ == 0) {
    archive.PutScalar("replay/size", 0);
    archive.PutScalar("replay/capacity", static_cast<double>(capacity_));
    archive.PutScalar("replay/segment_limit", segment_limit_);
    return;
  }
  const Transition& probe = episodes_.front().steps.front();
  const auto n = static_cast<Eigen::Index>(size_);
  Matrix states(probe.state.size(), n), actions(probe.action.size(), n),
      next(probe.state.size(), n), meta(5, n);
  Eigen::Index col = 0;
  ForEach([&](const Transition& t) {
    states.col(col) = t.state;
    actions.col(col) = t.action;
    next.col(col) = t.next_state;
    meta(0, col) = t.reward ? *t.reward : std::numeric_limits<double>::quiet_NaN();
    meta(1, col) = t.segment_id;
    meta(2, col) = static_cast<double>(t.episode_id);
    meta(3, col) = t.step_index;
    meta(4, col) = t.skill;
    ++col;
  });
  archive.PutScalar("replay/size", static_cast<double>(size_));
  archive.PutScalar("replay/capacity", static_cast<double>(capacity_));
  archive.PutScalar("replay/segment_limit", segment_limit_);
  archive.Put("replay/states", std::move(states));
  archive.Put("replay/actions", std::move(actions));
  archive.Put("replay/next_states", std::move(next));
  archive.Put("replay/meta", std::move(meta));
}

ReplayBuffer ReplayBuffer::ImportFrom(const TensorArchive& archive) {
  ReplayBuffer buffer(
      static_cast<std::size_t>(archive.GetScalar("replay/capacity")),
      static_cast<int>(archive.GetScalar("replay/segment_limit")));
  if (archive.GetScalar("replay/size") == 0) return buffer;
  const Matrix& states = archive.Get("replay/states");
  const Matrix& actions = archive.Get("replay/actions");
  const Matrix& next = archive.Get("replay/next_states");
  const Matrix& meta = archive.Get("replay/meta");
  for (Eigen::Index c = 0; c < states.cols(); ++c) {
    Transition t;
    t.state = states.col(c);
    t.action = actions.col(c);
    t.next_state = next.col(c);
    if (!std::isnan(meta(0, c))) t.reward = meta(0, c);
    t.segment_id = static_cast<int>(meta(1, c));
    t.episode_id = static_cast<std::int64_t>(meta(2, c));
    t.step_index = static_cast<int>(meta(3, c));
    t.skill = static_cast<int>(meta(4, c));
    buffer.Push(std::move(t));
  }
  return buffer;
}

}  // namespace euclid
