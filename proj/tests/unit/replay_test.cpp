#include <map>
#include <set>

#include "doctest.h"
#include "euclid/common/error.h"
#include "euclid/replay/replay_buffer.h"

using namespace euclid;

namespace {

// Pushes one episode whose state at step i is (episode, i).
void PushEpisode(ReplayBuffer& buf, std::int64_t episode, int length,
                 int segment = 0, int segment_switch_at = -1,
                 int second_segment = 0) {
  for (int i = 0; i < length; ++i) {
    Transition t;
    t.state = Vector::Constant(2, 0.0);
    t.state << static_cast<double>(episode), i;
    t.next_state = t.state;
    t.next_state(1) = i + 1;
    t.action = Vector::Constant(1, 0.1 * i);
    t.episode_id = episode;
    t.step_index = i;
    t.segment_id =
        (segment_switch_at >= 0 && i >= segment_switch_at) ? second_segment : segment;
    buf.Push(std::move(t));
  }
}

}  // namespace

TEST_CASE("push: size, FIFO whole-episode eviction, segment rejection") {
  ReplayBuffer buf(10);
  PushEpisode(buf, 0, 1);
  CHECK(buf.size() == 1);

  ReplayBuffer one(10);
  PushEpisode(one, 0, 10);
  PushEpisode(one, 1, 10);
  CHECK(one.size() == 10);
  CHECK(one.num_episodes() == 1);
  one.ForEach([](const Transition& t) { CHECK(t.episode_id == 1); });

  ReplayBuffer seg(10, 2);
  Transition t;
  t.state = t.next_state = Vector::Zero(2);
  t.action = Vector::Zero(1);
  t.segment_id = 2;
  CHECK_THROWS_AS(seg.Push(t), InvalidTransitionError);
  t.segment_id = -1;
  CHECK_THROWS_AS(seg.Push(t), InvalidTransitionError);
  CHECK(seg.size() == 0);
}

TEST_CASE("push: episode chain is enforced") {
  ReplayBuffer buf(100);
  PushEpisode(buf, 0, 3);
  Transition gap;
  gap.state = Vector::Zero(2);
  gap.state << 0, 3;
  gap.next_state = gap.state;
  gap.action = Vector::Zero(1);
  gap.episode_id = 0;
  gap.step_index = 5;
  CHECK_THROWS_AS(buf.Push(gap), InvalidTransitionError);
  gap.step_index = 3;
  gap.state(1) = 99;  // breaks next_state continuity
  CHECK_THROWS_AS(buf.Push(gap), InvalidTransitionError);
}

TEST_CASE("sample: valid start indices and contiguity") {
  ReplayBuffer buf(100);
  PushEpisode(buf, 0, 10);
  CHECK(buf.CountStarts(5, std::nullopt) == 5);
  Rng rng(0);
  std::set<int> starts;
  for (int r = 0; r < 50; ++r) {
    const SequenceBatch b = buf.SampleSequences(16, 5, std::nullopt, rng);
    CHECK(b.steps() == 6);
    for (int j = 0; j < b.size(); ++j) {
      starts.insert(b.start_steps[j]);
      for (int i = 0; i < 6; ++i) {
        CHECK(b.states[i](1, j) == b.start_steps[j] + i);
        if (i < 5) CHECK(b.next_states[i].col(j) == b.states[i + 1].col(j));
      }
    }
  }
  CHECK(starts == std::set<int>{0, 1, 2, 3, 4});
}

TEST_CASE("sample: segment filter miss and filtered runs") {
  ReplayBuffer buf(100, 3);
  PushEpisode(buf, 0, 10, 0);
  Rng rng(1);
  CHECK_THROWS_AS(buf.SampleSequences(4, 2, 2, rng), NotEnoughDataError);
  CHECK_THROWS_AS(buf.SampleSequences(4, 10, std::nullopt, rng),
                  NotEnoughDataError);

  // Episode that switches from segment 1 to segment 2 at step 6.
  PushEpisode(buf, 1, 12, 1, 6, 2);
  CHECK(buf.CountStarts(3, 1) == 3);
  CHECK(buf.CountStarts(3, 2) == 3);
  for (int seg : {0, 1, 2}) {
    const SequenceBatch b = buf.SampleSequences(64, 3, seg, rng);
    for (int j = 0; j < b.size(); ++j) {
      CHECK(b.segment_ids[j] == seg);
      // every step of the sample lies inside the segment's run
      const int first = b.start_steps[j];
      if (seg == 1) CHECK(first + 3 < 6);
      if (seg == 2) CHECK(first >= 6);
    }
  }
}

TEST_CASE("sample: episodes are chosen uniformly over start positions") {
  ReplayBuffer buf(1000);
  PushEpisode(buf, 0, 50);
  PushEpisode(buf, 1, 50);
  Rng rng(2024);
  const SequenceBatch b = buf.SampleSequences(10000, 5, std::nullopt, rng);
  int first = 0;
  for (auto id : b.episode_ids) first += id == 0;
  const double frac = first / 10000.0;
  CHECK(frac > 0.47);
  CHECK(frac < 0.53);
}

TEST_CASE("sample: reproducible for a fixed seed") {
  ReplayBuffer buf(1000, 2);
  PushEpisode(buf, 0, 30, 0, 15, 1);
  PushEpisode(buf, 1, 30, 1);
  Rng a(5), b(5);
  const auto x = buf.SampleSequences(32, 4, 1, a);
  const auto y = buf.SampleSequences(32, 4, 1, b);
  CHECK(x.episode_ids == y.episode_ids);
  CHECK(x.start_steps == y.start_steps);
}

TEST_CASE("dump and load preserve contents") {
  ReplayBuffer buf(1000, 2);
  PushEpisode(buf, 0, 7, 0, 3, 1);
  PushEpisode(buf, 4, 5, 1);
  TensorArchive ar;
  buf.ExportTo(ar);
  const ReplayBuffer back =
      ReplayBuffer::ImportFrom(TensorArchive::Deserialize(ar.Serialize()));
  CHECK(back.size() == buf.size());
  CHECK(back.num_episodes() == 2);
  CHECK(back.CountStarts(1, 1) == buf.CountStarts(1, 1));
  std::vector<double> xs, ys;
  buf.ForEach([&](const Transition& t) { xs.push_back(t.state(1) + t.segment_id); });
  back.ForEach([&](const Transition& t) { ys.push_back(t.state(1) + t.segment_id); });
  CHECK(xs == ys);
}
