#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "euclid/env/env.h"
#include "euclid/model/world_model.h"
#include "euclid/nn/archive.h"
#include "euclid/replay/replay_buffer.h"

namespace euclid {

struct MCLConfig {
  int num_heads = 4;
  double alpha = 0.1;
  // Env steps between snapshots; 0 means pt_steps / num_heads, resolved by
  // the caller.
  std::int64_t snapshot_interval = 0;
  // Std of the Gaussian surrogate used for the divergence.
  double sigma = 0.2;

  void Validate() const;  // ConfigError on num_heads < 1 or alpha < 0
};

// Frozen copies of the live actor taken at t = T * h for h < num_heads.
class PolicyEnsemble {
 public:
  PolicyEnsemble() = default;
  PolicyEnsemble(int num_heads, std::int64_t snapshot_interval, double sigma);

  // Appends a snapshot of `live` when t = T * h and h < num_heads. Returns
  // true if a snapshot was taken. Calling twice at the same t is harmless.
  bool MaybeSnapshot(std::int64_t t, const Actor& live);

  int size() const { return static_cast<int>(snapshots_.size()); }
  bool empty() const { return snapshots_.empty(); }
  int num_heads() const { return num_heads_; }
  std::int64_t snapshot_interval() const { return interval_; }
  double sigma() const { return sigma_; }
  // Segment (and head) that newly collected data belongs to: h - 1.
  int current_segment() const { return size() == 0 ? 0 : size() - 1; }

  const Actor& snapshot(int i) const { return snapshots_.at(static_cast<std::size_t>(i)); }

  // Mean of the snapshot actions at each latent. Throws RangeError when empty.
  Matrix AverageAction(const Matrix& latents, const Matrix& condition) const;

  // Mean over samples of |avg(z) - pi(z)|^2 / (2 sigma^2).
  double Divergence(const Actor& actor, const Matrix& latents,
                    const Matrix& condition) const;

  void ExportTo(TensorArchive& archive, const std::string& prefix) const;
  // `like` supplies the architecture of the stored actors.
  void ImportFrom(const TensorArchive& archive, const std::string& prefix,
                  const Actor& like);

 private:
  int num_heads_ = 1;
  std::int64_t interval_ = 1;
  double sigma_ = 0.2;
  std::vector<Actor> snapshots_;
};

struct HeadSelection {
  int head = 0;
  std::vector<double> returns;  // one episode return per head
  std::vector<std::vector<Transition>> episodes;  // episode_id = head index
};

// Runs one full episode per head with its snapshot policy (no planning,
// no noise) from the same reset seed and picks the highest return; ties go
// to the lowest index. `env` must have a task set. `condition` is the fixed
// actor conditioning vector (empty when the actors take none).
HeadSelection SelectHead(const WorldModel& model, const PolicyEnsemble& ensemble,
                         Env& env, std::uint64_t reset_seed,
                         const Matrix& condition);

// Index of the largest value, lowest index on ties.
int ArgmaxFirst(const std::vector<double>& values);

}  // namespace euclid
