#include "euclid/mcl/policy_ensemble.h"

#include "euclid/common/error.h"

namespace euclid {

void MCLConfig::Validate() const {
  if (num_heads < 1) throw ConfigError("num_heads must be >= 1");
  if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
  if (snapshot_interval < 0) throw ConfigError("snapshot_interval must be >= 0");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
}

PolicyEnsemble::PolicyEnsemble(int num_heads, std::int64_t snapshot_interval,
                               double sigma)
    : num_heads_(num_heads), interval_(snapshot_interval), sigma_(sigma) {
  if (num_heads < 1) throw ConfigError("num_heads must be >= 1");
  if (snapshot_interval < 1) throw ConfigError("snapshot_interval must be >= 1");
}

bool PolicyEnsemble::MaybeSnapshot(std::int64_t t, const Actor& live) {
  const int h = size();
  if (h >= num_heads_ || t != interval_ * h) return false;
  snapshots_.push_back(live);
  return true;
}

Matrix PolicyEnsemble::AverageAction(const Matrix& latents,
                                     const Matrix& condition) const {
  if (empty()) throw RangeError("average action of an empty ensemble");
  Matrix sum = snapshots_.front().Act(latents, condition);
  for (std::size_t i = 1; i < snapshots_.size(); ++i) {
    sum += snapshots_[i].Act(latents, condition);
  }
  return sum / static_cast<double>(snapshots_.size());
}

double PolicyEnsemble::Divergence(const Actor& actor, const Matrix& latents,
                                  const Matrix& condition) const {
  const Matrix gap = AverageAction(latents, condition) - actor.Act(latents, condition);
  return gap.colwise().squaredNorm().mean() / (2.0 * sigma_ * sigma_);
}

void PolicyEnsemble::ExportTo(TensorArchive& archive, const std::string& prefix) const {
  archive.PutScalar(prefix + "@count", size());
  archive.PutScalar(prefix + "@num_heads", num_heads_);
  archive.PutScalar(prefix + "@interval", static_cast<double>(interval_));
  archive.PutScalar(prefix + "@sigma", sigma_);
  for (int i = 0; i < size(); ++i) {
    snapshot(i).params().ExportTo(archive, prefix + "/" + std::to_string(i));
  }
}

void PolicyEnsemble::ImportFrom(const TensorArchive& archive,
                                const std::string& prefix, const Actor& like) {
  const int count = static_cast<int>(archive.GetScalar(prefix + "@count"));
  num_heads_ = static_cast<int>(archive.GetScalar(prefix + "@num_heads"));
  interval_ = static_cast<std::int64_t>(archive.GetScalar(prefix + "@interval"));
  sigma_ = archive.GetScalar(prefix + "@sigma");
  snapshots_.clear();
  for (int i = 0; i < count; ++i) {
    Actor a = like;
    ParamStore p = ParamStore::ImportFrom(archive, prefix + "/" + std::to_string(i));
    if (!p.SameLayout(a.params())) {
      throw CheckpointError("policy snapshot architecture differs from checkpoint");
    }
    a.params() = std::move(p);
    snapshots_.push_back(std::move(a));
  }
}

int ArgmaxFirst(const std::vector<double>& values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

HeadSelection SelectHead(const WorldModel& model, const PolicyEnsemble& ensemble,
                         Env& env, std::uint64_t reset_seed,
                         const Matrix& condition) {
  if (!env.task()) throw ConfigError("head selection needs a task");
  if (ensemble.empty()) throw RangeError("head selection with no snapshots");
  const int heads = std::min(ensemble.size(), model.num_heads());
  HeadSelection out;
  for (int h = 0; h < heads; ++h) {
    std::vector<Transition> episode;
    Vector s = env.Reset(reset_seed);
    double ret = 0.0;
    while (!env.done()) {
      const Matrix z = model.Encode(s);
      const Vector a = ensemble.snapshot(h).Act(z, condition).col(0);
      StepResult r = env.Step(a);
      ret += *r.extrinsic_reward;
      Transition t;
      t.state = s;
      t.action = a.cwiseMax(-1.0).cwiseMin(1.0);
      t.reward = r.extrinsic_reward;
      t.next_state = r.next_state;
      t.segment_id = 0;
      t.episode_id = h;
      t.step_index = static_cast<int>(episode.size());
      episode.push_back(std::move(t));
      s = r.next_state;
    }
    out.returns.push_back(ret);
    out.episodes.push_back(std::move(episode));
  }
  out.head = ArgmaxFirst(out.returns);
  return out;
}

}  // namespace euclid
