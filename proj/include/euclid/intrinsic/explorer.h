#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "euclid/common/rng.h"
#include "euclid/nn/archive.h"
#include "euclid/nn/dense_net.h"
#include "euclid/nn/param_store.h"

namespace euclid {

enum class ExplorerKind { kDisagreement, kApt, kDiayn };

// "disagreement" | "apt" | "diayn"; anything else throws ConfigError.
ExplorerKind ParseExplorerKind(const std::string& name);
std::string ExplorerKindName(ExplorerKind kind);

struct ExplorerConfig {
  int latent_dim = 0;
  int action_dim = 0;
  int hidden_dim = 64;
  double lr = 1e-4;
  // disagreement
  int ensemble_size = 5;
  // apt
  int knn_k = 12;
  double knn_eps = 1e-6;
  // diayn
  int skill_dim = 16;
  int skill_period = 50;
};

// Latent transitions, one column per sample. `skills` holds the active skill
// per sample (-1 when the explorer does not use skills).
struct LatentBatch {
  Matrix latents;
  Matrix actions;
  Matrix next_latents;
  std::vector<int> skills;
  Eigen::Index size() const { return latents.cols(); }
};

class Explorer {
 public:
  virtual ~Explorer() = default;

  virtual ExplorerKind kind() const = 0;

  // Intrinsic reward per sample, 1 x B.
  virtual Matrix Reward(const LatentBatch& batch) const = 0;

  // One optimisation step on the explorer's own networks. Returns the loss
  // before the step (0 for explorers without parameters).
  virtual double Update(const LatentBatch& batch, Rng& rng) = 0;

  // Called once per environment step before acting. Skill-based explorers
  // resample their skill here.
  virtual void OnEnvStep(std::int64_t step, Rng& rng) { (void)step, (void)rng; }

  // Actor conditioning: rows of the one-hot skill (0 when unused).
  virtual int condition_dim() const { return 0; }
  virtual int current_skill() const { return -1; }

  virtual void ExportTo(TensorArchive& archive, const std::string& prefix) const = 0;
  virtual void ImportFrom(const TensorArchive& archive, const std::string& prefix) = 0;
};

std::unique_ptr<Explorer> MakeExplorer(ExplorerKind kind,
                                       const ExplorerConfig& config, Rng& rng);

// Forward-model ensemble; reward is the per-dimension population variance of
// the member predictions, averaged over latent dimensions.
class DisagreementExplorer : public Explorer {
 public:
  DisagreementExplorer(const ExplorerConfig& config, Rng& rng);

  ExplorerKind kind() const override { return ExplorerKind::kDisagreement; }
  Matrix Reward(const LatentBatch& batch) const override;
  // Each member trains on its own bootstrap resample of `batch`.
  double Update(const LatentBatch& batch, Rng& rng) override;
  // Trains member i on member_batches[i]; an empty batch skips the member.
  // Returns the mean loss over members that trained.
  double UpdateMembers(const std::vector<LatentBatch>& member_batches);

  int size() const { return static_cast<int>(members_.size()); }
  const DenseNet& net() const { return net_; }
  ParamStore& member(int i) { return members_.at(static_cast<std::size_t>(i)); }
  const ParamStore& member(int i) const {
    return members_.at(static_cast<std::size_t>(i));
  }
  Matrix Predict(int i, const Matrix& latents, const Matrix& actions) const;

  // Mean squared prediction error of member i with gradients.
  struct LossResult {
    double loss = 0.0;
    GradientMap grads;
  };
  LossResult MemberLoss(int i, const LatentBatch& batch, bool with_grads = true) const;

  void ExportTo(TensorArchive& archive, const std::string& prefix) const override;
  void ImportFrom(const TensorArchive& archive, const std::string& prefix) override;

 private:
  ExplorerConfig config_;
  DenseNet net_;
  std::vector<ParamStore> members_;
};

// Particle entropy estimate over the batch's next latents: each sample is
// scored against the other samples of the same batch.
class AptExplorer : public Explorer {
 public:
  explicit AptExplorer(const ExplorerConfig& config);

  ExplorerKind kind() const override { return ExplorerKind::kApt; }
  Matrix Reward(const LatentBatch& batch) const override;
  double Update(const LatentBatch&, Rng&) override { return 0.0; }

  void ExportTo(TensorArchive& archive, const std::string& prefix) const override;
  void ImportFrom(const TensorArchive& archive, const std::string& prefix) override;

 private:
  ExplorerConfig config_;
};

// log(max(raw, 0) + 1), raw = mean over the k nearest references of
// log(|z - r|^2 + eps). One value per column of `latents`.
Matrix AptReward(const Matrix& latents, const Matrix& references, int k,
                 double eps);

// Skill discriminator q(w | z'); reward log q(w | z') + log(skill_dim).
class DiaynExplorer : public Explorer {
 public:
  DiaynExplorer(const ExplorerConfig& config, Rng& rng);

  ExplorerKind kind() const override { return ExplorerKind::kDiayn; }
  Matrix Reward(const LatentBatch& batch) const override;
  double Update(const LatentBatch& batch, Rng& rng) override;
  void OnEnvStep(std::int64_t step, Rng& rng) override;

  int condition_dim() const override { return config_.skill_dim; }
  int current_skill() const override { return skill_; }
  void set_skill(int skill);

  const DenseNet& net() const { return net_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  Matrix Logits(const Matrix& latents) const;

  struct LossResult {
    double loss = 0.0;
    GradientMap grads;
  };
  // Mean cross-entropy of the skills given the next latents.
  LossResult DiscriminatorLoss(const LatentBatch& batch, bool with_grads = true) const;

  void ExportTo(TensorArchive& archive, const std::string& prefix) const override;
  void ImportFrom(const TensorArchive& archive, const std::string& prefix) override;

 private:
  ExplorerConfig config_;
  DenseNet net_;
  ParamStore params_;
  int skill_ = 0;
};

}  // namespace euclid
