#pragma once

#include <vector>

#include "euclid/common/rng.h"
#include "euclid/nn/archive.h"
#include "euclid/nn/dense_net.h"
#include "euclid/nn/param_store.h"

namespace euclid {

struct WorldModelConfig {
  int state_dim = 0;
  int action_dim = 0;
  int latent_dim = 16;
  int hidden_dim = 128;
  int encoder_hidden_dim = 128;
  int num_heads = 4;
  // Linear encoder and dynamics (no hidden layer, identity head). Used where
  // the true system is linear and should be exactly representable.
  bool linear = false;
  int target_period = 2;
  double target_blend = 0.01;
};

// Encoder E, shared dynamics backbone with num_heads head layers D_h, reward
// predictor R and critic Q, plus a lagged copy of E and Q.
//
// Parameter names: "enc.*", "dyn.*", "head<h>.*", "rew.*", "q.*".
class WorldModel {
 public:
  WorldModel(const WorldModelConfig& config, Rng& rng);

  const WorldModelConfig& config() const { return config_; }
  int num_heads() const { return config_.num_heads; }
  int latent_dim() const { return config_.latent_dim; }

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  TargetTracker& tracker() { return tracker_; }
  const ParamStore& target() const { return tracker_.shadow(); }

  const DenseNet& encoder() const { return encoder_; }
  const DenseNet& backbone() const { return backbone_; }
  const DenseNet& head(int h) const;
  const DenseNet& reward_net() const { return reward_; }
  const DenseNet& critic() const { return critic_; }

  // Batched inference, one column per sample.
  Matrix Encode(const Matrix& states) const;
  Matrix EncodeTarget(const Matrix& states) const;
  Matrix PredictNext(const Matrix& latents, const Matrix& actions, int head) const;
  Matrix PredictReward(const Matrix& latents, const Matrix& actions) const;
  Matrix QValue(const Matrix& latents, const Matrix& actions) const;
  Matrix QTarget(const Matrix& latents, const Matrix& actions) const;

  // Tape versions; `trainable` controls whether online parameters receive
  // gradient.
  Tape::Var Encode(Tape& tape, Tape::Var states, bool trainable) const;
  Tape::Var PredictNext(Tape& tape, Tape::Var latent_action, int head,
                        bool trainable) const;
  Tape::Var PredictReward(Tape& tape, Tape::Var latent_action,
                          bool trainable) const;
  Tape::Var QValue(Tape& tape, Tape::Var latent_action, bool trainable) const;

  // Parameter-name prefixes of each component.
  static constexpr const char* kEncoderPrefix = "enc.";
  static constexpr const char* kBackbonePrefix = "dyn.";
  static constexpr const char* kRewardPrefix = "rew.";
  static constexpr const char* kCriticPrefix = "q.";
  static std::string HeadPrefix(int h) { return "head" + std::to_string(h) + "."; }

  void ExportTo(TensorArchive& archive, const std::string& prefix) const;
  // Replaces parameters, optimizer state and target with the archived ones.
  // Throws CheckpointError if the archived architecture differs.
  void ImportFrom(const TensorArchive& archive, const std::string& prefix);

 private:
  void CheckHead(int h) const;

  WorldModelConfig config_;
  DenseNet encoder_;
  DenseNet backbone_;
  std::vector<DenseNet> heads_;
  DenseNet reward_;
  DenseNet critic_;
  ParamStore params_;
  TargetTracker tracker_;
};

Matrix ConcatRows(const Matrix& top, const Matrix& bottom);

// Deterministic policy a = tanh(net([z; c])), where c is an optional
// conditioning vector (a one-hot skill for skill-based exploration).
class Actor {
 public:
  Actor() = default;
  Actor(int latent_dim, int condition_dim, int action_dim, int hidden_dim,
        Rng& rng);

  int latent_dim() const { return latent_dim_; }
  int condition_dim() const { return condition_dim_; }
  int action_dim() const { return net_.output_dim(); }

  const DenseNet& net() const { return net_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // `condition` must have condition_dim rows (ignored when condition_dim = 0).
  Matrix Act(const Matrix& latents, const Matrix& condition) const;
  Matrix Act(const ParamStore& params, const Matrix& latents,
             const Matrix& condition) const;
  Tape::Var Act(Tape& tape, Tape::Var latents, const Matrix& condition,
                bool trainable) const;

  Matrix Input(const Matrix& latents, const Matrix& condition) const;

 private:
  int latent_dim_ = 0;
  int condition_dim_ = 0;
  DenseNet net_;
  ParamStore params_;
};

// One column per entry of `indices`; negative indices give zero columns.
Matrix OneHot(const std::vector<int>& indices, int dim);

}  // namespace euclid
