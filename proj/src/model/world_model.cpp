#include "euclid/model/world_model.h"

#include "euclid/common/error.h"

namespace euclid {

Matrix ConcatRows(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols()) throw ShapeError("concat: column counts differ");
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

Matrix OneHot(const std::vector<int>& indices, int dim) {
  Matrix out = Matrix::Zero(dim, static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (indices[j] >= dim) throw RangeError("one-hot index out of range");
    if (indices[j] >= 0) out(indices[j], static_cast<Eigen::Index>(j)) = 1.0;
  }
  return out;
}

WorldModel::WorldModel(const WorldModelConfig& config, Rng& rng)
    : config_(config) {
  if (config.num_heads < 1) throw ConfigError("num_heads must be >= 1");
  if (config.state_dim <= 0 || config.action_dim <= 0 || config.latent_dim <= 0) {
    throw ConfigError("world model dims must be positive");
  }
  const int za = config.latent_dim + config.action_dim;
  const int hid = config.hidden_dim;
  if (config.linear) {
    encoder_ = DenseNet("enc", {config.state_dim, config.latent_dim});
    // Identity-activated single layer; heads are the linear map itself.
    backbone_ = DenseNet("dyn", {za, config.latent_dim});
    for (int h = 0; h < config.num_heads; ++h) {
      heads_.emplace_back("head" + std::to_string(h),
                          std::vector<int>{config.latent_dim, config.latent_dim});
    }
  } else {
    encoder_ = DenseNet("enc",
                        {config.state_dim, config.encoder_hidden_dim, config.latent_dim});
    backbone_ = DenseNet("dyn", {za, hid, hid}, OutputActivation::kElu);
    for (int h = 0; h < config.num_heads; ++h) {
      heads_.emplace_back("head" + std::to_string(h),
                          std::vector<int>{hid, config.latent_dim});
    }
  }
  reward_ = DenseNet("rew", {za, hid, 1});
  critic_ = DenseNet("q", {za, hid, hid, 1});

  encoder_.Init(params_, rng);
  backbone_.Init(params_, rng);
  for (const auto& head : heads_) head.Init(params_, rng);
  reward_.Init(params_, rng);
  critic_.Init(params_, rng);
  tracker_ = TargetTracker(params_, {kEncoderPrefix, kCriticPrefix},
                           config.target_period, config.target_blend);
}

void WorldModel::CheckHead(int h) const {
  if (h < 0 || h >= config_.num_heads) {
    throw RangeError("head " + std::to_string(h) + " out of range [0, " +
                     std::to_string(config_.num_heads) + ")");
  }
}

const DenseNet& WorldModel::head(int h) const {
  CheckHead(h);
  return heads_[static_cast<std::size_t>(h)];
}

Matrix WorldModel::Encode(const Matrix& states) const {
  return encoder_.Forward(params_, states);
}

Matrix WorldModel::EncodeTarget(const Matrix& states) const {
  return encoder_.Forward(target(), states);
}

Matrix WorldModel::PredictNext(const Matrix& latents, const Matrix& actions,
                               int h) const {
  CheckHead(h);
  const Matrix hidden = backbone_.Forward(params_, ConcatRows(latents, actions));
  return heads_[static_cast<std::size_t>(h)].Forward(params_, hidden);
}

Matrix WorldModel::PredictReward(const Matrix& latents,
                                 const Matrix& actions) const {
  return reward_.Forward(params_, ConcatRows(latents, actions));
}

Matrix WorldModel::QValue(const Matrix& latents, const Matrix& actions) const {
  return critic_.Forward(params_, ConcatRows(latents, actions));
}

Matrix WorldModel::QTarget(const Matrix& latents, const Matrix& actions) const {
  return critic_.Forward(target(), ConcatRows(latents, actions));
}

Tape::Var WorldModel::Encode(Tape& tape, Tape::Var states, bool trainable) const {
  return encoder_.Forward(tape, params_, states, trainable);
}

Tape::Var WorldModel::PredictNext(Tape& tape, Tape::Var latent_action, int h,
                                  bool trainable) const {
  CheckHead(h);
  Tape::Var hidden = backbone_.Forward(tape, params_, latent_action, trainable);
  return heads_[static_cast<std::size_t>(h)].Forward(tape, params_, hidden,
                                                     trainable);
}

Tape::Var WorldModel::PredictReward(Tape& tape, Tape::Var latent_action,
                                    bool trainable) const {
  return reward_.Forward(tape, params_, latent_action, trainable);
}

Tape::Var WorldModel::QValue(Tape& tape, Tape::Var latent_action,
                             bool trainable) const {
  return critic_.Forward(tape, params_, latent_action, trainable);
}

void WorldModel::ExportTo(TensorArchive& archive,
                          const std::string& prefix) const {
  params_.ExportTo(archive, prefix);
  tracker_.shadow().ExportTo(archive, prefix + "_target");
  archive.PutScalar(prefix + "_target@calls",
                    static_cast<double>(tracker_.calls()));
}

void WorldModel::ImportFrom(const TensorArchive& archive,
                            const std::string& prefix) {
  ParamStore loaded = ParamStore::ImportFrom(archive, prefix);
  ParamStore target = ParamStore::ImportFrom(archive, prefix + "_target");
  if (!loaded.SameLayout(params_) || !target.SameLayout(tracker_.shadow())) {
    throw CheckpointError("world model architecture differs from checkpoint");
  }
  params_ = std::move(loaded);
  tracker_.mutable_shadow() = std::move(target);
  tracker_.set_calls(
      static_cast<std::int64_t>(archive.GetScalar(prefix + "_target@calls")));
}

// -------------------------------------------------------------------- actor

Actor::Actor(int latent_dim, int condition_dim, int action_dim, int hidden_dim,
             Rng& rng)
    : latent_dim_(latent_dim), condition_dim_(condition_dim) {
  net_ = DenseNet("pi", {latent_dim + condition_dim, hidden_dim, action_dim},
                  OutputActivation::kTanh);
  net_.Init(params_, rng);
}

Matrix Actor::Input(const Matrix& latents, const Matrix& condition) const {
  if (condition_dim_ == 0) return latents;
  if (condition.rows() != condition_dim_ || condition.cols() != latents.cols()) {
    throw ShapeError("actor condition has wrong shape");
  }
  return ConcatRows(latents, condition);
}

Matrix Actor::Act(const Matrix& latents, const Matrix& condition) const {
  return net_.Forward(params_, Input(latents, condition));
}

Matrix Actor::Act(const ParamStore& params, const Matrix& latents,
                  const Matrix& condition) const {
  return net_.Forward(params, Input(latents, condition));
}

Tape::Var Actor::Act(Tape& tape, Tape::Var latents, const Matrix& condition,
                     bool trainable) const {
  Tape::Var in = latents;
  if (condition_dim_ > 0) {
    if (condition.rows() != condition_dim_ ||
        condition.cols() != tape.value(latents).cols()) {
      throw ShapeError("actor condition has wrong shape");
    }
    in = tape.ConcatRows(latents, tape.Input(condition));
  }
  return net_.Forward(tape, params_, in, trainable);
}

}  // namespace euclid
