#include "euclid/intrinsic/explorer.h"

#include <cmath>

#include "euclid/common/error.h"
#include "euclid/intrinsic/knn.h"
#include "euclid/model/world_model.h"

namespace euclid {
namespace {

void CheckBatch(const LatentBatch& b, int latent_dim, int action_dim) {
  const Eigen::Index n = b.latents.cols();
  if (b.latents.rows() != latent_dim || b.next_latents.rows() != latent_dim ||
      b.next_latents.cols() != n ||
      (action_dim > 0 && (b.actions.rows() != action_dim || b.actions.cols() != n))) {
    throw ShapeError("explorer: malformed latent batch");
  }
}

LatentBatch Resample(const LatentBatch& b, Rng& rng) {
  const Eigen::Index n = b.size();
  LatentBatch out;
  out.latents.resize(b.latents.rows(), n);
  out.actions.resize(b.actions.rows(), n);
  out.next_latents.resize(b.next_latents.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const int src = UniformInt(rng, 0, static_cast<int>(n) - 1);
    out.latents.col(j) = b.latents.col(src);
    out.actions.col(j) = b.actions.col(src);
    out.next_latents.col(j) = b.next_latents.col(src);
  }
  return out;
}

void ImportInto(ParamStore& dst, const TensorArchive& archive,
                const std::string& prefix) {
  ParamStore loaded = ParamStore::ImportFrom(archive, prefix);
  if (!loaded.SameLayout(dst)) {
    throw CheckpointError("explorer architecture differs from checkpoint");
  }
  dst = std::move(loaded);
}

}  // namespace

ExplorerKind ParseExplorerKind(const std::string& name) {
  if (name == "disagreement") return ExplorerKind::kDisagreement;
  if (name == "apt") return ExplorerKind::kApt;
  if (name == "diayn") return ExplorerKind::kDiayn;
  throw ConfigError("unknown explorer '" + name +
                    "' (expected disagreement, apt or diayn)");
}

std::string ExplorerKindName(ExplorerKind kind) {
  switch (kind) {
    case ExplorerKind::kDisagreement:
      return "disagreement";
    case ExplorerKind::kApt:
      return "apt";
    case ExplorerKind::kDiayn:
      return "diayn";
  }
  return "?";
}

std::unique_ptr<Explorer> MakeExplorer(ExplorerKind kind,
                                       const ExplorerConfig& config, Rng& rng) {
  switch (kind) {
    case ExplorerKind::kDisagreement:
      return std::make_unique<DisagreementExplorer>(config, rng);
    case ExplorerKind::kApt:
      return std::make_unique<AptExplorer>(config);
    case ExplorerKind::kDiayn:
      return std::make_unique<DiaynExplorer>(config, rng);
  }
  throw ConfigError("unknown explorer kind");
}

// ------------------------------------------------------------ disagreement

DisagreementExplorer::DisagreementExplorer(const ExplorerConfig& config, Rng& rng)
    : config_(config),
      net_("g", {config.latent_dim + config.action_dim, config.hidden_dim,
                 config.latent_dim}) {
  if (config.ensemble_size < 1) throw ConfigError("ensemble_size must be >= 1");
  members_.resize(static_cast<std::size_t>(config.ensemble_size));
  for (auto& m : members_) net_.Init(m, rng);
}

Matrix DisagreementExplorer::Predict(int i, const Matrix& latents,
                                     const Matrix& actions) const {
  return net_.Forward(member(i), ConcatRows(latents, actions));
}

Matrix DisagreementExplorer::Reward(const LatentBatch& batch) const {
  CheckBatch(batch, config_.latent_dim, config_.action_dim);
  const Matrix input = ConcatRows(batch.latents, batch.actions);
  // Welford accumulation: identical predictions give exactly zero variance.
  Matrix mean = Matrix::Zero(config_.latent_dim, batch.size());
  Matrix m2 = mean;
  double n = 0.0;
  for (const auto& m : members_) {
    const Matrix p = net_.Forward(m, input);
    n += 1.0;
    const Matrix delta = p - mean;
    mean += delta / n;
    m2 += delta.cwiseProduct(p - mean);
  }
  return (m2 / n).colwise().mean();
}

DisagreementExplorer::LossResult DisagreementExplorer::MemberLoss(
    int i, const LatentBatch& batch, bool with_grads) const {
  CheckBatch(batch, config_.latent_dim, config_.action_dim);
  Tape tape;
  Tape::Var pred = net_.Forward(tape, member(i),
                                tape.Input(ConcatRows(batch.latents, batch.actions)),
                                true);
  Tape::Var loss =
      tape.Mean(tape.SquaredNorm(tape.Sub(pred, tape.Input(batch.next_latents))));
  LossResult out;
  out.loss = tape.scalar(loss);
  if (with_grads) out.grads = tape.Backward(loss);
  return out;
}

double DisagreementExplorer::UpdateMembers(
    const std::vector<LatentBatch>& member_batches) {
  if (member_batches.size() != members_.size()) {
    throw ShapeError("disagreement: one batch per member expected");
  }
  double total = 0.0;
  int trained = 0;
  for (int i = 0; i < size(); ++i) {
    const LatentBatch& b = member_batches[static_cast<std::size_t>(i)];
    if (b.size() == 0) continue;
    LossResult r = MemberLoss(i, b);
    member(i).AdamStep(r.grads, config_.lr);
    total += r.loss;
    ++trained;
  }
  return trained > 0 ? total / trained : 0.0;
}

double DisagreementExplorer::Update(const LatentBatch& batch, Rng& rng) {
  std::vector<LatentBatch> per_member;
  for (int i = 0; i < size(); ++i) per_member.push_back(Resample(batch, rng));
  return UpdateMembers(per_member);
}

void DisagreementExplorer::ExportTo(TensorArchive& archive,
                                    const std::string& prefix) const {
  for (int i = 0; i < size(); ++i) {
    member(i).ExportTo(archive, prefix + "/m" + std::to_string(i));
  }
}

void DisagreementExplorer::ImportFrom(const TensorArchive& archive,
                                      const std::string& prefix) {
  for (int i = 0; i < size(); ++i) {
    ImportInto(member(i), archive, prefix + "/m" + std::to_string(i));
  }
}

// --------------------------------------------------------------------- apt

Matrix AptReward(const Matrix& latents, const Matrix& references, int k,
                 double eps) {
  Matrix raw = KnnLogDistance(latents, references, k, eps);
  return (raw.array().max(0.0) + 1.0).log().matrix();
}

AptExplorer::AptExplorer(const ExplorerConfig& config) : config_(config) {
  if (config.knn_k < 1) throw ConfigError("knn_k must be >= 1");
}

Matrix AptExplorer::Reward(const LatentBatch& batch) const {
  CheckBatch(batch, config_.latent_dim, 0);
  Matrix raw = KnnLogDistance(batch.next_latents, batch.next_latents, config_.knn_k,
                              config_.knn_eps, /*exclude_self=*/true);
  return (raw.array().max(0.0) + 1.0).log().matrix();
}

void AptExplorer::ExportTo(TensorArchive& archive, const std::string& prefix) const {
  archive.PutScalar(prefix + "/k", config_.knn_k);
}

void AptExplorer::ImportFrom(const TensorArchive& archive, const std::string& prefix) {
  if (static_cast<int>(archive.GetScalar(prefix + "/k")) != config_.knn_k) {
    throw CheckpointError("apt: k differs from checkpoint");
  }
}

// ------------------------------------------------------------------- diayn

DiaynExplorer::DiaynExplorer(const ExplorerConfig& config, Rng& rng)
    : config_(config),
      net_("disc", {config.latent_dim, config.hidden_dim, config.skill_dim}) {
  if (config.skill_dim < 2) throw ConfigError("skill_dim must be >= 2");
  if (config.skill_period < 1) throw ConfigError("skill_period must be >= 1");
  net_.Init(params_, rng);
}

void DiaynExplorer::set_skill(int skill) {
  if (skill < 0 || skill >= config_.skill_dim) throw RangeError("skill out of range");
  skill_ = skill;
}

void DiaynExplorer::OnEnvStep(std::int64_t step, Rng& rng) {
  if (step % config_.skill_period == 0) {
    skill_ = UniformInt(rng, 0, config_.skill_dim - 1);
  }
}

Matrix DiaynExplorer::Logits(const Matrix& latents) const {
  return net_.Forward(params_, latents);
}

Matrix DiaynExplorer::Reward(const LatentBatch& batch) const {
  CheckBatch(batch, config_.latent_dim, 0);
  if (batch.skills.size() != static_cast<std::size_t>(batch.size())) {
    throw ShapeError("diayn: one skill per sample expected");
  }
  const Matrix logits = Logits(batch.next_latents);
  const double log_k = std::log(static_cast<double>(config_.skill_dim));
  Matrix out(1, batch.size());
  for (Eigen::Index j = 0; j < batch.size(); ++j) {
    const int w = batch.skills[static_cast<std::size_t>(j)];
    if (w < 0 || w >= config_.skill_dim) throw RangeError("diayn: bad skill index");
    const double m = logits.col(j).maxCoeff();
    const double lse = m + std::log((logits.col(j).array() - m).exp().sum());
    out(0, j) = logits(w, j) - lse + log_k;
  }
  return out;
}

DiaynExplorer::LossResult DiaynExplorer::DiscriminatorLoss(const LatentBatch& batch,
                                                          bool with_grads) const {
  CheckBatch(batch, config_.latent_dim, 0);
  for (int w : batch.skills) {
    if (w < 0 || w >= config_.skill_dim) throw RangeError("diayn: bad skill index");
  }
  Tape tape;
  Tape::Var logits = net_.Forward(tape, params_, tape.Input(batch.next_latents), true);
  Tape::Var picked = tape.ColumnSum(
      tape.Mul(tape.LogSoftmax(logits), tape.Input(OneHot(batch.skills, config_.skill_dim))));
  Tape::Var loss = tape.Scale(tape.Mean(picked), -1.0);
  LossResult out;
  out.loss = tape.scalar(loss);
  if (with_grads) out.grads = tape.Backward(loss);
  return out;
}

double DiaynExplorer::Update(const LatentBatch& batch, Rng&) {
  LossResult r = DiscriminatorLoss(batch);
  params_.AdamStep(r.grads, config_.lr);
  return r.loss;
}

void DiaynExplorer::ExportTo(TensorArchive& archive, const std::string& prefix) const {
  params_.ExportTo(archive, prefix);
  archive.PutScalar(prefix + "@skill", skill_);
}

void DiaynExplorer::ImportFrom(const TensorArchive& archive, const std::string& prefix) {
  ImportInto(params_, archive, prefix);
  set_skill(static_cast<int>(archive.GetScalar(prefix + "@skill")));
}

}  // namespace euclid
