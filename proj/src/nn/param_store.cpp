#include "euclid/nn/param_store.h"

#include <cmath>

#include "euclid/common/error.h"

namespace euclid {

void ParamStore::Add(const std::string& name, Matrix value) {
  Slot slot;
  slot.first_moment = Matrix::Zero(value.rows(), value.cols());
  slot.second_moment = Matrix::Zero(value.rows(), value.cols());
  slot.value = std::move(value);
  slots_[name] = std::move(slot);
}

bool ParamStore::Has(std::string_view name) const {
  return slots_.find(name) != slots_.end();
}

const ParamStore::Slot& ParamStore::slot(std::string_view name) const {
  auto it = slots_.find(name);
  if (it == slots_.end()) {
    throw GradientKeyError("no parameter named '" + std::string(name) + "'");
  }
  return it->second;
}

const Matrix& ParamStore::Get(std::string_view name) const {
  return slot(name).value;
}

Matrix& ParamStore::Mutable(std::string_view name) {
  auto it = slots_.find(name);
  if (it == slots_.end()) {
    throw GradientKeyError("no parameter named '" + std::string(name) + "'");
  }
  return it->second.value;
}

std::size_t ParamStore::NumScalars() const {
  std::size_t n = 0;
  for (const auto& [name, s] : slots_) n += static_cast<std::size_t>(s.value.size());
  return n;
}

void ParamStore::AdamStep(const GradientMap& grads, double learning_rate,
                          const AdamConfig& config) {
  for (const auto& [name, g] : grads) {
    auto it = slots_.find(name);
    if (it == slots_.end()) {
      throw GradientKeyError("gradient for unknown parameter '" + name + "'");
    }
    if (g.rows() != it->second.value.rows() ||
        g.cols() != it->second.value.cols()) {
      throw ShapeError("gradient shape mismatch for '" + name + "'");
    }
  }
  for (const auto& [name, g] : grads) {
    Slot& s = slots_.find(name)->second;
    ++s.updates;
    s.first_moment = config.beta1 * s.first_moment + (1.0 - config.beta1) * g;
    s.second_moment = config.beta2 * s.second_moment +
                      (1.0 - config.beta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(s.updates));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(s.updates));
    s.value.array() -= learning_rate * (s.first_moment.array() / c1) /
                       ((s.second_moment.array() / c2).sqrt() + config.epsilon);
  }
  ++step_;
}

void ParamStore::CopyValuesFrom(const ParamStore& other,
                                std::string_view prefix) {
  for (const auto& [name, s] : other.slots_) {
    if (!name.starts_with(prefix)) continue;
    auto it = slots_.find(name);
    if (it == slots_.end()) {
      throw CheckpointError("parameter '" + name + "' missing in destination");
    }
    if (it->second.value.rows() != s.value.rows() ||
        it->second.value.cols() != s.value.cols()) {
      throw CheckpointError("shape mismatch copying '" + name + "'");
    }
    it->second.value = s.value;
  }
}

void ParamStore::ResetOptimizerState() {
  for (auto& [name, s] : slots_) {
    s.first_moment.setZero();
    s.second_moment.setZero();
    s.updates = 0;
  }
  step_ = 0;
}

void ParamStore::ExportTo(TensorArchive& archive,
                          std::string_view prefix) const {
  const std::string p(prefix);
  archive.PutScalar(p + "@step", static_cast<double>(step_));
  for (const auto& [name, s] : slots_) {
    archive.Put(p + "/" + name, s.value);
    archive.Put(p + "/" + name + "@adam_m", s.first_moment);
    archive.Put(p + "/" + name + "@adam_v", s.second_moment);
    archive.PutScalar(p + "/" + name + "@updates",
                      static_cast<double>(s.updates));
  }
}

ParamStore ParamStore::ImportFrom(const TensorArchive& archive,
                                  std::string_view prefix) {
  ParamStore store;
  const std::string p = std::string(prefix) + "/";
  store.step_ =
      static_cast<std::int64_t>(archive.GetScalar(std::string(prefix) + "@step"));
  for (const auto& e : archive.entries()) {
    if (!e.name.starts_with(p)) continue;
    if (e.name.find('@') != std::string::npos) continue;
    const std::string name = e.name.substr(p.size());
    Slot slot;
    slot.value = e.value;
    slot.first_moment = archive.Get(e.name + "@adam_m");
    slot.second_moment = archive.Get(e.name + "@adam_v");
    slot.updates =
        static_cast<std::int64_t>(archive.GetScalar(e.name + "@updates"));
    store.slots_[name] = std::move(slot);
  }
  return store;
}

bool ParamStore::SameLayout(const ParamStore& other) const {
  if (slots_.size() != other.slots_.size()) return false;
  for (const auto& [name, s] : slots_) {
    auto it = other.slots_.find(name);
    if (it == other.slots_.end() || it->second.value.rows() != s.value.rows() ||
        it->second.value.cols() != s.value.cols()) {
      return false;
    }
  }
  return true;
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (step_ != other.step_ || slots_.size() != other.slots_.size()) return false;
  auto it = other.slots_.begin();
  for (const auto& [name, s] : slots_) {
    if (name != it->first) return false;
    const Slot& o = it->second;
    if (s.updates != o.updates || s.value.rows() != o.value.rows() ||
        s.value.cols() != o.value.cols() || s.value != o.value ||
        s.first_moment != o.first_moment || s.second_moment != o.second_moment) {
      return false;
    }
    ++it;
  }
  return true;
}

TargetTracker::TargetTracker(const ParamStore& source,
                             std::vector<std::string> prefixes, int period,
                             double blend)
    : prefixes_(std::move(prefixes)), period_(period), blend_(blend) {
  if (period < 1) throw ConfigError("target period must be >= 1");
  if (blend < 0.0 || blend > 1.0) {
    throw ConfigError("target blend must lie in [0, 1]");
  }
  for (const auto& [name, s] : source.slots()) {
    if (Selected(name)) shadow_.Add(name, s.value);
  }
}

bool TargetTracker::Selected(std::string_view name) const {
  for (const auto& p : prefixes_) {
    if (name.starts_with(p)) return true;
  }
  return false;
}

void TargetTracker::Track(const ParamStore& source) {
  ++calls_;
  if (calls_ % period_ != 0) return;
  for (const auto& [name, s] : shadow_.slots()) {
    const Matrix& src = source.Get(name);
    Matrix& dst = shadow_.Mutable(name);
    if (src.rows() != dst.rows() || src.cols() != dst.cols()) {
      throw ShapeError("target shape mismatch for '" + name + "'");
    }
    if (blend_ == 1.0) {
      dst = src;
    } else if (blend_ != 0.0) {
      dst = (1.0 - blend_) * dst + blend_ * src;
    }
  }
}

void TargetTracker::HardCopy(const ParamStore& source) {
  for (const auto& [name, s] : shadow_.slots()) {
    const Matrix& src = source.Get(name);
    Matrix& dst = shadow_.Mutable(name);
    if (src.rows() != dst.rows() || src.cols() != dst.cols()) {
      throw ShapeError("target shape mismatch for '" + name + "'");
    }
    dst = src;
  }
}

}  // namespace euclid
