#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "euclid/nn/archive.h"
#include "euclid/nn/types.h"

namespace euclid {

using GradientMap = std::map<std::string, Matrix>;

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Named parameter tensors plus their Adam state.
class ParamStore {
 public:
  struct Slot {
    Matrix value;
    Matrix first_moment;
    Matrix second_moment;
    std::int64_t updates = 0;  // per-tensor count used for bias correction
  };

  void Add(const std::string& name, Matrix value);
  bool Has(std::string_view name) const;
  const Matrix& Get(std::string_view name) const;
  Matrix& Mutable(std::string_view name);
  const Slot& slot(std::string_view name) const;

  const std::map<std::string, Slot, std::less<>>& slots() const { return slots_; }
  std::int64_t step() const { return step_; }
  std::size_t NumScalars() const;

  // Adam update on the tensors present in `grads`. Tensors without a
  // gradient keep their value and moments bitwise. Unknown keys or shape
  // mismatches raise GradientKeyError / ShapeError before anything changes.
  void AdamStep(const GradientMap& grads, double learning_rate,
                const AdamConfig& config = {});

  // Copies values (not optimizer state) of every tensor whose name starts
  // with `prefix` from `other`. Shapes must match.
  void CopyValuesFrom(const ParamStore& other, std::string_view prefix);
  void ResetOptimizerState();

  void ExportTo(TensorArchive& archive, std::string_view prefix) const;
  static ParamStore ImportFrom(const TensorArchive& archive,
                               std::string_view prefix);

  // Same tensor names and shapes.
  bool SameLayout(const ParamStore& other) const;

  bool operator==(const ParamStore& other) const;

 private:
  std::map<std::string, Slot, std::less<>> slots_;
  std::int64_t step_ = 0;
};

// Lagged copy of a subset of a ParamStore (all tensors whose name starts with
// one of `prefixes`). Every `period` calls to Track, the shadow moves toward
// the source: shadow <- (1 - blend) * shadow + blend * source.
class TargetTracker {
 public:
  TargetTracker() = default;
  TargetTracker(const ParamStore& source, std::vector<std::string> prefixes,
                int period, double blend);

  void Track(const ParamStore& source);
  void HardCopy(const ParamStore& source);

  const ParamStore& shadow() const { return shadow_; }
  ParamStore& mutable_shadow() { return shadow_; }
  int period() const { return period_; }
  double blend() const { return blend_; }
  std::int64_t calls() const { return calls_; }
  void set_calls(std::int64_t calls) { calls_ = calls; }

 private:
  bool Selected(std::string_view name) const;

  ParamStore shadow_;
  std::vector<std::string> prefixes_;
  int period_ = 1;
  double blend_ = 1.0;
  std::int64_t calls_ = 0;
};

}  // namespace euclid
