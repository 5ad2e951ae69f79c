#pragma once

#include <string>
#include <vector>

#include "euclid/common/rng.h"
#include "euclid/nn/param_store.h"
#include "euclid/nn/tape.h"

namespace euclid {

enum class OutputActivation { kIdentity, kTanh, kElu };

// Stack of affine layers with ELU between them. The net owns no parameters:
// weights live in a ParamStore under "<name>.w<i>" / "<name>.b<i>", so one
// architecture can be evaluated against online, target, or snapshot stores.
class DenseNet {
 public:
  DenseNet() = default;
  DenseNet(std::string name, std::vector<int> layer_dims,
           OutputActivation output = OutputActivation::kIdentity);

  const std::string& name() const { return name_; }
  const std::vector<int>& layer_dims() const { return dims_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  int num_layers() const { return static_cast<int>(dims_.size()) - 1; }
  OutputActivation output_activation() const { return output_; }

  std::string WeightName(int layer) const;
  std::string BiasName(int layer) const;

  // Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) weights and biases.
  void Init(ParamStore& store, Rng& rng) const;
  void InitZero(ParamStore& store) const;

  // Batched inference; x has one column per sample.
  Matrix Forward(const ParamStore& store, const Matrix& x) const;
  Tape::Var Forward(Tape& tape, const ParamStore& store, Tape::Var x,
                    bool trainable) const;

 private:
  std::string name_;
  std::vector<int> dims_;
  OutputActivation output_ = OutputActivation::kIdentity;
};

// In-place ELU used by the inference paths.
void EluInPlace(Matrix& m);

}  // namespace euclid
