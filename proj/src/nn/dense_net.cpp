#include "euclid/nn/dense_net.h"

#include <cmath>

#include "euclid/common/error.h"

namespace euclid {

DenseNet::DenseNet(std::string name, std::vector<int> layer_dims,
                   OutputActivation output)
    : name_(std::move(name)), dims_(std::move(layer_dims)), output_(output) {
  if (dims_.size() < 2) throw ShapeError("dense net needs at least one layer");
  for (int d : dims_) {
    if (d <= 0) throw ShapeError("layer dims must be positive");
  }
}

std::string DenseNet::WeightName(int layer) const {
  return name_ + ".w" + std::to_string(layer);
}

std::string DenseNet::BiasName(int layer) const {
  return name_ + ".b" + std::to_string(layer);
}

void DenseNet::Init(ParamStore& store, Rng& rng) const {
  for (int l = 0; l < num_layers(); ++l) {
    const double bound = std::sqrt(1.0 / dims_[l]);
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(dims_[l + 1], dims_[l]);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
    Matrix b(dims_[l + 1], 1);
    for (Eigen::Index r = 0; r < b.rows(); ++r) b(r, 0) = dist(rng);
    store.Add(WeightName(l), std::move(w));
    store.Add(BiasName(l), std::move(b));
  }
}

void DenseNet::InitZero(ParamStore& store) const {
  for (int l = 0; l < num_layers(); ++l) {
    store.Add(WeightName(l), Matrix::Zero(dims_[l + 1], dims_[l]));
    store.Add(BiasName(l), Matrix::Zero(dims_[l + 1], 1));
  }
}

void EluInPlace(Matrix& m) {
  m = m.unaryExpr([](double v) { return v > 0.0 ? v : std::expm1(v); });
}

Matrix DenseNet::Forward(const ParamStore& store, const Matrix& x) const {
  if (x.rows() != input_dim()) {
    throw ShapeError(name_ + ": expected input dim " +
                     std::to_string(input_dim()) + ", got " +
                     std::to_string(x.rows()));
  }
  Matrix h = x;
  for (int l = 0; l < num_layers(); ++l) {
    Matrix next = store.Get(WeightName(l)) * h;
    next.colwise() += store.Get(BiasName(l)).col(0);
    h = std::move(next);
    const bool last = l + 1 == num_layers();
    if (!last || output_ == OutputActivation::kElu) {
      EluInPlace(h);
    } else if (output_ == OutputActivation::kTanh) {
      h = h.array().tanh().matrix();
    }
  }
  return h;
}

Tape::Var DenseNet::Forward(Tape& tape, const ParamStore& store, Tape::Var x,
                            bool trainable) const {
  if (tape.value(x).rows() != input_dim()) {
    throw ShapeError(name_ + ": expected input dim " +
                     std::to_string(input_dim()) + ", got " +
                     std::to_string(tape.value(x).rows()));
  }
  Tape::Var h = x;
  for (int l = 0; l < num_layers(); ++l) {
    Tape::Var w = tape.Param(store, WeightName(l), trainable);
    Tape::Var b = tape.Param(store, BiasName(l), trainable);
    h = tape.Affine(w, b, h);
    const bool last = l + 1 == num_layers();
    if (!last || output_ == OutputActivation::kElu) {
      h = tape.Elu(h);
    } else if (output_ == OutputActivation::kTanh) {
      h = tape.Tanh(h);
    }
  }
  return h;
}

}  // namespace euclid
