#pragma once

#include <initializer_list>
#include <string>
#include <vector>

#include "euclid/nn/param_store.h"
#include "euclid/nn/types.h"

namespace euclid {

// Reverse-mode differentiation over a closed set of batched primitives.
// Values are matrices with one column per sample; losses are 1x1 nodes.
//
// Parameter leaves are registered as trainable or frozen. Frozen leaves
// (target networks, a critic seen from the actor loss, ...) act as constants:
// Backward never reports a gradient for them and never propagates through
// them.
class Tape {
 public:
  struct Var {
    int id = -1;
  };

  enum class Op {
    kInput,
    kParam,
    kAffine,
    kElu,
    kTanh,
    kAdd,
    kSub,
    kMul,
    kScale,
    kAddScalar,
    kConcatRows,
    kSquaredNorm,  // per column: 1 x B
    kColumnSum,    // per column: 1 x B
    kMean,         // over all entries: 1 x 1
    kSum,          // over all entries: 1 x 1
    kMin,
    kClip,
    kLogSoftmax,   // per column
    kOpaque,       // value supplied by the caller; no derivative rule
  };

  Tape() { nodes_.reserve(256); }

  Var Input(Matrix value);
  Var Param(const ParamStore& store, const std::string& name, bool trainable);

  Var Affine(Var weight, Var bias, Var x);
  Var Elu(Var x);
  Var Tanh(Var x);
  Var Add(Var a, Var b);
  Var Sub(Var a, Var b);
  Var Mul(Var a, Var b);
  Var Scale(Var a, double factor);
  Var AddScalar(Var a, double offset);
  Var ConcatRows(Var top, Var bottom);
  Var SquaredNorm(Var x);
  Var ColumnSum(Var x);
  Var Mean(Var x);
  Var Sum(Var x);
  Var Min(Var a, Var b);
  Var Clip(Var x, double lo, double hi);
  Var LogSoftmax(Var x);
  // Records a value computed outside the tape from `inputs`. Backward raises
  // UnsupportedOpError if a gradient has to flow through it.
  Var Opaque(std::string op_name, std::initializer_list<Var> inputs,
             Matrix value);

  const Matrix& value(Var v) const;
  double scalar(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // d loss / d p for every trainable parameter leaf reachable from `loss`.
  // `loss` must be 1x1.
  GradientMap Backward(Var loss) const;

 private:
  struct Node {
    Op op = Op::kInput;
    int a = -1;
    int b = -1;
    int c = -1;
    double s0 = 0.0;
    double s1 = 0.0;
    Matrix value;
    const Matrix* ref = nullptr;  // parameter leaves alias the store
    std::string name;             // parameter name or opaque op name
    bool requires_grad = false;
  };

  const Matrix& Val(int id) const {
    const Node& n = nodes_[id];
    return n.ref ? *n.ref : n.value;
  }
  static Node MakeNode(Op op, int a = -1, int b = -1, int c = -1);
  Var Push(Node node);
  void CheckSameShape(Var a, Var b, const char* op) const;

  std::vector<Node> nodes_;
};

}  // namespace euclid
