#include "euclid/nn/tape.h"

#include <cmath>

#include "euclid/common/error.h"

namespace euclid {

Tape::Node Tape::MakeNode(Op op, int a, int b, int c) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  n.c = c;
  return n;
}

Tape::Var Tape::Push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::CheckSameShape(Var a, Var b, const char* op) const {
  const Matrix& x = Val(a.id);
  const Matrix& y = Val(b.id);
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw ShapeError(std::string(op) + ": operand shapes differ (" +
                     std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                     " vs " + std::to_string(y.rows()) + "x" +
                     std::to_string(y.cols()) + ")");
  }
}

const Matrix& Tape::value(Var v) const { return Val(v.id); }

double Tape::scalar(Var v) const {
  const Matrix& m = Val(v.id);
  if (m.size() != 1) throw ShapeError("scalar(): node is not 1x1");
  return m(0, 0);
}

Tape::Var Tape::Input(Matrix value) {
  Node n = MakeNode(Op::kInput);
  n.value = std::move(value);
  return Push(std::move(n));
}

Tape::Var Tape::Param(const ParamStore& store, const std::string& name,
                      bool trainable) {
  Node n = MakeNode(Op::kParam);
  n.ref = &store.Get(name);
  n.name = name;
  n.requires_grad = trainable;
  return Push(std::move(n));
}

Tape::Var Tape::Affine(Var weight, Var bias, Var x) {
  const Matrix& w = Val(weight.id);
  const Matrix& b = Val(bias.id);
  const Matrix& in = Val(x.id);
  if (w.cols() != in.rows() || b.rows() != w.rows() || b.cols() != 1) {
    throw ShapeError("affine: expected input with " + std::to_string(w.cols()) +
                     " rows, got " + std::to_string(in.rows()));
  }
  Node n = MakeNode(Op::kAffine, weight.id, bias.id, x.id);
  n.value = w * in;
  n.value.colwise() += b.col(0);
  n.requires_grad = nodes_[weight.id].requires_grad ||
                    nodes_[bias.id].requires_grad || nodes_[x.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::Elu(Var x) {
  Node n = MakeNode(Op::kElu, x.id);
  n.value = Val(x.id).unaryExpr(
      [](double v) { return v > 0.0 ? v : std::expm1(v); });
  n.requires_grad = nodes_[x.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::Tanh(Var x) {
  Node n = MakeNode(Op::kTanh, x.id);
  n.value = Val(x.id).array().tanh().matrix();
  n.requires_grad = nodes_[x.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::Add(Var a, Var b) {
  CheckSameShape(a, b, "add");
  Node n = MakeNode(Op::kAdd, a.id, b.id);
  n.value = Val(a.id) + Val(b.id);
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::Sub(Var a, Var b) {
  CheckSameShape(a, b, "sub");
  Node n = MakeNode(Op::kSub, a.id, b.id);
  n.value = Val(a.id) - Val(b.id);
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::Mul(Var a, Var b) {
  CheckSameShape(a, b, "mul");
  Node n = MakeNode(Op::kMul, a.id, b.id);
  n.value = Val(a.id).cwiseProduct(Val(b.id));
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::Scale(Var a, double factor) {
  Node n = MakeNode(Op::kScale, a.id);
  n.s0 = factor;
  n.value = factor * Val(a.id);
  n.requires_grad = nodes_[a.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::AddScalar(Var a, double offset) {
  Node n = MakeNode(Op::kAddScalar, a.id);
  n.s0 = offset;
  n.value = Val(a.id).array() + offset;
  n.requires_grad = nodes_[a.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::ConcatRows(Var top, Var bottom) {
  const Matrix& t = Val(top.id);
  const Matrix& u = Val(bottom.id);
  if (t.cols() != u.cols()) throw ShapeError("concat: column counts differ");
  Node n = MakeNode(Op::kConcatRows, top.id, bottom.id);
  n.value.resize(t.rows() + u.rows(), t.cols());
  n.value.topRows(t.rows()) = t;
  n.value.bottomRows(u.rows()) = u;
  n.requires_grad =
      nodes_[top.id].requires_grad || nodes_[bottom.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::SquaredNorm(Var x) {
  Node n = MakeNode(Op::kSquaredNorm, x.id);
  n.value = Val(x.id).colwise().squaredNorm();
  n.requires_grad = nodes_[x.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::ColumnSum(Var x) {
  Node n = MakeNode(Op::kColumnSum, x.id);
  n.value = Val(x.id).colwise().sum();
  n.requires_grad = nodes_[x.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::Mean(Var x) {
  const Matrix& in = Val(x.id);
  if (in.size() == 0) throw ShapeError("mean of empty tensor");
  Node n = MakeNode(Op::kMean, x.id);
  n.value = Matrix::Constant(1, 1, in.mean());
  n.requires_grad = nodes_[x.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::Sum(Var x) {
  Node n = MakeNode(Op::kSum, x.id);
  n.value = Matrix::Constant(1, 1, Val(x.id).sum());
  n.requires_grad = nodes_[x.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::Min(Var a, Var b) {
  CheckSameShape(a, b, "min");
  Node n = MakeNode(Op::kMin, a.id, b.id);
  n.value = Val(a.id).cwiseMin(Val(b.id));
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::Clip(Var x, double lo, double hi) {
  Node n = MakeNode(Op::kClip, x.id);
  n.s0 = lo;
  n.s1 = hi;
  n.value = Val(x.id).cwiseMax(lo).cwiseMin(hi);
  n.requires_grad = nodes_[x.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::LogSoftmax(Var x) {
  const Matrix& in = Val(x.id);
  Node n = MakeNode(Op::kLogSoftmax, x.id);
  n.value.resize(in.rows(), in.cols());
  for (Eigen::Index j = 0; j < in.cols(); ++j) {
    const double m = in.col(j).maxCoeff();
    const double lse = m + std::log((in.col(j).array() - m).exp().sum());
    n.value.col(j) = in.col(j).array() - lse;
  }
  n.requires_grad = nodes_[x.id].requires_grad;
  return Push(std::move(n));
}

Tape::Var Tape::Opaque(std::string op_name, std::initializer_list<Var> inputs,
                       Matrix value) {
  Node n = MakeNode(Op::kOpaque);
  n.name = std::move(op_name);
  n.value = std::move(value);
  int slot = 0;
  for (Var v : inputs) {
    if (slot == 0) n.a = v.id;
    if (slot == 1) n.b = v.id;
    if (slot == 2) n.c = v.id;
    ++slot;
    n.requires_grad = n.requires_grad || nodes_[v.id].requires_grad;
  }
  return Push(std::move(n));
}

GradientMap Tape::Backward(Var loss) const {
  if (Val(loss.id).size() != 1) {
    throw ShapeError("backward: loss must be a 1x1 scalar");
  }
  GradientMap grads;
  if (!nodes_[loss.id].requires_grad) return grads;

  std::vector<Matrix> adj(nodes_.size());
  std::vector<char> has(nodes_.size(), 0);
  auto accumulate = [&](int id, const auto& g) {
    if (id < 0 || !nodes_[id].requires_grad) return;
    if (has[id]) {
      adj[id] += g;
    } else {
      adj[id] = g;
      has[id] = 1;
    }
  };
  adj[loss.id] = Matrix::Ones(1, 1);
  has[loss.id] = 1;

  for (int id = loss.id; id >= 0; --id) {
    if (!has[id]) continue;
    const Node& n = nodes_[id];
    const Matrix& g = adj[id];
    switch (n.op) {
      case Op::kInput:
        break;
      case Op::kParam: {
        auto it = grads.find(n.name);
        if (it == grads.end()) {
          grads.emplace(n.name, g);
        } else {
          it->second += g;
        }
        break;
      }
      case Op::kAffine: {
        const Matrix& w = Val(n.a);
        const Matrix& x = Val(n.c);
        if (nodes_[n.a].requires_grad) accumulate(n.a, g * x.transpose());
        if (nodes_[n.b].requires_grad) accumulate(n.b, g.rowwise().sum());
        if (nodes_[n.c].requires_grad) accumulate(n.c, w.transpose() * g);
        break;
      }
      case Op::kElu: {
        const Matrix& x = Val(n.a);
        Matrix d = x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : std::exp(v); });
        accumulate(n.a, g.cwiseProduct(d));
        break;
      }
      case Op::kTanh: {
        const Matrix& y = n.value;
        accumulate(n.a, g.cwiseProduct(
                            (1.0 - y.array().square()).matrix()));
        break;
      }
      case Op::kAdd:
        accumulate(n.a, g);
        accumulate(n.b, g);
        break;
      case Op::kSub:
        accumulate(n.a, g);
        accumulate(n.b, -g);
        break;
      case Op::kMul:
        accumulate(n.a, g.cwiseProduct(Val(n.b)));
        accumulate(n.b, g.cwiseProduct(Val(n.a)));
        break;
      case Op::kScale:
        accumulate(n.a, n.s0 * g);
        break;
      case Op::kAddScalar:
        accumulate(n.a, g);
        break;
      case Op::kConcatRows: {
        const Eigen::Index top = Val(n.a).rows();
        accumulate(n.a, g.topRows(top));
        accumulate(n.b, g.bottomRows(g.rows() - top));
        break;
      }
      case Op::kSquaredNorm: {
        const Matrix& x = Val(n.a);
        Matrix d = 2.0 * x;
        for (Eigen::Index j = 0; j < x.cols(); ++j) d.col(j) *= g(0, j);
        accumulate(n.a, d);
        break;
      }
      case Op::kColumnSum: {
        const Matrix& x = Val(n.a);
        Matrix d(x.rows(), x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) d.col(j).setConstant(g(0, j));
        accumulate(n.a, d);
        break;
      }
      case Op::kMean: {
        const Matrix& x = Val(n.a);
        accumulate(n.a, Matrix::Constant(x.rows(), x.cols(),
                                         g(0, 0) / static_cast<double>(x.size())));
        break;
      }
      case Op::kSum: {
        const Matrix& x = Val(n.a);
        accumulate(n.a, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
        break;
      }
      case Op::kMin: {
        const Matrix& x = Val(n.a);
        const Matrix& y = Val(n.b);
        // Ties route the gradient to the first operand.
        Matrix mask = (x.array() <= y.array()).cast<double>().matrix();
        accumulate(n.a, g.cwiseProduct(mask));
        accumulate(n.b, g.cwiseProduct((1.0 - mask.array()).matrix()));
        break;
      }
      case Op::kClip: {
        const Matrix& x = Val(n.a);
        Matrix mask =
            ((x.array() >= n.s0) && (x.array() <= n.s1)).cast<double>().matrix();
        accumulate(n.a, g.cwiseProduct(mask));
        break;
      }
      case Op::kLogSoftmax: {
        const Matrix& y = n.value;
        Matrix d(y.rows(), y.cols());
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
          const double total = g.col(j).sum();
          d.col(j) = g.col(j).array() - y.col(j).array().exp() * total;
        }
        accumulate(n.a, d);
        break;
      }
      case Op::kOpaque:
        throw UnsupportedOpError("no derivative rule for op '" + n.name + "'");
    }
  }
  return grads;
}

}  // namespace euclid
