#include <cmath>

#include "doctest.h"
#include "euclid/common/error.h"
#include "euclid/nn/archive.h"
#include "euclid/nn/dense_net.h"
#include "euclid/nn/param_store.h"
#include "euclid/nn/tape.h"
#include "support/gradcheck.h"
#include "support/naive_forward.h"

using namespace euclid;

using testing::NaiveForward;

TEST_CASE("forward: identity and zero-weight layers") {
  DenseNet net("f", {2, 2});
  ParamStore store;
  net.InitZero(store);
  store.Mutable("f.w0") = Matrix::Identity(2, 2);
  Matrix x(2, 1);
  x << 1, 2;
  CHECK(net.Forward(store, x) == x);

  DenseNet bias_only("g", {2, 1});
  ParamStore s2;
  bias_only.InitZero(s2);
  s2.Mutable("g.b0")(0, 0) = 3.0;
  Matrix any(2, 1);
  any << -7.5, 12.0;
  CHECK(bias_only.Forward(s2, any)(0, 0) == 3.0);
}

TEST_CASE("forward: two-layer net matches the straight-line oracle") {
  Rng rng(11);
  DenseNet net("n", {3, 5, 2}, OutputActivation::kTanh);
  ParamStore store;
  net.Init(store, rng);
  Matrix x(3, 1);
  x << 0.3, -1.2, 0.8;
  const Matrix y = net.Forward(store, x);
  const auto oracle = NaiveForward(net, store, {0.3, -1.2, 0.8});
  for (int i = 0; i < 2; ++i) CHECK(std::abs(y(i, 0) - oracle[i]) < 1e-12);
  // Determinism: bitwise equal on repeat.
  CHECK(net.Forward(store, x) == y);
}

TEST_CASE("forward: dimension mismatch is a shape error") {
  DenseNet net("n", {3, 2});
  ParamStore store;
  net.InitZero(store);
  CHECK_THROWS_AS(net.Forward(store, Matrix::Zero(2, 1)), ShapeError);
  Tape tape;
  CHECK_THROWS_AS(net.Forward(tape, store, tape.Input(Matrix::Zero(4, 1)), true),
                  ShapeError);
}

TEST_CASE("backward: quadratic gradient") {
  ParamStore store;
  Matrix x(2, 1);
  x << 3, 4;
  store.Add("x", x);
  Tape tape;
  auto loss = tape.Sum(tape.SquaredNorm(tape.Param(store, "x", true)));
  CHECK(tape.scalar(loss) == 25.0);
  auto g = tape.Backward(loss);
  CHECK(g.at("x")(0, 0) == 6.0);
  CHECK(g.at("x")(1, 0) == 8.0);
}

TEST_CASE("backward: every primitive matches finite differences") {
  Rng rng(5);
  DenseNet a("a", {4, 6, 3}, OutputActivation::kTanh);
  DenseNet b("b", {4, 6, 3}, OutputActivation::kElu);
  ParamStore store;
  a.Init(store, rng);
  b.Init(store, rng);
  Matrix x(4, 7);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = Gaussian(rng);
  Matrix onehot = Matrix::Zero(3, 7);
  for (int j = 0; j < 7; ++j) onehot(j % 3, j) = 1.0;

  auto build = [&](Tape& t) {
    auto in = t.Input(x);
    auto ya = a.Forward(t, store, in, true);
    auto yb = b.Forward(t, store, in, true);
    auto mixed = t.Add(t.Mul(ya, yb), t.Scale(t.Sub(ya, yb), 0.7));
    auto clipped = t.Clip(t.AddScalar(mixed, 0.1), -0.5, 0.5);
    auto lo = t.Min(ya, yb);
    auto cat = t.ConcatRows(clipped, lo);
    auto sq = t.Mean(t.SquaredNorm(cat));
    auto ce = t.Mean(t.ColumnSum(t.Mul(t.Input(onehot), t.LogSoftmax(yb))));
    return t.Add(sq, t.Scale(ce, -1.0));
  };
  Tape tape;
  auto loss = build(tape);
  const GradientMap grads = tape.Backward(loss);
  auto eval = [&] {
    Tape t;
    return t.scalar(build(t));
  };
  const auto res = testing::CheckGradients(store, grads, eval);
  INFO(res.worst_entry);
  CHECK(res.max_rel_error < 1e-4);
  CHECK(res.checked == static_cast<int>(store.NumScalars()));
}

TEST_CASE("backward: frozen parameters receive no gradient") {
  Rng rng(1);
  DenseNet net("t", {2, 3, 1});
  ParamStore target;
  net.Init(target, rng);
  Tape tape;
  auto y = net.Forward(tape, target, tape.Input(Matrix::Ones(2, 4)), false);
  auto loss = tape.Mean(tape.SquaredNorm(y));
  CHECK(tape.Backward(loss).empty());
}

TEST_CASE("backward: opaque node on a gradient path is unsupported") {
  ParamStore store;
  store.Add("p", Matrix::Ones(2, 1));
  Tape tape;
  auto p = tape.Param(store, "p", true);
  auto abs = tape.Opaque("abs", {p}, tape.value(p).cwiseAbs());
  auto loss = tape.Sum(abs);
  CHECK_THROWS_AS(tape.Backward(loss), UnsupportedOpError);

  // The same op on a constant path is harmless.
  Tape t2;
  auto c = t2.Input(Matrix::Ones(2, 1));
  auto q = t2.Param(store, "p", true);
  auto l2 = t2.Add(t2.Sum(t2.Opaque("abs", {c}, Matrix::Ones(2, 1))),
                   t2.Sum(t2.SquaredNorm(q)));
  CHECK_NOTHROW(t2.Backward(l2));
}

TEST_CASE("adam: zero gradient leaves parameters and moments unchanged") {
  ParamStore store;
  store.Add("p", Matrix::Constant(2, 2, 0.5));
  const Matrix before = store.Get("p");
  store.AdamStep({{"p", Matrix::Zero(2, 2)}}, 0.1);
  CHECK(store.Get("p") == before);
  CHECK(store.slot("p").first_moment.isZero(0.0));
  CHECK(store.slot("p").second_moment.isZero(0.0));
  CHECK(store.step() == 1);
}

TEST_CASE("adam: first step moves against the gradient sign") {
  ParamStore store;
  store.Add("p", Matrix::Zero(3, 1));
  Matrix g(3, 1);
  g << 2.0, -0.001, 5.0;
  store.AdamStep({{"p", g}}, 1e-3);
  const Matrix& p = store.Get("p");
  for (int i = 0; i < 3; ++i) {
    CHECK((p(i, 0) > 0) == (g(i, 0) < 0));
    CHECK(p(i, 0) != 0.0);
  }
}

TEST_CASE("adam: scalar descent on (p-1)^2") {
  ParamStore store;
  store.Add("p", Matrix::Zero(1, 1));
  for (int i = 0; i < 10; ++i) {
    const double p = store.Get("p")(0, 0);
    store.AdamStep({{"p", Matrix::Constant(1, 1, 2.0 * (p - 1.0))}}, 0.1);
  }
  CHECK(std::abs(store.Get("p")(0, 0) - 1.0) < 1.0);
  CHECK(store.step() == 10);
}

TEST_CASE("adam: unknown gradient key is rejected before any update") {
  ParamStore store;
  store.Add("p", Matrix::Zero(1, 1));
  GradientMap g{{"p", Matrix::Ones(1, 1)}, {"q", Matrix::Ones(1, 1)}};
  CHECK_THROWS_AS(store.AdamStep(g, 0.1), GradientKeyError);
  CHECK(store.Get("p")(0, 0) == 0.0);
  CHECK(store.step() == 0);
  CHECK_THROWS_AS(store.AdamStep({{"p", Matrix::Ones(2, 1)}}, 0.1), ShapeError);
}

TEST_CASE("target tracker: hard copy, frozen, and linear blend") {
  ParamStore source;
  source.Add("enc.w0", Matrix::Ones(2, 2));
  source.Add("other.w0", Matrix::Ones(1, 1));

  TargetTracker hard(source, {"enc."}, 1, 1.0);
  source.Mutable("enc.w0").setConstant(3.0);
  hard.Track(source);
  CHECK(hard.shadow().Get("enc.w0") == source.Get("enc.w0"));
  CHECK_FALSE(hard.shadow().Has("other.w0"));

  TargetTracker frozen(source, {"enc."}, 1, 0.0);
  source.Mutable("enc.w0").setConstant(9.0);
  frozen.Track(source);
  CHECK(frozen.shadow().Get("enc.w0")(0, 0) == 3.0);

  ParamStore zero;
  zero.Add("enc.w0", Matrix::Zero(1, 1));
  TargetTracker polyak(zero, {"enc."}, 1, 0.01);
  ParamStore one;
  one.Add("enc.w0", Matrix::Ones(1, 1));
  polyak.Track(one);
  CHECK(polyak.shadow().Get("enc.w0")(0, 0) == doctest::Approx(0.01).epsilon(1e-15));

  // period 2: only every second call blends
  TargetTracker periodic(zero, {"enc."}, 2, 1.0);
  periodic.Track(one);
  CHECK(periodic.shadow().Get("enc.w0")(0, 0) == 0.0);
  periodic.Track(one);
  CHECK(periodic.shadow().Get("enc.w0")(0, 0) == 1.0);

  ParamStore wrong;
  wrong.Add("enc.w0", Matrix::Ones(3, 1));
  CHECK_THROWS_AS(hard.Track(wrong), ShapeError);
}

TEST_CASE("archive: round trip keeps params and Adam state; bad magic fails") {
  Rng rng(3);
  DenseNet net("n", {3, 4, 2});
  ParamStore store;
  net.Init(store, rng);
  Tape tape;
  auto loss = tape.Mean(tape.SquaredNorm(
      net.Forward(tape, store, tape.Input(Matrix::Ones(3, 2)), true)));
  store.AdamStep(tape.Backward(loss), 1e-2);

  TensorArchive archive;
  store.ExportTo(archive, "wm");
  archive.PutString("meta/env", "pointmass");
  const std::string bytes = archive.Serialize();
  CHECK(bytes.substr(0, 7) == "EUCLID1");
  const TensorArchive back = TensorArchive::Deserialize(bytes);
  CHECK(ParamStore::ImportFrom(back, "wm") == store);
  CHECK(back.GetString("meta/env") == "pointmass");

  std::string bad = bytes;
  bad[6] = '2';
  CHECK_THROWS_AS(TensorArchive::Deserialize(bad), CheckpointError);
  CHECK_THROWS_AS(TensorArchive::Deserialize(bytes.substr(0, bytes.size() - 3)),
                  CheckpointError);
}
