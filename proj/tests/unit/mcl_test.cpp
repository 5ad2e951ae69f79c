#include <cmath>

#include "doctest.h"
#include "euclid/common/error.h"
#include "euclid/mcl/policy_ensemble.h"
#include "euclid/model/losses.h"
#include "support/two_mode_fixture.h"

using namespace euclid;

namespace {

Matrix Randn(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Gaussian(rng);
  return m;
}

}  // namespace

TEST_CASE("snapshot schedule over a full pre-training run") {
  Rng rng(1);
  Actor live(3, 0, 2, 8, rng);
  PolicyEnsemble ens(4, 5000, 0.2);
  std::vector<std::int64_t> taken;
  for (std::int64_t t = 0; t < 20000; ++t) {
    if (ens.MaybeSnapshot(t, live)) taken.push_back(t);
    CHECK_FALSE(ens.MaybeSnapshot(t, live));  // same step twice: no-op
  }
  CHECK(taken == std::vector<std::int64_t>{0, 5000, 10000, 15000});
  CHECK(ens.size() == 4);
  CHECK(ens.current_segment() == 3);
  CHECK_FALSE(ens.MaybeSnapshot(20000, live));  // capped at num_heads

  PolicyEnsemble first(4, 5000, 0.2);
  CHECK(first.MaybeSnapshot(0, live));
  CHECK(first.size() == 1);
  CHECK(first.current_segment() == 0);
  CHECK_FALSE(first.MaybeSnapshot(2500, live));
}

TEST_CASE("snapshots are immutable after creation") {
  Rng rng(2);
  Actor live(3, 0, 2, 8, rng);
  PolicyEnsemble ens(2, 10, 0.2);
  ens.MaybeSnapshot(0, live);
  const ParamStore frozen = ens.snapshot(0).params();
  live.params().Mutable("pi.w0").array() += 1.0;
  live.params().AdamStep({{"pi.b1", Matrix::Ones(2, 1)}}, 0.1);
  CHECK(ens.snapshot(0).params() == frozen);
}

TEST_CASE("average action: single, symmetric pair, explicit mean") {
  Rng rng(3);
  const Matrix z = Randn(rng, 3, 6);
  Actor a(3, 0, 2, 8, rng);
  PolicyEnsemble one(3, 1, 0.2);
  one.MaybeSnapshot(0, a);
  CHECK(one.AverageAction(z, Matrix()) == a.Act(z, Matrix()));

  Actor neg = a;
  neg.params().Mutable("pi.w1") *= -1.0;
  neg.params().Mutable("pi.b1") *= -1.0;
  PolicyEnsemble pair(2, 1, 0.2);
  pair.MaybeSnapshot(0, a);
  pair.MaybeSnapshot(1, neg);
  CHECK(pair.AverageAction(z, Matrix()).cwiseAbs().maxCoeff() < 1e-15);

  PolicyEnsemble three(3, 1, 0.2);
  std::vector<Actor> actors;
  for (int i = 0; i < 3; ++i) {
    actors.emplace_back(3, 0, 2, 8, rng);
    three.MaybeSnapshot(i, actors.back());
  }
  const Matrix avg = three.AverageAction(z, Matrix());
  for (int j = 0; j < 6; ++j) {
    for (int d = 0; d < 2; ++d) {
      double s = 0.0;
      for (const auto& act : actors) s += act.Act(z.col(j), Matrix())(d, 0);
      CHECK(std::abs(avg(d, j) - s / 3.0) < 1e-15);
    }
  }
  CHECK_THROWS_AS(PolicyEnsemble(2, 1, 0.2).AverageAction(z, Matrix()), RangeError);
}

TEST_CASE("divergence: coincident means and the gap-2 example") {
  Rng rng(4);
  const Matrix z = Randn(rng, 2, 4);
  Actor a = testing::ConstantActor(0.6, 0.8, rng);
  PolicyEnsemble ens(1, 1, 1.0);
  ens.MaybeSnapshot(0, a);
  CHECK(ens.Divergence(a, z, Matrix()) == 0.0);
  Actor opposite = testing::ConstantActor(-0.6, -0.8, rng);
  CHECK(ens.Divergence(opposite, z, Matrix()) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("divergence agrees with the actor loss regulariser") {
  Rng rng(5);
  WorldModelConfig c;
  c.state_dim = 3;
  c.action_dim = 2;
  c.latent_dim = 3;
  c.hidden_dim = 8;
  c.encoder_hidden_dim = 8;
  c.num_heads = 2;
  WorldModel wm(c, rng);
  Actor live(3, 0, 2, 8, rng);
  PolicyEnsemble ens(2, 1, 0.2);
  ens.MaybeSnapshot(0, Actor(3, 0, 2, 8, rng));
  ens.MaybeSnapshot(1, Actor(3, 0, 2, 8, rng));
  const Matrix z = Randn(rng, 3, 7);
  DiversityContext ctx;
  ctx.alpha = 0.1;
  ctx.sigma = ens.sigma();
  ctx.average_action = ens.AverageAction(z, Matrix());
  const auto res = ActorLoss(live, wm, z, Matrix(), &ctx, false);
  CHECK(res.diversity == doctest::Approx(ens.Divergence(live, z, Matrix())).epsilon(1e-12));
}

TEST_CASE("select_head: constructed regions, single head, ties, rescaling") {
  Rng rng(6);
  WorldModel wm = testing::IdentityLinearModel(4, rng);
  auto env = MakeEnv("twomode");
  PolicyEnsemble ens(4, 1, 0.2);
  ens.MaybeSnapshot(0, testing::ConstantActor(-0.9, 0.0, rng));
  ens.MaybeSnapshot(1, testing::RegionSeeker(+1.0, rng));
  ens.MaybeSnapshot(2, testing::RegionSeeker(-1.0, rng));
  ens.MaybeSnapshot(3, testing::ConstantActor(-0.9, 0.0, rng));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    env->SetTask("mode_a");
    HeadSelection a = SelectHead(wm, ens, *env, seed, Matrix());
    CHECK(a.head == 1);
    CHECK(a.returns.size() == 4);
    CHECK(a.episodes.size() == 4);
    CHECK(a.episodes[1].size() == static_cast<std::size_t>(env->spec().episode_length));
    env->SetTask("mode_b");
    CHECK(SelectHead(wm, ens, *env, seed, Matrix()).head == 2);
  }

  PolicyEnsemble single(1, 1, 0.2);
  single.MaybeSnapshot(0, testing::RegionSeeker(+1.0, rng));
  env->SetTask("mode_b");
  HeadSelection s = SelectHead(testing::IdentityLinearModel(1, rng), single, *env, 3,
                               Matrix());
  CHECK(s.head == 0);
  CHECK(s.returns.size() == 1);

  PolicyEnsemble same(3, 1, 0.2);
  Actor seeker = testing::RegionSeeker(-1.0, rng);
  for (int i = 0; i < 3; ++i) same.MaybeSnapshot(i, seeker);
  env->SetTask("mode_a");
  HeadSelection tie = SelectHead(testing::IdentityLinearModel(3, rng), same, *env, 4,
                                 Matrix());
  CHECK(tie.returns[0] == tie.returns[2]);
  CHECK(tie.head == 0);

  env->SetTask(std::nullopt);
  CHECK_THROWS_AS(SelectHead(wm, ens, *env, 0, Matrix()), ConfigError);
}

TEST_CASE("argmax: lowest index on ties, invariant under positive rescaling") {
  CHECK(ArgmaxFirst({1.0, 3.0, 3.0, 2.0}) == 1);
  CHECK(ArgmaxFirst({5.0, 5.0}) == 0);
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(5), scaled(5);
    const double c = Uniform(rng, 0.01, 100.0);
    for (int i = 0; i < 5; ++i) {
      v[i] = std::round(Uniform(rng, 0.0, 4.0));
      scaled[i] = c * v[i];
    }
    CHECK(ArgmaxFirst(v) == ArgmaxFirst(scaled));
  }
}

TEST_CASE("ensemble checkpoint round trip and config validation") {
  Rng rng(8);
  Actor live(3, 2, 2, 8, rng);
  PolicyEnsemble ens(3, 7, 0.3);
  ens.MaybeSnapshot(0, live);
  live.params().Mutable("pi.b0").array() += 0.5;
  ens.MaybeSnapshot(7, live);
  TensorArchive ar;
  ens.ExportTo(ar, "ensemble");
  PolicyEnsemble loaded;
  loaded.ImportFrom(TensorArchive::Deserialize(ar.Serialize()), "ensemble", live);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded.snapshot(0).params() == ens.snapshot(0).params());
  CHECK(loaded.snapshot(1).params() == ens.snapshot(1).params());
  CHECK(loaded.num_heads() == 3);
  CHECK(loaded.snapshot_interval() == 7);
  CHECK_FALSE(loaded.MaybeSnapshot(7, live));
  CHECK(loaded.MaybeSnapshot(14, live));

  Actor wrong(3, 2, 2, 16, rng);
  CHECK_THROWS_AS(loaded.ImportFrom(ar, "ensemble", wrong), CheckpointError);

  MCLConfig cfg;
  CHECK_NOTHROW(cfg.Validate());
  cfg.alpha = -0.1;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
  cfg.alpha = 0.1;
  cfg.num_heads = 0;
  CHECK_THROWS_AS(cfg.Validate(), ConfigError);
}
