// Serial reference vs OpenMP kernels: planner candidate scoring and the APT
// nearest-neighbour reward. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "euclid/common/parallel.h"
#include "euclid/intrinsic/knn.h"
#include "euclid/planner/planner.h"

namespace {

using namespace euclid;

Matrix Randn(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Gaussian(rng);
  return m;
}

struct ScoringFixture {
  ScoringFixture()
      : rng(1),
        model(Config(), rng),
        actor(16, 0, 4, 128, rng),
        planning(model, actor, 0),
        z0(Randn(rng, 16, 1).col(0)) {}

  static WorldModelConfig Config() {
    WorldModelConfig c;
    c.state_dim = 8;
    c.action_dim = 4;
    return c;
  }

  CandidateSet Candidates(int m) {
    CandidateSet c;
    for (int t = 0; t < 5; ++t) c.push_back(Randn(rng, 4, m).array().tanh().matrix());
    return c;
  }

  Rng rng;
  WorldModel model;
  Actor actor;
  WorldModelPlanning planning;
  Vector z0;
};

void BM_ScoreSerial(benchmark::State& state) {
  ScoringFixture f;
  const CandidateSet c = f.Candidates(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ScoreCandidatesSerial(f.planning, f.z0, c, 0.99));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ScoreParallel(benchmark::State& state) {
  ScoringFixture f;
  const CandidateSet c = f.Candidates(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ScoreCandidates(f.planning, f.z0, c, 0.99));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = omp_get_max_threads();
}

void BM_KnnSerial(benchmark::State& state) {
  Rng rng(2);
  const Matrix z = Randn(rng, 16, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(KnnLogDistanceSerial(z, z, 12, 1e-6, true));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_KnnParallel(benchmark::State& state) {
  Rng rng(2);
  const Matrix z = Randn(rng, 16, state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(KnnLogDistance(z, z, 12, 1e-6, true));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(BM_ScoreSerial)->Arg(134)->Arg(538);
BENCHMARK(BM_ScoreParallel)->Arg(134)->Arg(538);
BENCHMARK(BM_KnnSerial)->Arg(256)->Arg(1024);
BENCHMARK(BM_KnnParallel)->Arg(256)->Arg(1024);

BENCHMARK_MAIN();
