#include "euclid/planner/planner.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "euclid/common/error.h"
#include "euclid/common/parallel.h"

namespace euclid {

int PlannerConfig::num_policy() const {
  return static_cast<int>(std::floor(policy_fraction * population + 0.5));
}

void PlannerConfig::Validate() const {
  if (iterations < 1) throw ConfigError("planner iterations must be >= 1");
  if (horizon < 1) throw ConfigError("planner horizon must be >= 1");
  if (population < 0 || policy_fraction < 0.0) {
    throw ConfigError("planner population and policy fraction must be >= 0");
  }
  if (elites < 1 || elites > population + num_policy()) {
    throw ConfigError("planner elites must be in [1, population + policy rollouts]");
  }
  if (temperature <= 0.0) throw ConfigError("planner temperature must be > 0");
  if (min_std <= 0.0 || init_std < min_std) {
    throw ConfigError("planner needs 0 < min_std <= init_std");
  }
  if (policy_jitter < 0.0) throw ConfigError("planner policy_jitter must be >= 0");
}

// ------------------------------------------------------------------ adapter

WorldModelPlanning::WorldModelPlanning(const WorldModel& model, const Actor& actor,
                                       int head, Matrix condition)
    : model_(model), actor_(actor), head_(head), condition_(std::move(condition)) {
  model.head(head);
  if (actor.condition_dim() != condition_.rows() ||
      (condition_.rows() > 0 && condition_.cols() != 1)) {
    throw ShapeError("planner condition must be a single column of condition_dim");
  }
}

Matrix WorldModelPlanning::Condition(Eigen::Index cols) const {
  if (condition_.rows() == 0) return Matrix(0, cols);
  return condition_.replicate(1, cols);
}

Matrix WorldModelPlanning::Reward(const Matrix& z, const Matrix& a) const {
  return model_.PredictReward(z, a);
}

Matrix WorldModelPlanning::Next(const Matrix& z, const Matrix& a) const {
  return model_.PredictNext(z, a, head_);
}

Matrix WorldModelPlanning::Policy(const Matrix& z) const {
  return actor_.Act(z, Condition(z.cols()));
}

Matrix WorldModelPlanning::Value(const Matrix& z) const {
  return model_.QValue(z, Policy(z));
}

// ------------------------------------------------------------------ scoring

namespace {

void CheckCandidates(const PlanningModel& model, const Vector& z0,
                     const CandidateSet& actions) {
  if (actions.empty()) throw ShapeError("planner: empty horizon");
  if (z0.size() != model.latent_dim()) throw ShapeError("planner: bad latent size");
  for (const auto& a : actions) {
    if (a.rows() != model.action_dim() || a.cols() != actions[0].cols()) {
      throw ShapeError("planner: inconsistent candidate actions");
    }
  }
}

void ScoreChunk(const PlanningModel& model, const Vector& z0,
                const CandidateSet& actions, double gamma, Eigen::Index begin,
                Eigen::Index count, Matrix& out) {
  Matrix z = z0.replicate(1, count);
  Matrix score = Matrix::Zero(1, count);
  double discount = 1.0;
  for (const auto& step : actions) {
    const auto a = step.middleCols(begin, count);
    score += discount * model.Reward(z, a);
    z = model.Next(z, a);
    discount *= gamma;
  }
  score += discount * model.Value(z);
  out.middleCols(begin, count) = score;
}

}  // namespace

Matrix ScoreCandidates(const PlanningModel& model, const Vector& z0,
                       const CandidateSet& actions, double gamma) {
  CheckCandidates(model, z0, actions);
  const Eigen::Index m = actions[0].cols();
  const Eigen::Index chunks = (m + kScoreChunk - 1) / kScoreChunk;
  Matrix out(1, m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index begin = c * kScoreChunk;
    ScoreChunk(model, z0, actions, gamma, begin,
               std::min<Eigen::Index>(kScoreChunk, m - begin), out);
  }
  return out;
}

Matrix ScoreCandidatesSerial(const PlanningModel& model, const Vector& z0,
                             const CandidateSet& actions, double gamma) {
  CheckCandidates(model, z0, actions);
  const Eigen::Index m = actions[0].cols();
  Matrix out(1, m);
  for (Eigen::Index begin = 0; begin < m; begin += kScoreChunk) {
    ScoreChunk(model, z0, actions, gamma, begin,
               std::min<Eigen::Index>(kScoreChunk, m - begin), out);
  }
  return out;
}

double ScoreTrajectory(const PlanningModel& model, const Vector& z0,
                       const Matrix& actions, double gamma) {
  CandidateSet set;
  for (Eigen::Index t = 0; t < actions.cols(); ++t) set.push_back(actions.col(t));
  return ScoreCandidatesSerial(model, z0, set, gamma)(0, 0);
}

// ----------------------------------------------------------------- planning

PlanResult Plan(const PlanningModel& model, const PlannerConfig& config,
                const Vector& z0, const std::optional<PlanDistribution>& warm_start,
                Rng& rng, bool parallel) {
  config.Validate();
  const int adim = model.action_dim();
  const int horizon = config.horizon;
  const int n_gauss = config.population;
  const int n_policy = config.num_policy();
  const int total = n_gauss + n_policy;

  PlanDistribution dist;
  if (warm_start) {
    if (warm_start->mean.rows() != adim || warm_start->mean.cols() != horizon ||
        warm_start->std.rows() != adim || warm_start->std.cols() != horizon) {
      throw ShapeError("planner: warm start has the wrong shape");
    }
    dist = *warm_start;
  } else {
    dist.mean = Matrix::Zero(adim, horizon);
    dist.std = Matrix::Constant(adim, horizon, config.init_std);
  }

  PlanResult result;
  CandidateSet cand(static_cast<std::size_t>(horizon), Matrix(adim, total));
  std::vector<int> order(static_cast<std::size_t>(total));
  for (int it = 0; it < config.iterations; ++it) {
    // Policy rollouts through the model, with optional jitter.
    if (n_policy > 0) {
      Matrix z = z0.replicate(1, n_policy);
      for (int t = 0; t < horizon; ++t) {
        Matrix a = model.Policy(z);
        for (Eigen::Index i = 0; i < a.size(); ++i) {
          a.data()[i] += config.policy_jitter * Gaussian(rng);
        }
        a = a.cwiseMax(-1.0).cwiseMin(1.0);
        cand[static_cast<std::size_t>(t)].rightCols(n_policy) = a;
        if (t + 1 < horizon) z = model.Next(z, a);
      }
    }
    for (int j = 0; j < n_gauss; ++j) {
      for (int t = 0; t < horizon; ++t) {
        for (int d = 0; d < adim; ++d) {
          const double v = dist.mean(d, t) + dist.std(d, t) * Gaussian(rng);
          cand[static_cast<std::size_t>(t)](d, j) = std::clamp(v, -1.0, 1.0);
        }
      }
    }

    const Matrix scores = parallel ? ScoreCandidates(model, z0, cand, config.gamma)
                                   : ScoreCandidatesSerial(model, z0, cand, config.gamma);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores(0, a) > scores(0, b); });
    const double best = scores(0, order[0]);

    Vector weights(config.elites);
    for (int e = 0; e < config.elites; ++e) {
      weights(e) = std::exp(config.temperature * (scores(0, order[e]) - best));
    }
    weights /= weights.sum();

    Matrix mean = Matrix::Zero(adim, horizon);
    for (int e = 0; e < config.elites; ++e) {
      for (int t = 0; t < horizon; ++t) {
        mean.col(t) += weights(e) * cand[static_cast<std::size_t>(t)].col(order[e]);
      }
    }
    Matrix var = Matrix::Zero(adim, horizon);
    for (int e = 0; e < config.elites; ++e) {
      for (int t = 0; t < horizon; ++t) {
        var.col(t) += weights(e) *
                      (cand[static_cast<std::size_t>(t)].col(order[e]) - mean.col(t))
                          .cwiseAbs2();
      }
    }
    dist.mean = mean.cwiseMax(-1.0).cwiseMin(1.0);
    dist.std = var.cwiseSqrt().cwiseMax(config.min_std);

    int from_policy = 0;
    for (int e = 0; e < config.elites; ++e) from_policy += order[e] >= n_gauss;
    result.best_scores.push_back(best);
    result.scored.push_back(static_cast<int>(scores.cols()));
    result.policy_elites.push_back(from_policy);
    if (it + 1 == config.iterations) {
      result.best_sequence.resize(adim, horizon);
      for (int t = 0; t < horizon; ++t) {
        result.best_sequence.col(t) = cand[static_cast<std::size_t>(t)].col(order[0]);
      }
    }
  }

  result.distribution = dist;
  result.action = dist.mean.col(0);

  // Next decision: drop step 0, append the policy action at the end of the
  // imagined mean trajectory, reset the spread.
  Matrix z = z0;
  for (int t = 0; t < horizon; ++t) z = model.Next(z, dist.mean.col(t));
  result.warm_start.mean.resize(adim, horizon);
  result.warm_start.mean.leftCols(horizon - 1) = dist.mean.rightCols(horizon - 1);
  result.warm_start.mean.col(horizon - 1) =
      model.Policy(z).col(0).cwiseMax(-1.0).cwiseMin(1.0);
  result.warm_start.std = Matrix::Constant(adim, horizon, config.init_std);
  return result;
}

}  // namespace euclid
