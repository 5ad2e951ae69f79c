#include "euclid/model/losses.h"

#include <cmath>

#include "euclid/common/error.h"

namespace euclid {

ModelLossResult ModelLoss(const WorldModel& model, const Actor& actor,
                          const LossWeights& weights, const SequenceBatch& batch,
                          const std::vector<Matrix>& rewards, int head,
                          int condition_dim, bool with_grads) {
  const int steps = batch.steps();
  if (batch.size() == 0 || static_cast<int>(batch.states.size()) != steps ||
      static_cast<int>(rewards.size()) != steps) {
    throw ShapeError("model loss: malformed sequence batch");
  }
  const Eigen::Index n = batch.size();
  for (int i = 0; i < steps; ++i) {
    if (rewards[i].rows() != 1 || rewards[i].cols() != n ||
        !rewards[i].allFinite()) {
      throw ShapeError("model loss: rewards must be finite 1 x B per step");
    }
  }
  model.head(head);  // range check

  // Targets: one batched pass over all next states.
  Matrix all_next(batch.next_states[0].rows(), n * steps);
  for (int i = 0; i < steps; ++i) {
    all_next.middleCols(i * n, n) = batch.next_states[i];
  }
  const Matrix target_latents = model.EncodeTarget(all_next);
  Matrix conditions(condition_dim, n * steps);
  if (condition_dim > 0) {
    for (int i = 0; i < steps; ++i) {
      conditions.middleCols(i * n, n) = OneHot(batch.skills[i], condition_dim);
    }
  }
  const Matrix next_actions = actor.Act(target_latents, conditions);
  const Matrix next_q = model.QTarget(target_latents, next_actions);

  Tape tape;
  Tape::Var z = model.Encode(tape, tape.Input(batch.states[0]), true);
  Tape::Var reward_sum{}, consistency_sum{}, value_sum{};
  double step_weight = 1.0;
  for (int i = 0; i < steps; ++i) {
    Tape::Var za = tape.ConcatRows(z, tape.Input(batch.actions[i]));
    Tape::Var r_hat = model.PredictReward(tape, za, true);
    Tape::Var q_hat = model.QValue(tape, za, true);
    Tape::Var z_next = model.PredictNext(tape, za, head, true);

    const Matrix td = rewards[i] + weights.gamma * next_q.middleCols(i * n, n);
    Tape::Var r_term =
        tape.Mean(tape.SquaredNorm(tape.Sub(r_hat, tape.Input(rewards[i]))));
    Tape::Var c_term = tape.Mean(tape.SquaredNorm(
        tape.Sub(z_next, tape.Input(target_latents.middleCols(i * n, n)))));
    Tape::Var v_term =
        tape.Mean(tape.SquaredNorm(tape.Sub(q_hat, tape.Input(td))));
    if (step_weight != 1.0) {
      r_term = tape.Scale(r_term, step_weight);
      c_term = tape.Scale(c_term, step_weight);
      v_term = tape.Scale(v_term, step_weight);
    }
    if (i == 0) {
      reward_sum = r_term;
      consistency_sum = c_term;
      value_sum = v_term;
    } else {
      reward_sum = tape.Add(reward_sum, r_term);
      consistency_sum = tape.Add(consistency_sum, c_term);
      value_sum = tape.Add(value_sum, v_term);
    }
    step_weight *= weights.horizon_rho;
    z = z_next;
  }
  Tape::Var total = tape.Add(
      tape.Add(tape.Scale(reward_sum, weights.reward),
               tape.Scale(consistency_sum, weights.consistency)),
      tape.Scale(value_sum, weights.value));

  ModelLossResult out;
  out.terms.total = tape.scalar(total);
  out.terms.reward = tape.scalar(reward_sum);
  out.terms.consistency = tape.scalar(consistency_sum);
  out.terms.value = tape.scalar(value_sum);
  if (with_grads) out.grads = tape.Backward(total);
  return out;
}

ActorLossResult ActorLoss(const Actor& actor, const WorldModel& model,
                          const Matrix& latents, const Matrix& condition,
                          const DiversityContext* diversity, bool with_grads) {
  Tape tape;
  Tape::Var z = tape.Input(latents);
  Tape::Var action = actor.Act(tape, z, condition, true);
  Tape::Var q = model.QValue(tape, tape.ConcatRows(z, action), false);
  Tape::Var q_term = tape.Scale(tape.Mean(q), -1.0);
  Tape::Var total = q_term;

  ActorLossResult out;
  if (diversity != nullptr && diversity->average_action && diversity->alpha != 0.0) {
    const Matrix& avg = *diversity->average_action;
    if (avg.rows() != tape.value(action).rows() || avg.cols() != latents.cols()) {
      throw ShapeError("actor loss: average action has wrong shape");
    }
    Tape::Var gap = tape.Sub(tape.Input(avg), action);
    Tape::Var div = tape.Scale(tape.Mean(tape.SquaredNorm(gap)),
                               1.0 / (2.0 * diversity->sigma * diversity->sigma));
    out.diversity = tape.scalar(div);
    total = tape.Add(total, tape.Scale(div, diversity->alpha));
  } else if (diversity != nullptr && diversity->average_action) {
    const Matrix gap = *diversity->average_action - tape.value(action);
    out.diversity = gap.colwise().squaredNorm().mean() /
                    (2.0 * diversity->sigma * diversity->sigma);
  }
  out.total = tape.scalar(total);
  out.q_term = tape.scalar(q_term);
  if (with_grads) out.grads = tape.Backward(total);
  return out;
}

}  // namespace euclid
