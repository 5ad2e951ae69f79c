#pragma once

#include <optional>
#include <vector>

#include "euclid/model/world_model.h"
#include "euclid/replay/replay_buffer.h"

namespace euclid {

struct LossWeights {
  double reward = 0.5;       // c1
  double consistency = 2.0;  // c2
  double value = 0.1;        // c3
  double gamma = 0.99;
  int rollout_horizon = 5;
  // Per-step weight rho^i on the i-th term. 1.0 sums the terms unweighted.
  double horizon_rho = 1.0;
};

struct ModelLossTerms {
  double total = 0.0;
  double reward = 0.0;
  double consistency = 0.0;
  double value = 0.0;
};

struct ModelLossResult {
  ModelLossTerms terms;
  GradientMap grads;
};

// Joint latent-model loss over i = 0..horizon of a sequence batch:
//   c1 |R(z_i,a_i) - r_i|^2 + c2 |D_h(z_i,a_i) - E'(s_{i+1})|^2
//     + c3 |Q(z_i,a_i) - (r_i + gamma Q'(z'_{i+1}, pi(z'_{i+1})))|^2
// z_0 = E(s_0); later z_i are the model's own open-loop predictions through
// head h. Primed networks are the lagged targets, z'_{i+1} = E'(s_{i+1}).
// Each term is averaged over the batch. `rewards[i]` is 1 x B. Gradients
// cover the encoder, backbone, head h, reward net and critic.
ModelLossResult ModelLoss(const WorldModel& model, const Actor& actor,
                          const LossWeights& weights, const SequenceBatch& batch,
                          const std::vector<Matrix>& rewards, int head,
                          int condition_dim, bool with_grads = true);

// Average-policy regulariser for the actor loss.
struct DiversityContext {
  std::optional<Matrix> average_action;  // per sample; empty ensemble -> none
  double alpha = 0.0;
  double sigma = 0.2;
};

struct ActorLossResult {
  double total = 0.0;
  double q_term = 0.0;     // mean of -Q(z, pi(z))
  double diversity = 0.0;  // mean divergence (before alpha)
  GradientMap grads;
};

// Minimises mean(-Q(z, pi(z))) + alpha * mean(|avg(z) - pi(z)|^2 / (2 sigma^2)).
// The critic is read-only here; gradients are for the actor only.
ActorLossResult ActorLoss(const Actor& actor, const WorldModel& model,
                          const Matrix& latents, const Matrix& condition,
                          const DiversityContext* diversity,
                          bool with_grads = true);

}  // namespace euclid
