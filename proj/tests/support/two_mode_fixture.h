#pragma once

// Hand-built models and policies on the two-mode linear system: an identity
// encoder so latents equal states, and actors whose sign feedback on s0
// drives the state into one region and keeps it there.

#include <cmath>

#include "euclid/model/world_model.h"

namespace euclid::testing {

inline WorldModel IdentityLinearModel(int num_heads, Rng& rng) {
  WorldModelConfig c;
  c.state_dim = 2;
  c.action_dim = 2;
  c.latent_dim = 2;
  c.num_heads = num_heads;
  c.linear = true;
  c.hidden_dim = 16;
  WorldModel wm(c, rng);
  wm.params().Mutable("enc.w0") = Matrix::Identity(2, 2);
  wm.params().Mutable("enc.b0").setZero();
  wm.tracker().HardCopy(wm.params());
  return wm;
}

// a0 = tanh(20 * sign * (elu(50 s0) - elu(-50 s0))), a1 = 0.
// sign = +1 pushes into and holds region A (s0 >= 0), -1 region B.
inline Actor RegionSeeker(double sign, Rng& rng, int hidden = 4) {
  Actor a(2, 0, 2, hidden, rng);
  auto& p = a.params();
  p.Mutable("pi.w0").setZero();
  p.Mutable("pi.b0").setZero();
  p.Mutable("pi.w0")(0, 0) = 50.0;
  p.Mutable("pi.w0")(1, 0) = -50.0;
  p.Mutable("pi.w1").setZero();
  p.Mutable("pi.b1").setZero();
  p.Mutable("pi.w1")(0, 0) = 20.0 * sign;
  p.Mutable("pi.w1")(0, 1) = -20.0 * sign;
  return a;
}

// Constant action (a0, a1) with |a_i| < 1.
inline Actor ConstantActor(double a0, double a1, Rng& rng, int hidden = 4) {
  Actor a(2, 0, 2, hidden, rng);
  auto& p = a.params();
  p.Mutable("pi.w1").setZero();
  p.Mutable("pi.b1")(0, 0) = std::atanh(a0);
  p.Mutable("pi.b1")(1, 0) = std::atanh(a1);
  return a;
}

}  // namespace euclid::testing
