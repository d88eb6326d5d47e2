#pragma once

#include <optional>

#include "etd/mdp.hpp"

namespace etd {

/// Knobs for random task generation. Kernels and policies are Dirichlet(1)
/// rows; the behavior is mixed with the uniform policy so coverage and
/// irreducibility hold by construction.
struct RandomTaskOptions {
  Index min_states = 2;
  Index max_states = 6;
  Index min_actions = 2;
  Index max_actions = 3;
  double behavior_uniform_weight = 0.1;
  double deterministic_target_prob = 0.3;  // chance a target row is one-hot
  double gamma_max = 0.99;
  std::optional<double> constant_gamma;    // overrides the per-state draw
  double interest_min = 0.05;
  double interest_max = 1.0;
  bool on_policy = false;                  // target := behavior
};

/// Draws a task that passes validate_task. Retries internally; throws
/// NumericalError if it cannot find one in a reasonable number of attempts.
TaskSpec random_task(Rng& rng, const RandomTaskOptions& options = {});

}  // namespace etd
