#include "etd/random_task.hpp"

#include <cmath>

#include "etd/analysis.hpp"

namespace etd {

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

Index uniform_index(Rng& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

// Dirichlet(1, ..., 1) via normalised exponentials.
Vector dirichlet_row(Rng& rng, Index k) {
  Vector row(k);
  for (Index j = 0; j < k; ++j) row(j) = -std::log(1.0 - uniform01(rng));
  return row / row.sum();
}

Matrix random_features(Rng& rng, Index n_states) {
  const Index n = uniform_index(rng, 1, n_states);
  for (;;) {
    Matrix phi(n_states, n);
    for (Index i = 0; i < n_states; ++i)
      for (Index j = 0; j < n; ++j) phi(i, j) = uniform(rng, -1.0, 1.0);
    Eigen::ColPivHouseholderQR<Matrix> qr(phi);
    qr.setThreshold(1e-6);
    if (qr.rank() == n) return phi;
  }
}

TaskSpec draw(Rng& rng, const RandomTaskOptions& o) {
  const Index n_states = uniform_index(rng, o.min_states, o.max_states);
  const Index n_actions = uniform_index(rng, o.min_actions, o.max_actions);

  std::vector<Matrix> p(n_actions, Matrix(n_states, n_states));
  std::vector<Matrix> r(n_actions, Matrix(n_states, n_states));
  for (Index a = 0; a < n_actions; ++a) {
    for (Index s = 0; s < n_states; ++s) {
      p[a].row(s) = dirichlet_row(rng, n_states).transpose();
      for (Index j = 0; j < n_states; ++j) r[a](s, j) = uniform(rng, -1.0, 1.0);
    }
  }

  Matrix behavior(n_states, n_actions);
  Matrix target(n_states, n_actions);
  const double w = o.behavior_uniform_weight;
  for (Index s = 0; s < n_states; ++s) {
    behavior.row(s) = ((1.0 - w) * dirichlet_row(rng, n_actions).array() +
                       w / static_cast<double>(n_actions))
                          .transpose();
    if (uniform01(rng) < o.deterministic_target_prob) {
      target.row(s).setZero();
      target(s, uniform_index(rng, 0, n_actions - 1)) = 1.0;
    } else {
      target.row(s) = dirichlet_row(rng, n_actions).transpose();
    }
  }
  if (o.on_policy) target = behavior;

  Vector gamma(n_states), lambda(n_states), interest(n_states);
  for (Index s = 0; s < n_states; ++s) {
    gamma(s) = o.constant_gamma ? *o.constant_gamma : uniform(rng, 0.0, o.gamma_max);
    lambda(s) = uniform01(rng);
    interest(s) = uniform(rng, o.interest_min, o.interest_max);
  }

  return TaskSpec{FiniteMdp(std::move(p), std::move(r)),
                  Policy{target},
                  Policy{behavior},
                  gamma,
                  lambda,
                  interest,
                  FeatureMap{random_features(rng, n_states)}};
}

}  // namespace

TaskSpec random_task(Rng& rng, const RandomTaskOptions& options) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    TaskSpec task = draw(rng, options);
    if (validate_task(task).ok()) return task;
  }
  throw NumericalError("random_task: no valid task after 100 attempts");
}

}  // namespace etd
