#pragma once

// Reference computations used only by the tests. They deliberately avoid the
// library's solvers: matrices are assembled with plain loops and inverses are
// replaced by truncated series or power iteration.

#include <cmath>
#include <cstdint>
#include <vector>

#include "etd/mdp.hpp"

namespace oracle {

using etd::Index;
using etd::Matrix;
using etd::Vector;

/// [P]_ij = sum_a pol(i,a) p(j|i,a), by explicit triple loop.
inline Matrix policy_transition(const etd::TaskSpec& task, const Matrix& pol) {
  const Index n = task.num_states();
  Matrix p = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index a = 0; a < task.num_actions(); ++a)
      for (Index j = 0; j < n; ++j) p(i, j) += pol(i, a) * task.mdp.p(i, a, j);
  return p;
}

inline Vector policy_reward(const etd::TaskSpec& task, const Matrix& pol) {
  const Index n = task.num_states();
  Vector r = Vector::Zero(n);
  for (Index i = 0; i < n; ++i)
    for (Index a = 0; a < task.num_actions(); ++a)
      for (Index j = 0; j < n; ++j) r(i) += pol(i, a) * task.mdp.p(i, a, j) * task.mdp.r(i, a, j);
  return r;
}

/// sum_{k=0}^{terms-1} m^k v.
inline Vector neumann(const Matrix& m, const Vector& v, int terms) {
  Vector acc = Vector::Zero(v.size());
  Vector term = v;
  for (int k = 0; k < terms; ++k) {
    acc += term;
    term = m * term;
  }
  return acc;
}

/// sum_{k=0}^{terms-1} m^k, as a matrix.
inline Matrix neumann(const Matrix& m, int terms) {
  Matrix acc = Matrix::Zero(m.rows(), m.cols());
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  for (int k = 0; k < terms; ++k) {
    acc += term;
    term = m * term;
  }
  return acc;
}

/// Stationary distribution by power iteration on the lazy chain (I + P)/2,
/// which is aperiodic whenever P is irreducible.
inline Vector power_stationary(const Matrix& p, int iters = 200000, double tol = 1e-15) {
  const Index n = p.rows();
  const Matrix lazy = 0.5 * (Matrix::Identity(n, n) + p);
  Vector d = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < iters; ++it) {
    Vector next = lazy.transpose() * d;
    next /= next.sum();
    const double change = (next - d).lpNorm<Eigen::Infinity>();
    d = next;
    if (change < tol) break;
  }
  return d;
}

/// Emphatic key matrix from its series definitions only:
///   f = sum_k (Gamma P_pi^T)^k (d o i)
///   m = Lambda (d o i) + (I - Lambda) f
///   P^lambda = sum_k (P_pi Gamma Lambda)^k P_pi Gamma (I - Lambda)
///   key = diag(m) (I - P^lambda)
struct SeriesEmphatic {
  Vector d_mu;
  Vector f;
  Vector m;
  Matrix p_lambda;
  Matrix key;
};

inline SeriesEmphatic series_emphatic(const etd::TaskSpec& task, int terms) {
  const Index n = task.num_states();
  SeriesEmphatic out;
  const Matrix p_mu = policy_transition(task, task.behavior.probs);
  const Matrix p_pi = policy_transition(task, task.target.probs);
  out.d_mu = power_stationary(p_mu);
  const Vector ivec = out.d_mu.cwiseProduct(task.interest);
  const Matrix g = task.gamma.asDiagonal();
  const Matrix l = task.lambda.asDiagonal();
  const Matrix id = Matrix::Identity(n, n);
  out.f = neumann(g * p_pi.transpose(), ivec, terms);
  out.m = l * ivec + (id - l) * out.f;
  out.p_lambda = neumann(p_pi * g * l, terms) * p_pi * g * (id - l);
  out.key = out.m.asDiagonal() * (id - out.p_lambda);
  return out;
}

/// Simulates F_t for `runs` independent trajectories of length t from
/// `start`, under the behaviour policy, and returns the sample mean and
/// standard error of F_t. Pulse interest: i_0 = 1, i_k = 0 afterwards.
struct SampleStats {
  double mean = 0.0;
  double std_error = 0.0;
  double variance = 0.0;
};

inline SampleStats monte_carlo_followon(const etd::TaskSpec& task, Index start, int t, int runs,
                                        bool pulse, std::uint64_t seed) {
  etd::Rng rng(seed);
  double sum = 0.0, sum2 = 0.0;
  for (int r = 0; r < runs; ++r) {
    Index s = start;
    double f = pulse ? 1.0 : task.interest(s);
    for (int k = 1; k <= t; ++k) {
      // Draw the action and successor directly from the tables.
      const double u = etd::uniform01(rng);
      Index a = 0;
      double acc = task.behavior(s, 0);
      while (u >= acc && a + 1 < task.num_actions()) acc += task.behavior(s, ++a);
      const double rho = task.target(s, a) / task.behavior(s, a);
      const double v = etd::uniform01(rng);
      Index next = 0;
      double acc2 = task.mdp.p(s, a, 0);
      while (v >= acc2 && next + 1 < task.num_states()) acc2 += task.mdp.p(s, a, ++next);
      f = rho * task.gamma(next) * f + (pulse ? 0.0 : task.interest(next));
      s = next;
    }
    sum += f;
    sum2 += f * f;
  }
  const double n = static_cast<double>(runs);
  SampleStats st;
  st.mean = sum / n;
  st.variance = (sum2 - n * st.mean * st.mean) / (n - 1.0);
  st.std_error = std::sqrt(st.variance / n);
  return st;
}

}  // namespace oracle
