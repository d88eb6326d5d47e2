#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "etd/errors.hpp"

namespace etd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Random stream used for every sampling operation. mt19937_64 is fully
/// specified by the standard, so a seed reproduces the same bits anywhere.
using Rng = std::mt19937_64;

/// Policy probabilities below this are treated as exact zeros.
inline constexpr double kProbabilityZero = 1e-15;

/// Finite MDP stored as one N x N matrix per action:
/// transition(a)(i, j) = p(j | i, a), reward(a)(i, j) = expected reward on i -a-> j.
class FiniteMdp {
 public:
  FiniteMdp() = default;
  FiniteMdp(std::vector<Matrix> transitions, std::vector<Matrix> rewards);

  Index num_states() const { return num_states_; }
  Index num_actions() const { return static_cast<Index>(transitions_.size()); }

  double p(Index s, Index a, Index next) const { return transitions_[a](s, next); }
  double r(Index s, Index a, Index next) const { return rewards_[a](s, next); }

  const Matrix& transition(Index a) const { return transitions_[a]; }
  const Matrix& reward(Index a) const { return rewards_[a]; }

 private:
  Index num_states_ = 0;
  std::vector<Matrix> transitions_;
  std::vector<Matrix> rewards_;
};

/// probs(s, a) = probability of taking a in s.
struct Policy {
  Matrix probs;

  double operator()(Index s, Index a) const { return probs(s, a); }
};

/// One row per state; columns are the n learned parameters.
struct FeatureMap {
  Matrix phi;

  Index num_features() const { return phi.cols(); }
  auto row(Index s) const { return phi.row(s); }
};

/// Complete statement of a policy-evaluation problem.
struct TaskSpec {
  FiniteMdp mdp;
  Policy target;
  Policy behavior;
  Vector gamma;     // discount per state, in [0, 1]
  Vector lambda;    // bootstrapping per state, in [0, 1]
  Vector interest;  // interest per state, > 0
  FeatureMap features;

  Index num_states() const { return mdp.num_states(); }
  Index num_actions() const { return mdp.num_actions(); }
  Index num_features() const { return features.num_features(); }
};

struct Transition {
  Index state = 0;
  Index action = 0;
  Index next_state = 0;
  double reward = 0.0;
  double rho = 0.0;
};

struct Violation {
  std::string invariant;  // short machine-readable tag, e.g. "coverage"
  std::string detail;     // human-readable, names the offending index
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(const std::string& invariant) const;
};

/// Checks every TaskSpec invariant and returns all violations found.
ValidationReport validate_task(const TaskSpec& task);

/// [P]_ij = sum_a policy(a|i) p(j|i,a).
Matrix induced_transition(const FiniteMdp& mdp, const Policy& policy);

/// [r]_i = sum_a policy(a|i) sum_j p(j|i,a) r(i,a,j).
Vector expected_reward_vector(const FiniteMdp& mdp, const Policy& policy);

/// target(a|s) / behavior(a|s); 0 when both vanish. Throws CoverageError when
/// only the behavior probability vanishes.
double importance_ratio(const TaskSpec& task, Index s, Index a);

/// Draws a ~ behavior(.|s), s' ~ p(.|s,a) and fills in reward and rho.
Transition sample_transition(const TaskSpec& task, Index s, Rng& rng);

/// Uniform draw in [0, 1) built from the top 53 bits of one engine output.
double uniform01(Rng& rng);

/// Index drawn from a discrete distribution given as a row of probabilities.
template <typename Row>
Index sample_discrete(const Row& probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  Index last_positive = 0;
  for (Index k = 0; k < probs.size(); ++k) {
    if (probs(k) <= 0.0) continue;
    last_positive = k;
    acc += probs(k);
    if (u < acc) return k;
  }
  return last_positive;
}

}  // namespace etd
