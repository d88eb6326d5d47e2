#include "etd/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "etd/analysis.hpp"

namespace etd {

namespace {

constexpr double kRowSumTolerance = 1e-12;
constexpr double kRankTolerance = 1e-10;
constexpr double kSpectralMargin = 1e-9;

std::string where(Index s) { return "state " + std::to_string(s); }

std::string where(Index s, Index a) {
  return "state " + std::to_string(s) + ", action " + std::to_string(a);
}

void check_policy(const Policy& policy, const std::string& name, Index n_states,
                  Index n_actions, ValidationReport& report) {
  if (policy.probs.rows() != n_states || policy.probs.cols() != n_actions) {
    report.violations.push_back(
        {"dimensions", name + " policy must be " + std::to_string(n_states) + " x " +
                           std::to_string(n_actions)});
    return;
  }
  for (Index s = 0; s < n_states; ++s) {
    const auto row = policy.probs.row(s);
    if (!row.allFinite() || (row.array() < 0.0).any()) {
      report.violations.push_back({name + "-probabilities", "negative or non-finite entry at " + where(s)});
    } else if (std::abs(row.sum() - 1.0) > kRowSumTolerance) {
      report.violations.push_back({name + "-probabilities", "row does not sum to 1 at " + where(s)});
    }
  }
}

void check_unit_interval(const Vector& v, const std::string& name, Index n_states,
                         ValidationReport& report) {
  if (v.size() != n_states) {
    report.violations.push_back({"dimensions", name + " must have one entry per state"});
    return;
  }
  for (Index s = 0; s < n_states; ++s) {
    if (!std::isfinite(v(s)) || v(s) < 0.0 || v(s) > 1.0) {
      report.violations.push_back({name + "-range", name + " outside [0, 1] at " + where(s)});
    }
  }
}

}  // namespace

FiniteMdp::FiniteMdp(std::vector<Matrix> transitions, std::vector<Matrix> rewards)
    : transitions_(std::move(transitions)), rewards_(std::move(rewards)) {
  if (transitions_.empty()) throw DimensionError("MDP needs at least one action");
  if (rewards_.size() != transitions_.size()) {
    throw DimensionError("reward tensor and transition tensor disagree on the action count");
  }
  num_states_ = transitions_.front().rows();
  if (num_states_ < 1) throw DimensionError("MDP needs at least one state");
  for (std::size_t a = 0; a < transitions_.size(); ++a) {
    if (transitions_[a].rows() != num_states_ || transitions_[a].cols() != num_states_ ||
        rewards_[a].rows() != num_states_ || rewards_[a].cols() != num_states_) {
      throw DimensionError("action " + std::to_string(a) + " is not " +
                           std::to_string(num_states_) + " x " + std::to_string(num_states_));
    }
  }
}

bool ValidationReport::has(const std::string& invariant) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const Violation& v) { return v.invariant == invariant; });
}

ValidationReport validate_task(const TaskSpec& task) {
  ValidationReport report;
  const Index n_states = task.num_states();
  const Index n_actions = task.num_actions();
  if (n_states < 1) {
    report.violations.push_back({"dimensions", "task has no states"});
    return report;
  }

  for (Index a = 0; a < n_actions; ++a) {
    for (Index s = 0; s < n_states; ++s) {
      const auto row = task.mdp.transition(a).row(s);
      if (!row.allFinite() || (row.array() < 0.0).any()) {
        report.violations.push_back({"transition-probabilities", "negative or non-finite entry at " + where(s, a)});
      } else if (std::abs(row.sum() - 1.0) > kRowSumTolerance) {
        report.violations.push_back({"transition-probabilities", "row does not sum to 1 at " + where(s, a)});
      }
      if (!task.mdp.reward(a).row(s).allFinite()) {
        report.violations.push_back({"rewards", "non-finite reward at " + where(s, a)});
      }
    }
  }

  check_policy(task.target, "target", n_states, n_actions, report);
  check_policy(task.behavior, "behavior", n_states, n_actions, report);
  check_unit_interval(task.gamma, "gamma", n_states, report);
  check_unit_interval(task.lambda, "lambda", n_states, report);

  if (task.interest.size() != n_states) {
    report.violations.push_back({"dimensions", "interest must have one entry per state"});
  } else {
    for (Index s = 0; s < n_states; ++s) {
      if (!std::isfinite(task.interest(s)) || task.interest(s) <= 0.0) {
        report.violations.push_back({"interest-range", "interest must be positive at " + where(s)});
      }
    }
  }

  const Matrix& phi = task.features.phi;
  if (phi.rows() != n_states || phi.cols() < 1) {
    report.violations.push_back({"dimensions", "feature matrix must have one row per state and at least one column"});
  } else if (!phi.allFinite()) {
    report.violations.push_back({"features", "non-finite feature entry"});
  } else {
    Eigen::ColPivHouseholderQR<Matrix> qr(phi);
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < phi.cols()) {
      report.violations.push_back({"feature-rank", "feature columns are linearly dependent (rank " +
                                                       std::to_string(qr.rank()) + " < " +
                                                       std::to_string(phi.cols()) + ")"});
    }
  }

  // Everything below needs well-formed inputs.
  if (!report.ok()) return report;

  for (Index s = 0; s < n_states; ++s) {
    for (Index a = 0; a < n_actions; ++a) {
      if (task.target(s, a) >= kProbabilityZero && task.behavior(s, a) < kProbabilityZero) {
        report.violations.push_back({"coverage", "target takes an action the behavior never takes at " + where(s, a)});
      }
    }
  }

  const double radius = spectral_radius(discounted_target_transition(task));
  if (!(radius < 1.0 - kSpectralMargin)) {
    std::ostringstream os;
    os.precision(17);
    os << "spectral radius of P_pi Gamma is " << radius << " (must be < 1)";
    report.violations.push_back({"spectral-radius", os.str()});
  }

  try {
    stationary_distribution(induced_transition(task.mdp, task.behavior));
  } catch (const NumericalError& e) {
    report.violations.push_back({"behavior-stationary", e.what()});
  }
  return report;
}

Matrix induced_transition(const FiniteMdp& mdp, const Policy& policy) {
  if (policy.probs.rows() != mdp.num_states() || policy.probs.cols() != mdp.num_actions()) {
    throw DimensionError("policy shape does not match the MDP");
  }
  Matrix p = Matrix::Zero(mdp.num_states(), mdp.num_states());
  for (Index a = 0; a < mdp.num_actions(); ++a) {
    p.noalias() += policy.probs.col(a).asDiagonal() * mdp.transition(a);
  }
  return p;
}

Vector expected_reward_vector(const FiniteMdp& mdp, const Policy& policy) {
  if (policy.probs.rows() != mdp.num_states() || policy.probs.cols() != mdp.num_actions()) {
    throw DimensionError("policy shape does not match the MDP");
  }
  Vector r = Vector::Zero(mdp.num_states());
  for (Index a = 0; a < mdp.num_actions(); ++a) {
    const Vector per_state = mdp.transition(a).cwiseProduct(mdp.reward(a)).rowwise().sum();
    r += policy.probs.col(a).cwiseProduct(per_state);
  }
  return r;
}

double importance_ratio(const TaskSpec& task, Index s, Index a) {
  const double pi = task.target(s, a);
  const double mu = task.behavior(s, a);
  if (pi < kProbabilityZero) return 0.0;
  if (mu < kProbabilityZero) {
    throw CoverageError("behavior never takes the target's action at " + where(s, a));
  }
  return pi / mu;
}

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Transition sample_transition(const TaskSpec& task, Index s, Rng& rng) {
  Transition tr;
  tr.state = s;
  tr.action = sample_discrete(task.behavior.probs.row(s), rng);
  tr.next_state = sample_discrete(task.mdp.transition(tr.action).row(s), rng);
  tr.reward = task.mdp.r(s, tr.action, tr.next_state);
  tr.rho = importance_ratio(task, s, tr.action);
  return tr;
}

}  // namespace etd
