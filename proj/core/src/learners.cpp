#include "etd/learners.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace etd {

namespace {

void require_finite(const Vector& theta, const Vector& trace, double followon, double emphasis) {
  if (!theta.allFinite() || !trace.allFinite() || !std::isfinite(followon) ||
      !std::isfinite(emphasis)) {
    throw DivergenceError("learner produced a non-finite value");
  }
}

StepRecord commit(LearnerState& state, Vector theta, Vector trace, double followon,
                  double emphasis, double rho, double delta) {
  require_finite(theta, trace, followon, emphasis);
  state.theta = std::move(theta);
  state.trace = std::move(trace);
  state.followon = followon;
  state.emphasis = emphasis;
  state.prev_rho = rho;
  ++state.step;
  return StepRecord{state.theta, delta, state.emphasis, state.followon, state.trace.norm()};
}

}  // namespace

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kTd0: return "td0";
    case LearnerKind::kOffPolicyTd0: return "off-policy-td0";
    case LearnerKind::kEmphaticTd0: return "emphatic-td0";
    case LearnerKind::kEmphaticTdLambda: return "emphatic-td-lambda";
  }
  return "unknown";
}

LearnerKind parse_learner_kind(std::string_view name) {
  if (name == "td0" || name == "on-policy-td0") return LearnerKind::kTd0;
  if (name == "off-policy-td0") return LearnerKind::kOffPolicyTd0;
  if (name == "emphatic-td0") return LearnerKind::kEmphaticTd0;
  if (name == "emphatic" || name == "emphatic-td-lambda") return LearnerKind::kEmphaticTdLambda;
  throw std::invalid_argument("unknown learner '" + std::string(name) + "'");
}

LearnerState make_learner_state(const TaskSpec& task, Index start_state, Vector theta0,
                                double alpha, std::optional<double> bound) {
  if (theta0.size() != task.num_features()) {
    throw DimensionError("theta0 has " + std::to_string(theta0.size()) + " entries, task has " +
                         std::to_string(task.num_features()) + " features");
  }
  if (!(alpha >= 0.0)) throw std::invalid_argument("step size must be non-negative");
  LearnerState state;
  state.trace = Vector::Zero(theta0.size());
  state.theta = std::move(theta0);
  state.followon = task.interest(start_state);
  state.alpha = alpha;
  state.bound = bound;
  return state;
}

double td_error(const TaskSpec& task, const Vector& theta, const Transition& tr) {
  const auto& phi = task.features.phi;
  return tr.reward + task.gamma(tr.next_state) * phi.row(tr.next_state).dot(theta) -
         phi.row(tr.state).dot(theta);
}

StepRecord td0_step(LearnerState& state, const Transition& tr, const TaskSpec& task) {
  const double delta = td_error(task, state.theta, tr);
  Vector theta = state.theta + state.alpha * delta * task.features.phi.row(tr.state).transpose();
  return commit(state, std::move(theta), state.trace, state.followon, state.emphasis, tr.rho, delta);
}

StepRecord offpolicy_td0_step(LearnerState& state, const Transition& tr, const TaskSpec& task) {
  const double delta = td_error(task, state.theta, tr);
  Vector theta =
      state.theta + state.alpha * tr.rho * delta * task.features.phi.row(tr.state).transpose();
  return commit(state, std::move(theta), state.trace, state.followon, state.emphasis, tr.rho, delta);
}

StepRecord emphatic_td0_step(LearnerState& state, const Transition& tr, const TaskSpec& task) {
  double followon = task.gamma(tr.state) * state.prev_rho * state.followon + 1.0;
  if (state.bound) followon = std::min(followon, *state.bound);
  const double delta = td_error(task, state.theta, tr);
  Vector theta = state.theta + state.alpha * followon * tr.rho * delta *
                                   task.features.phi.row(tr.state).transpose();
  return commit(state, std::move(theta), state.trace, followon, followon, tr.rho, delta);
}

StepRecord emphatic_td_lambda_step(LearnerState& state, const Transition& tr, const TaskSpec& task) {
  const Index s = tr.state;
  const double gamma = task.gamma(s);
  const double lambda = task.lambda(s);
  const double interest = task.interest(s);

  // F -> M -> e -> theta; each uses the freshly computed predecessor.
  double followon = state.prev_rho * gamma * state.followon + interest;
  if (state.bound) followon = std::clamp(followon, 0.0, *state.bound);
  const double emphasis = lambda * interest + (1.0 - lambda) * followon;
  Vector trace =
      tr.rho * (gamma * lambda * state.trace + emphasis * task.features.phi.row(s).transpose());
  if (state.bound) trace = trace.cwiseMax(-*state.bound).cwiseMin(*state.bound);

  const double delta = td_error(task, state.theta, tr);
  Vector theta = state.theta + state.alpha * delta * trace;
  return commit(state, std::move(theta), std::move(trace), followon, emphasis, tr.rho, delta);
}

StepRecord learner_step(LearnerKind kind, LearnerState& state, const Transition& tr,
                        const TaskSpec& task) {
  switch (kind) {
    case LearnerKind::kTd0: return td0_step(state, tr, task);
    case LearnerKind::kOffPolicyTd0: return offpolicy_td0_step(state, tr, task);
    case LearnerKind::kEmphaticTd0: return emphatic_td0_step(state, tr, task);
    case LearnerKind::kEmphaticTdLambda: return emphatic_td_lambda_step(state, tr, task);
  }
  throw std::invalid_argument("unknown learner kind");
}

Vector deterministic_step(const Vector& theta_bar, const Matrix& a, const Vector& b, double alpha) {
  return theta_bar + alpha * (b - a * theta_bar);
}

}  // namespace etd
