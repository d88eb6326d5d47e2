#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "etd/mdp.hpp"

namespace etd {

/// Online learners. All of them share LearnerState; the TD(0) variants simply
/// leave the trace/followon/emphasis fields alone.
enum class LearnerKind {
  kTd0,               // conventional linear TD(0)
  kOffPolicyTd0,      // TD(0) scaled by rho_t
  kEmphaticTd0,       // F_t = gamma_t rho_{t-1} F_{t-1} + 1, update scaled by F_t rho_t
  kEmphaticTdLambda,  // full emphatic TD(lambda)
};

std::string_view to_string(LearnerKind kind);
/// Accepts "td0", "off-policy-td0", "emphatic-td0", "emphatic"/"emphatic-td-lambda".
LearnerKind parse_learner_kind(std::string_view name);

struct LearnerState {
  Vector theta;
  Vector trace;           // e_{t-1}
  double followon = 0.0;  // F_{t-1}
  double emphasis = 0.0;  // M_{t-1}
  double prev_rho = 0.0;  // rho_{t-1}; 0 before the first step so F_0 = i(S_0)
  std::int64_t step = 0;
  double alpha = 0.0;
  /// When set, F is clipped to [0, bound] and each trace entry to [-bound, bound].
  std::optional<double> bound;
};

/// Fresh state: zero trace, followon = i(S_0), step 0.
LearnerState make_learner_state(const TaskSpec& task, Index start_state, Vector theta0,
                                double alpha, std::optional<double> bound = std::nullopt);

struct StepRecord {
  Vector theta_after;
  double td_error = 0.0;
  double emphasis = 0.0;
  double followon = 0.0;
  double trace_norm = 0.0;
};

/// R + gamma(S') theta^T phi(S') - theta^T phi(S).
double td_error(const TaskSpec& task, const Vector& theta, const Transition& tr);

StepRecord td0_step(LearnerState& state, const Transition& tr, const TaskSpec& task);
StepRecord offpolicy_td0_step(LearnerState& state, const Transition& tr, const TaskSpec& task);
StepRecord emphatic_td0_step(LearnerState& state, const Transition& tr, const TaskSpec& task);
StepRecord emphatic_td_lambda_step(LearnerState& state, const Transition& tr, const TaskSpec& task);

/// Dispatches on kind. Throws DivergenceError (state untouched) on a non-finite result.
StepRecord learner_step(LearnerKind kind, LearnerState& state, const Transition& tr,
                        const TaskSpec& task);

/// theta + alpha (b - A theta).
Vector deterministic_step(const Vector& theta_bar, const Matrix& a, const Vector& b, double alpha);

}  // namespace etd
