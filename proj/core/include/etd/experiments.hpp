#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "etd/learners.hpp"
#include "etd/mdp.hpp"

namespace etd {

struct Scenario {
  std::string name;
  std::string description;
  std::string provenance;
  TaskSpec task;
  double default_alpha = 0.0;
  Vector default_theta0;
  std::int64_t horizon = 0;
  int runs = 0;
  Index start_state = 0;
};

/// Built-in scenario names, sorted.
std::vector<std::string> scenario_names();

/// Throws std::invalid_argument for an unknown name.
Scenario build_scenario(const std::string& name);

/// Behaviour-policy trajectory of `steps` transitions starting at `start`.
std::vector<Transition> sample_trajectory(const TaskSpec& task, Index start, std::int64_t steps,
                                          Rng& rng);

struct EmphasisPoint {
  double followon = 0.0;
  double emphasis = 0.0;
};

/// Brute-force emphasis from the explicit sums over all earlier steps,
///   M_t = i_t + sum_{k<t} M_k rho_k (prod_{j=k+1}^{t-1} gamma_j lambda_j rho_j) gamma_t (1 - lambda_t)
///   F_t = i_t + gamma_t sum_{k<t} rho_k M_k prod_{j=k+1}^{t-1} gamma_j lambda_j rho_j
/// O(T^2); only meant as a check on the recursive form.
std::vector<EmphasisPoint> forward_view_emphasis(const std::vector<Transition>& trajectory,
                                                 const TaskSpec& task);

/// Same quantities from the one-step recursions.
std::vector<EmphasisPoint> recursive_emphasis(const std::vector<Transition>& trajectory,
                                              const TaskSpec& task);

enum class InterestMode {
  kStateInterest,  // i_t = i(S_t)
  kInitialPulse,   // i_0 = 1, i_t = 0 afterwards
};

std::string_view to_string(InterestMode mode);
/// Accepts "state-interest" and "initial-pulse".
InterestMode parse_interest_mode(std::string_view name);

struct MomentPoint {
  std::int64_t t = 0;
  double mean = 0.0;      // E[F_t]
  double variance = 0.0;  // Var[F_t]
};

/// Exact first and second moments of F_t for t = 0..t_max, starting from the
/// scenario's start state, by propagating u_t(s) = E[F_t 1{S_t=s}] and
/// w_t(s) = E[F_t^2 1{S_t=s}] through the behaviour chain.
std::vector<MomentPoint> f_moment_curve(const Scenario& scenario, InterestMode mode,
                                        std::int64_t t_max);

/// Closed form for the pulse mode, available when gamma is constant and
/// c = sum_a pi^2/mu is the same in every state:
/// mean = gamma^t, variance = (gamma^2 c)^t - gamma^(2t).
std::optional<MomentPoint> pulse_moment_closed_form(const TaskSpec& task, std::int64_t t);

/// Threshold on |theta|_inf above which a run is declared diverged.
inline constexpr double kDivergenceThreshold = 1e9;

struct RunConfig {
  LearnerKind kind = LearnerKind::kEmphaticTdLambda;
  std::vector<std::uint64_t> seeds;
  double alpha = 0.0;
  std::int64_t horizon = 0;
  Vector theta0;
  std::optional<double> bound;
  std::int64_t record_every = 1;  // rows kept for t % record_every == 0 and the last step
};

/// Fills alpha, horizon and theta0 from the scenario defaults.
RunConfig default_run_config(const Scenario& scenario, LearnerKind kind,
                             std::vector<std::uint64_t> seeds);

struct StepRow {
  std::int64_t t = 0;  // number of updates applied so far
  Vector theta;
  double td_error = 0.0;
  double followon = 0.0;
  double emphasis = 0.0;
  double msve = 0.0;
};

enum class RunStatus { kCompleted, kDiverged };
std::string_view to_string(RunStatus status);

struct RunRecord {
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::kCompleted;
  std::int64_t steps_completed = 0;
  Vector final_theta;
  std::vector<StepRow> rows;
};

struct ExpectedPoint {
  std::int64_t t = 0;
  Vector theta;
  double msve = 0.0;
};

struct ExperimentResult {
  std::vector<RunRecord> runs;           // in seed-list order
  std::vector<ExpectedPoint> expected;   // empty when the expected update is unavailable
  std::optional<std::string> expected_unavailable_reason;
};

/// Runs one learner per seed; each seed owns its random stream (mt19937_64
/// seeded with the seed value). Diverged runs stop early and are reported.
ExperimentResult run_experiment(const Scenario& scenario, const RunConfig& config);

/// The expected-update iteration matching a learner kind, starting at theta0.
std::vector<ExpectedPoint> expected_trajectory(const TaskSpec& task, LearnerKind kind,
                                               const Vector& theta0, double alpha,
                                               std::int64_t horizon, std::int64_t record_every);

/// CSV: seed,t,theta_0..theta_{n-1},td_error,F,M,msve (all doubles as %.17g).
void write_runs_csv(std::ostream& out, const ExperimentResult& result, Index n_features);
/// CSV: t,theta_0..theta_{n-1},msve.
void write_expected_csv(std::ostream& out, const ExperimentResult& result, Index n_features);

/// Hex FNV-1a digest of the task contents and the run configuration.
std::string config_hash(const Scenario& scenario, const RunConfig& config);

/// %.17g rendering used by every text output.
std::string format_double(double x);

}  // namespace etd
