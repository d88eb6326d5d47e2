#include "etd/experiments.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "etd/analysis.hpp"

namespace etd {

namespace {

// Two-action MDP where `left(s)` / `right(s)` give the deterministic successor.
template <typename Left, typename Right>
FiniteMdp deterministic_two_action_mdp(Index n, Left left, Right right, double reward) {
  Matrix pl = Matrix::Zero(n, n);
  Matrix pr = Matrix::Zero(n, n);
  for (Index s = 0; s < n; ++s) {
    pl(s, left(s)) = 1.0;
    pr(s, right(s)) = 1.0;
  }
  Matrix r = Matrix::Constant(n, n, reward);
  return FiniteMdp({pl, pr}, {r, r});
}

Matrix constant_policy(Index n, double p_left) {
  Matrix probs(n, 2);
  probs.col(0).setConstant(p_left);
  probs.col(1).setConstant(1.0 - p_left);
  return probs;
}

Scenario th2th_continuing() {
  Scenario sc;
  sc.name = "th2th-continuing";
  sc.description = "two states with features 1 and 2, gamma 0.9, no terminal state";
  sc.provenance = "theta->2theta counterexample, continuing variant (divergence demo)";
  sc.task.mdp = deterministic_two_action_mdp(
      2, [](Index) { return Index{0}; }, [](Index) { return Index{1}; }, 0.0);
  sc.task.target = Policy{constant_policy(2, 0.0)};
  sc.task.behavior = Policy{constant_policy(2, 0.5)};
  sc.task.gamma = Vector::Constant(2, 0.9);
  sc.task.lambda = Vector::Zero(2);
  sc.task.interest = Vector::Ones(2);
  sc.task.features = FeatureMap{(Matrix(2, 1) << 1.0, 2.0).finished()};
  sc.default_alpha = 0.001;
  sc.default_theta0 = Vector::Ones(1);
  sc.horizon = 30000;
  sc.runs = 50;
  return sc;
}

Scenario th2th_episodic() {
  Scenario sc;
  sc.name = "th2th-episodic";
  sc.description = "theta->2theta pair followed by a soft-terminal state (gamma 0, feature 0) "
                   "that restarts in the left state; behaviour goes left w.p. 0.9";
  sc.provenance = "theta->2theta counterexample, episodic variant (bounded followon)";
  sc.task.mdp = deterministic_two_action_mdp(
      3, [](Index) { return Index{0}; },
      [](Index s) { return s == 2 ? Index{0} : s + 1; }, 0.0);
  sc.task.target = Policy{constant_policy(3, 0.0)};
  sc.task.behavior = Policy{constant_policy(3, 0.9)};
  sc.task.gamma = (Vector(3) << 0.9, 0.9, 0.0).finished();
  sc.task.lambda = Vector::Zero(3);
  sc.task.interest = Vector::Ones(3);
  sc.task.features = FeatureMap{(Matrix(3, 1) << 1.0, 2.0, 0.0).finished()};
  sc.default_alpha = 0.0001;
  sc.default_theta0 = Vector::Ones(1);
  sc.horizon = 30000;
  sc.runs = 50;
  return sc;
}

Scenario chain5() {
  Scenario sc;
  sc.name = "chain5";
  sc.description = "5-state chain with soft termination at both ends, reward +1, "
                   "behaviour left w.p. 2/3, target always right, 3 shared parameters";
  sc.provenance = "5-state soft-termination chain (fixed-point MSVE comparison)";
  sc.task.mdp = deterministic_two_action_mdp(
      5, [](Index s) { return std::max<Index>(s - 1, 0); },
      [](Index s) { return std::min<Index>(s + 1, 4); }, 1.0);
  sc.task.target = Policy{constant_policy(5, 0.0)};
  sc.task.behavior = Policy{constant_policy(5, 2.0 / 3.0)};
  sc.task.gamma = (Vector(5) << 0.0, 1.0, 1.0, 1.0, 0.0).finished();
  sc.task.lambda = Vector::Zero(5);
  sc.task.interest = Vector::Ones(5);
  // Two right-hand states share the last parameter; both have value 1.
  sc.task.features = FeatureMap{(Matrix(5, 3) << 1, 0, 0,
                                                 1, 1, 0,
                                                 0, 1, 0,
                                                 0, 0, 1,
                                                 0, 0, 1).finished()};
  sc.default_alpha = 0.001;
  sc.default_theta0 = Vector::Zero(3);
  sc.horizon = 50000;
  sc.runs = 20;
  return sc;
}

const std::map<std::string, Scenario (*)()>& registry() {
  static const std::map<std::string, Scenario (*)()> r{
      {"chain5", &chain5},
      {"th2th-continuing", &th2th_continuing},
      {"th2th-episodic", &th2th_episodic},
  };
  return r;
}

double interest_at(const TaskSpec& task, InterestMode mode, std::int64_t t, Index s) {
  if (mode == InterestMode::kInitialPulse) return t == 0 ? 1.0 : 0.0;
  return task.interest(s);
}

// sum_a pi(a|s)^2 / mu(a|s) p(.|s,a), the second-moment analogue of P_pi.
Matrix rho_squared_transition(const TaskSpec& task) {
  const Index n = task.num_states();
  Matrix out = Matrix::Zero(n, n);
  for (Index s = 0; s < n; ++s) {
    for (Index a = 0; a < task.num_actions(); ++a) {
      const double pi = task.target(s, a);
      if (pi < kProbabilityZero) continue;
      const double mu = task.behavior(s, a);
      if (mu < kProbabilityZero) throw CoverageError("coverage violated at state " + std::to_string(s));
      out.row(s) += (pi * pi / mu) * task.mdp.transition(a).row(s);
    }
  }
  return out;
}

// Precomputed pieces for fast per-step MSVE.
struct MsveEvaluator {
  Vector weights;
  Vector v_pi;
  Matrix phi;

  explicit MsveEvaluator(const TaskSpec& task)
      : weights(weighted_interest(task)), v_pi(true_values(task)), phi(task.features.phi) {}

  double operator()(const Vector& theta) const {
    return (weights.array() * (v_pi - phi * theta).array().square()).sum();
  }
};

// FNV-1a, 64 bit.
class Fnv {
 public:
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h_ ^= p[i];
      h_ *= 1099511628211ULL;
    }
  }
  void f64(double x) { bytes(&x, sizeof x); }
  void i64(std::int64_t x) { bytes(&x, sizeof x); }
  void str(std::string_view s) {
    i64(static_cast<std::int64_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void mat(const Matrix& m) {
    i64(m.rows());
    i64(m.cols());
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) f64(m(i, j));
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 14695981039346656037ULL;
};

}  // namespace

std::vector<std::string> scenario_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

Scenario build_scenario(const std::string& name) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw std::invalid_argument("unknown scenario '" + name + "'");
  return it->second();
}

std::vector<Transition> sample_trajectory(const TaskSpec& task, Index start, std::int64_t steps,
                                          Rng& rng) {
  std::vector<Transition> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(steps, 0)));
  Index s = start;
  for (std::int64_t t = 0; t < steps; ++t) {
    out.push_back(sample_transition(task, s, rng));
    s = out.back().next_state;
  }
  return out;
}

std::vector<EmphasisPoint> forward_view_emphasis(const std::vector<Transition>& trajectory,
                                                 const TaskSpec& task) {
  const std::size_t len = trajectory.size();
  std::vector<EmphasisPoint> out(len);
  for (std::size_t t = 0; t < len; ++t) {
    const Index st = trajectory[t].state;
    const double gamma_t = task.gamma(st);
    const double lambda_t = task.lambda(st);

    double sum = 0.0;
    for (std::size_t k = 0; k < t; ++k) {
      double prod = 1.0;
      for (std::size_t j = k + 1; j < t; ++j) {
        const Index sj = trajectory[j].state;
        prod *= task.gamma(sj) * task.lambda(sj) * trajectory[j].rho;
      }
      sum += out[k].emphasis * trajectory[k].rho * prod;
    }
    out[t].followon = task.interest(st) + gamma_t * sum;
    out[t].emphasis = task.interest(st) + sum * gamma_t * (1.0 - lambda_t);
  }
  return out;
}

std::vector<EmphasisPoint> recursive_emphasis(const std::vector<Transition>& trajectory,
                                              const TaskSpec& task) {
  std::vector<EmphasisPoint> out;
  out.reserve(trajectory.size());
  double followon = 0.0;
  double prev_rho = 0.0;
  for (const Transition& tr : trajectory) {
    const Index s = tr.state;
    followon = prev_rho * task.gamma(s) * followon + task.interest(s);
    const double emphasis = task.lambda(s) * task.interest(s) + (1.0 - task.lambda(s)) * followon;
    out.push_back({followon, emphasis});
    prev_rho = tr.rho;
  }
  return out;
}

std::string_view to_string(InterestMode mode) {
  return mode == InterestMode::kInitialPulse ? "initial-pulse" : "state-interest";
}

InterestMode parse_interest_mode(std::string_view name) {
  if (name == "state-interest") return InterestMode::kStateInterest;
  if (name == "initial-pulse") return InterestMode::kInitialPulse;
  throw std::invalid_argument("unknown interest mode '" + std::string(name) + "'");
}

std::vector<MomentPoint> f_moment_curve(const Scenario& scenario, InterestMode mode,
                                        std::int64_t t_max) {
  if (t_max < 0) throw std::invalid_argument("t_max must be non-negative");
  const TaskSpec& task = scenario.task;
  const Index n = task.num_states();
  const Matrix p_mu_t = induced_transition(task.mdp, task.behavior).transpose();
  const Matrix p_pi_t = induced_transition(task.mdp, task.target).transpose();
  const Matrix p_rho2_t = rho_squared_transition(task).transpose();

  Vector q = Vector::Zero(n);  // P(S_t = s)
  q(scenario.start_state) = 1.0;
  Vector i0(n);
  for (Index s = 0; s < n; ++s) i0(s) = interest_at(task, mode, 0, s);
  Vector u = i0.cwiseProduct(q);
  Vector w = i0.cwiseProduct(i0).cwiseProduct(q);

  std::vector<MomentPoint> out;
  out.reserve(static_cast<std::size_t>(t_max + 1));
  auto push = [&](std::int64_t t) {
    const double mean = u.sum();
    out.push_back({t, mean, w.sum() - mean * mean});
  };
  push(0);
  for (std::int64_t t = 1; t <= t_max; ++t) {
    q = p_mu_t * q;
    Vector it(n);
    for (Index s = 0; s < n; ++s) it(s) = interest_at(task, mode, t, s);
    const Vector carried = p_pi_t * u;  // E[rho_{t-1} F_{t-1} 1{S_t = s}]
    const Vector carried2 = p_rho2_t * w;
    w = task.gamma.cwiseProduct(task.gamma).cwiseProduct(carried2) +
        2.0 * task.gamma.cwiseProduct(it).cwiseProduct(carried) +
        it.cwiseProduct(it).cwiseProduct(q);
    u = task.gamma.cwiseProduct(carried) + it.cwiseProduct(q);
    push(t);
  }
  return out;
}

std::optional<MomentPoint> pulse_moment_closed_form(const TaskSpec& task, std::int64_t t) {
  const Index n = task.num_states();
  const double gamma = task.gamma(0);
  if ((task.gamma.array() != gamma).any()) return std::nullopt;
  Vector c = Vector::Zero(n);
  for (Index s = 0; s < n; ++s) {
    for (Index a = 0; a < task.num_actions(); ++a) {
      const double pi = task.target(s, a);
      if (pi >= kProbabilityZero) c(s) += pi * pi / task.behavior(s, a);
    }
  }
  if (c.maxCoeff() - c.minCoeff() > 1e-15 * c.maxCoeff()) return std::nullopt;
  const double td = static_cast<double>(t);
  const double mean = std::pow(gamma, td);
  return MomentPoint{t, mean, std::pow(gamma * gamma * c(0), td) - mean * mean};
}

std::string_view to_string(RunStatus status) {
  return status == RunStatus::kDiverged ? "diverged" : "completed";
}

RunConfig default_run_config(const Scenario& scenario, LearnerKind kind,
                             std::vector<std::uint64_t> seeds) {
  RunConfig cfg;
  cfg.kind = kind;
  cfg.seeds = std::move(seeds);
  cfg.alpha = scenario.default_alpha;
  cfg.horizon = scenario.horizon;
  cfg.theta0 = scenario.default_theta0;
  return cfg;
}

std::vector<ExpectedPoint> expected_trajectory(const TaskSpec& task, LearnerKind kind,
                                               const Vector& theta0, double alpha,
                                               std::int64_t horizon, std::int64_t record_every) {
  TaskSpec effective = task;
  Method method = Method::kEmphatic;
  switch (kind) {
    case LearnerKind::kTd0:
      // Plain TD(0) on behaviour data evaluates the behaviour policy.
      effective.target = task.behavior;
      method = Method::kOnPolicyTd0;
      break;
    case LearnerKind::kOffPolicyTd0:
      method = Method::kOffPolicyTd0;
      break;
    case LearnerKind::kEmphaticTd0:
      effective.lambda.setZero();
      effective.interest.setOnes();
      break;
    case LearnerKind::kEmphaticTdLambda:
      break;
  }
  const ExpectedUpdate eu = expected_update(effective, method);
  const MsveEvaluator msve_of(task);
  const std::int64_t every = std::max<std::int64_t>(record_every, 1);

  std::vector<ExpectedPoint> out;
  Vector theta = theta0;
  out.push_back({0, theta, msve_of(theta)});
  for (std::int64_t t = 1; t <= horizon; ++t) {
    theta = deterministic_step(theta, eu.a, eu.b, alpha);
    if (t % every == 0 || t == horizon) out.push_back({t, theta, msve_of(theta)});
  }
  return out;
}

ExperimentResult run_experiment(const Scenario& scenario, const RunConfig& config) {
  const TaskSpec& task = scenario.task;
  const Vector theta0 = config.theta0.size() ? config.theta0 : scenario.default_theta0;
  const std::int64_t every = std::max<std::int64_t>(config.record_every, 1);
  const MsveEvaluator msve_of(task);

  ExperimentResult result;
  try {
    result.expected =
        expected_trajectory(task, config.kind, theta0, config.alpha, config.horizon, every);
  } catch (const Error& e) {
    result.expected_unavailable_reason = e.what();
  }

  for (const std::uint64_t seed : config.seeds) {
    Rng rng(seed);
    RunRecord rec;
    rec.seed = seed;
    LearnerState state =
        make_learner_state(task, scenario.start_state, theta0, config.alpha, config.bound);
    rec.rows.push_back({0, state.theta, 0.0, state.followon, 0.0, msve_of(state.theta)});
    Index s = scenario.start_state;
    for (std::int64_t t = 1; t <= config.horizon; ++t) {
      const Transition tr = sample_transition(task, s, rng);
      StepRecord step;
      try {
        step = learner_step(config.kind, state, tr, task);
      } catch (const DivergenceError&) {
        rec.status = RunStatus::kDiverged;
        break;
      }
      s = tr.next_state;
      rec.steps_completed = t;
      const bool diverged = step.theta_after.lpNorm<Eigen::Infinity>() > kDivergenceThreshold;
      if (diverged || t % every == 0 || t == config.horizon) {
        rec.rows.push_back({t, step.theta_after, step.td_error, step.followon, step.emphasis,
                            msve_of(step.theta_after)});
      }
      if (diverged) {
        rec.status = RunStatus::kDiverged;
        break;
      }
    }
    rec.final_theta = state.theta;
    result.runs.push_back(std::move(rec));
  }
  return result;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_runs_csv(std::ostream& out, const ExperimentResult& result, Index n_features) {
  out << "seed,t";
  for (Index k = 0; k < n_features; ++k) out << ",theta_" << k;
  out << ",td_error,F,M,msve\n";
  for (const RunRecord& rec : result.runs) {
    for (const StepRow& row : rec.rows) {
      out << rec.seed << ',' << row.t;
      for (Index k = 0; k < n_features; ++k) out << ',' << format_double(row.theta(k));
      out << ',' << format_double(row.td_error) << ',' << format_double(row.followon) << ','
          << format_double(row.emphasis) << ',' << format_double(row.msve) << '\n';
    }
  }
}

void write_expected_csv(std::ostream& out, const ExperimentResult& result, Index n_features) {
  out << "t";
  for (Index k = 0; k < n_features; ++k) out << ",theta_" << k;
  out << ",msve\n";
  for (const ExpectedPoint& p : result.expected) {
    out << p.t;
    for (Index k = 0; k < n_features; ++k) out << ',' << format_double(p.theta(k));
    out << ',' << format_double(p.msve) << '\n';
  }
}

std::string config_hash(const Scenario& scenario, const RunConfig& config) {
  const TaskSpec& task = scenario.task;
  Fnv h;
  h.str(scenario.name);
  for (Index a = 0; a < task.num_actions(); ++a) {
    h.mat(task.mdp.transition(a));
    h.mat(task.mdp.reward(a));
  }
  h.mat(task.target.probs);
  h.mat(task.behavior.probs);
  h.mat(task.gamma);
  h.mat(task.lambda);
  h.mat(task.interest);
  h.mat(task.features.phi);
  h.i64(scenario.start_state);

  h.str(to_string(config.kind));
  h.i64(static_cast<std::int64_t>(config.seeds.size()));
  for (const std::uint64_t s : config.seeds) h.i64(static_cast<std::int64_t>(s));
  h.f64(config.alpha);
  h.i64(config.horizon);
  h.mat(config.theta0.size() ? config.theta0 : scenario.default_theta0);
  h.f64(config.bound.value_or(-1.0));
  h.i64(config.record_every);

  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h.value());
  return buf;
}

}  // namespace etd
