#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "etd/analysis.hpp"
#include "etd/experiments.hpp"
#include "etd/random_task.hpp"
#include "oracles.hpp"

using namespace etd;

TEST(Scenarios, NamesSortedAndBuildable) {
  const auto names = scenario_names();
  EXPECT_EQ(names, (std::vector<std::string>{"chain5", "th2th-continuing", "th2th-episodic"}));
  for (const auto& n : names) {
    const Scenario sc = build_scenario(n);
    EXPECT_EQ(sc.name, n);
    EXPECT_TRUE(validate_task(sc.task).ok());
    EXPECT_EQ(sc.default_theta0.size(), sc.task.num_features());
  }
  EXPECT_THROW(build_scenario("baird"), std::invalid_argument);
}

TEST(Scenarios, Settings) {
  const Scenario cont = build_scenario("th2th-continuing");
  EXPECT_EQ(cont.default_alpha, 0.001);
  EXPECT_EQ(cont.default_theta0(0), 1.0);
  const Scenario epi = build_scenario("th2th-episodic");
  EXPECT_EQ(epi.default_alpha, 0.0001);
  EXPECT_EQ(epi.task.num_states(), 3);
  EXPECT_EQ(epi.task.gamma(2), 0.0);
  EXPECT_EQ(epi.task.features.phi(2, 0), 0.0);
  EXPECT_EQ(epi.task.behavior(0, 0), 0.9);
  const Scenario ch = build_scenario("chain5");
  EXPECT_EQ(ch.task.features.phi.cols(), 3);
  EXPECT_EQ(ch.default_theta0, Vector::Zero(3));
}

TEST(Scenarios, AnalysisHeadlines) {
  const auto off = expected_update(build_scenario("th2th-continuing").task, Method::kOffPolicyTd0);
  EXPECT_NEAR(off.a(0, 0), -0.2, 1e-12);
  const Scenario ch = build_scenario("chain5");
  const Vector d = stationary_distribution(induced_transition(ch.task.mdp, ch.task.behavior));
  EXPECT_LT((d - (Vector(5) << 0.52, 0.26, 0.13, 0.06, 0.03).finished()).lpNorm<Eigen::Infinity>(), 0.005);
  const auto epi = expected_update(build_scenario("th2th-episodic").task, Method::kEmphatic);
  EXPECT_TRUE(definiteness_certificate(epi.key).positive_definite());
}

TEST(ForwardView, FirstEmphasisIsInterest) {
  Rng rng(1);
  const TaskSpec task = random_task(rng);
  const auto traj = sample_trajectory(task, 0, 5, rng);
  const auto fv = forward_view_emphasis(traj, task);
  EXPECT_EQ(fv[0].emphasis, task.interest(traj[0].state));
  EXPECT_EQ(fv[0].followon, task.interest(traj[0].state));
}

TEST(ForwardView, LambdaOneGivesInterest) {
  Rng rng(2);
  TaskSpec task = random_task(rng);
  task.lambda.setOnes();
  const auto traj = sample_trajectory(task, 0, 30, rng);
  const auto fv = forward_view_emphasis(traj, task);
  for (std::size_t t = 0; t < traj.size(); ++t) EXPECT_EQ(fv[t].emphasis, task.interest(traj[t].state));
}

TEST(ForwardView, MatchesLearnerOnChain5WithRandomLambda) {
  Rng rng(3);
  TaskSpec task = build_scenario("chain5").task;
  for (int k = 0; k < 50; ++k) {
    for (Index s = 0; s < 5; ++s) task.lambda(s) = uniform01(rng);
    const auto traj = sample_trajectory(task, static_cast<Index>(k % 5), 30, rng);
    const auto fv = forward_view_emphasis(traj, task);
    LearnerState st = make_learner_state(task, traj[0].state, Vector::Zero(3), 0.0);
    for (std::size_t t = 0; t < traj.size(); ++t) {
      const StepRecord rec = emphatic_td_lambda_step(st, traj[t], task);
      ASSERT_NEAR(rec.followon, fv[t].followon, 1e-10 * std::max(1.0, std::abs(fv[t].followon)));
      ASSERT_NEAR(rec.emphasis, fv[t].emphasis, 1e-10 * std::max(1.0, std::abs(fv[t].emphasis)));
    }
  }
}

TEST(ForwardView, RecursiveHelperMatchesLearner) {
  Rng rng(4);
  const TaskSpec task = random_task(rng);
  const auto traj = sample_trajectory(task, 0, 200, rng);
  const auto rv = recursive_emphasis(traj, task);
  LearnerState st = make_learner_state(task, 0, Vector::Zero(task.num_features()), 0.0);
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const StepRecord rec = emphatic_td_lambda_step(st, traj[t], task);
    ASSERT_EQ(rec.followon, rv[t].followon);
    ASSERT_EQ(rec.emphasis, rv[t].emphasis);
  }
}

TEST(Moments, PulseOnTh2thMatchesClosedForm) {
  const Scenario sc = build_scenario("th2th-continuing");
  const auto curve = f_moment_curve(sc, InterestMode::kInitialPulse, 30);
  ASSERT_EQ(curve.size(), 31u);
  for (const auto& p : curve) {
    const double t = static_cast<double>(p.t);
    EXPECT_NEAR(p.mean, std::pow(0.9, t), 1e-12);
    const double var = std::pow(1.62, t) - std::pow(0.81, t);
    EXPECT_NEAR(p.variance, var, 1e-12 * std::max(1.0, var));
    const auto closed = pulse_moment_closed_form(sc.task, p.t);
    ASSERT_TRUE(closed.has_value());
    EXPECT_NEAR(closed->variance, var, 1e-12 * std::max(1.0, var));
  }
}

TEST(Moments, NoClosedFormWithStateDependentGamma) {
  EXPECT_FALSE(pulse_moment_closed_form(build_scenario("chain5").task, 3).has_value());
}

TEST(Moments, ZeroDiscountCollapsesToInterest) {
  Scenario sc = build_scenario("chain5");
  sc.task.gamma.setZero();
  sc.task.interest << 1, 2, 3, 4, 5;
  const auto curve = f_moment_curve(sc, InterestMode::kStateInterest, 12);
  const Matrix p_mu = oracle::policy_transition(sc.task, sc.task.behavior.probs);
  Vector q = Vector::Zero(5);
  q(sc.start_state) = 1.0;
  for (const auto& p : curve) {
    const double mean = q.dot(sc.task.interest);
    const double second = q.dot(sc.task.interest.cwiseProduct(sc.task.interest));
    EXPECT_NEAR(p.mean, mean, 1e-12);
    EXPECT_NEAR(p.variance, second - mean * mean, 1e-12);
    q = p_mu.transpose() * q;
  }
}

TEST(Moments, TmaxZeroIsDeterministicStart) {
  const Scenario sc = build_scenario("chain5");
  const auto curve = f_moment_curve(sc, InterestMode::kStateInterest, 0);
  ASSERT_EQ(curve.size(), 1u);
  EXPECT_EQ(curve[0].mean, sc.task.interest(sc.start_state));
  EXPECT_EQ(curve[0].variance, 0.0);
}

TEST(Moments, MatchMonteCarlo) {
  struct Case {
    const char* name;
    InterestMode mode;
    int t;
  };
  for (const Case c : {Case{"th2th-continuing", InterestMode::kInitialPulse, 10},
                       Case{"chain5", InterestMode::kStateInterest, 12},
                       Case{"th2th-episodic", InterestMode::kStateInterest, 15}}) {
    const Scenario sc = build_scenario(c.name);
    const auto curve = f_moment_curve(sc, c.mode, c.t);
    const auto mc = oracle::monte_carlo_followon(sc.task, sc.start_state, c.t, 100000,
                                                 c.mode == InterestMode::kInitialPulse, 7);
    EXPECT_LT(std::abs(mc.mean - curve.back().mean), 3.0 * mc.std_error) << c.name;
    if (std::string(c.name) != "th2th-continuing") {
      // Bounded F: the sample variance is a usable estimate too.
      EXPECT_NEAR(mc.variance, curve.back().variance, 0.05 * curve.back().variance + 1e-9) << c.name;
    }
  }
}

TEST(Moments, VarianceNonNegative) {
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    Scenario sc;
    sc.task = random_task(rng);
    for (const auto mode : {InterestMode::kStateInterest, InterestMode::kInitialPulse}) {
      for (const auto& p : f_moment_curve(sc, mode, 20)) EXPECT_GE(p.variance, -1e-12);
    }
  }
}

TEST(RunExperiment, DeterministicBytes) {
  const Scenario sc = build_scenario("chain5");
  RunConfig cfg = default_run_config(sc, LearnerKind::kEmphaticTdLambda, {1, 2, 3});
  cfg.horizon = 2000;
  std::ostringstream a, b;
  write_runs_csv(a, run_experiment(sc, cfg), 3);
  write_runs_csv(b, run_experiment(sc, cfg), 3);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(config_hash(sc, cfg), config_hash(sc, cfg));
  RunConfig other = cfg;
  other.alpha *= 2;
  EXPECT_NE(config_hash(sc, cfg), config_hash(sc, other));
}

TEST(RunExperiment, RowsAndRecording) {
  const Scenario sc = build_scenario("th2th-episodic");
  RunConfig cfg = default_run_config(sc, LearnerKind::kEmphaticTd0, {9});
  cfg.horizon = 1000;
  cfg.record_every = 100;
  const auto res = run_experiment(sc, cfg);
  ASSERT_EQ(res.runs.size(), 1u);
  const auto& rows = res.runs[0].rows;
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_EQ(rows.front().t, 0);
  EXPECT_EQ(rows.back().t, 1000);
  EXPECT_EQ(res.expected.size(), 11u);
  EXPECT_EQ(res.runs[0].status, RunStatus::kCompleted);
  EXPECT_EQ(res.runs[0].final_theta, rows.back().theta);

  std::ostringstream csv;
  write_runs_csv(csv, res, 1);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "seed,t,theta_0,td_error,F,M,msve");
}

TEST(RunExperiment, SeedsAreIndependentOfListOrder) {
  const Scenario sc = build_scenario("chain5");
  RunConfig a = default_run_config(sc, LearnerKind::kOffPolicyTd0, {4, 5});
  RunConfig b = default_run_config(sc, LearnerKind::kOffPolicyTd0, {5, 4});
  a.horizon = b.horizon = 500;
  const auto ra = run_experiment(sc, a), rb = run_experiment(sc, b);
  EXPECT_EQ(ra.runs[0].final_theta, rb.runs[1].final_theta);
  EXPECT_EQ(ra.runs[1].final_theta, rb.runs[0].final_theta);
}

TEST(RunExperiment, DivergenceIsRecordedNotThrown) {
  const Scenario sc = build_scenario("th2th-continuing");
  RunConfig cfg = default_run_config(sc, LearnerKind::kOffPolicyTd0, {1, 2});
  cfg.alpha = 0.5;
  cfg.horizon = 100000;
  cfg.record_every = 1000;
  const auto res = run_experiment(sc, cfg);
  for (const auto& r : res.runs) {
    EXPECT_EQ(r.status, RunStatus::kDiverged);
    EXPECT_LT(r.steps_completed, cfg.horizon);
    EXPECT_GT(r.rows.back().theta.lpNorm<Eigen::Infinity>(), kDivergenceThreshold);
  }
}

TEST(RunExperiment, ExpectedTrajectoryContractsForStableAlgorithm) {
  const Scenario sc = build_scenario("th2th-episodic");
  const auto traj = expected_trajectory(sc.task, LearnerKind::kEmphaticTd0, sc.default_theta0,
                                        sc.default_alpha, 5000, 1);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    ASSERT_LT(std::abs(traj[k].theta(0)), std::abs(traj[k - 1].theta(0)));
  }
}

TEST(RunExperiment, OnPolicyTd0ExpectedUsesBehaviourChain) {
  const Scenario sc = build_scenario("th2th-continuing");
  RunConfig cfg = default_run_config(sc, LearnerKind::kTd0, {1});
  cfg.horizon = 10;
  const auto res = run_experiment(sc, cfg);
  EXPECT_FALSE(res.expected_unavailable_reason.has_value());
  EXPECT_EQ(res.expected.size(), 11u);
}

TEST(RunExperiment, Chain5EmphaticMsveApproachesFixedPoint) {
  const Scenario sc = build_scenario("chain5");
  RunConfig cfg = default_run_config(sc, LearnerKind::kEmphaticTdLambda, {1, 2, 3, 4, 5});
  cfg.record_every = 1000;
  const auto res = run_experiment(sc, cfg);
  const AnalysisReport rep = analyze(sc.task, Method::kEmphatic);
  EXPECT_NEAR(res.expected.back().msve, rep.msve_at_fixed_point, 1e-6);
  for (const auto& r : res.runs) {
    EXPECT_LT(r.rows.back().msve, r.rows.front().msve);
    EXPECT_LT(r.rows.back().msve, 2.0 * rep.msve_at_fixed_point);
  }
}

TEST(InterestModeNames, RoundTrip) {
  for (auto m : {InterestMode::kStateInterest, InterestMode::kInitialPulse})
    EXPECT_EQ(parse_interest_mode(to_string(m)), m);
  EXPECT_THROW(parse_interest_mode("pulse"), std::invalid_argument);
}
