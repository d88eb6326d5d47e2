#include "etd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace etd {

namespace {

constexpr double kMinReciprocalCondition = 1e-14;
constexpr double kStationaryResidual = 1e-12;
constexpr double kStationaryFloor = 1e-12;
constexpr double kNullSpaceThreshold = 1e-10;
constexpr double kRouteTolerance = 1e-10;

std::string describe(double value) {
  std::ostringstream os;
  os.precision(3);
  os << value;
  return os.str();
}

/// LU solve of a square system; refuses numerically singular matrices.
template <typename Rhs>
Matrix solve(const Matrix& lhs, const Rhs& rhs, const char* what) {
  if (lhs.rows() != lhs.cols() || lhs.rows() != rhs.rows()) {
    throw DimensionError(std::string(what) + ": system shape mismatch");
  }
  Eigen::PartialPivLU<Matrix> lu(lhs);
  const double rcond = lu.rcond();
  if (!(rcond > kMinReciprocalCondition)) {
    throw SingularSystemError(std::string(what) + " is singular (rcond " + describe(rcond) + ")");
  }
  return lu.solve(rhs);
}

Vector solve_vec(const Matrix& lhs, const Vector& rhs, const char* what) {
  return solve(lhs, rhs, what).col(0);
}

Matrix identity(Index n) { return Matrix::Identity(n, n); }

struct TaskMatrices {
  Matrix p_pi;
  Matrix p_pi_gamma;         // P_pi Gamma
  Matrix p_pi_gamma_lambda;  // P_pi Gamma Lambda
  Vector r_pi;
  Vector d_mu;
  Vector ivec;

  explicit TaskMatrices(const TaskSpec& task)
      : p_pi(induced_transition(task.mdp, task.target)),
        p_pi_gamma(p_pi * task.gamma.asDiagonal()),
        p_pi_gamma_lambda(p_pi_gamma * task.lambda.asDiagonal()),
        r_pi(expected_reward_vector(task.mdp, task.target)),
        d_mu(stationary_distribution(induced_transition(task.mdp, task.behavior))),
        ivec(d_mu.cwiseProduct(task.interest)) {}

  Index n() const { return p_pi.rows(); }

  /// (I - P_pi Gamma Lambda)^{-1} (I - P_pi Gamma) = I - P_pi^lambda.
  Matrix one_minus_p_lambda() const {
    return solve(identity(n()) - p_pi_gamma_lambda, identity(n()) - p_pi_gamma,
                 "I - P_pi Gamma Lambda");
  }

  Vector followon(const TaskSpec& task) const {
    return solve_vec(identity(n()) - task.gamma.asDiagonal() * p_pi.transpose(), ivec,
                     "I - Gamma P_pi^T");
  }

  Vector emphasis(const TaskSpec& task, const Matrix& one_minus_pl) const {
    Vector m = solve_vec(one_minus_pl.transpose(), ivec, "I - P_pi^lambda^T");
    const Vector f = followon(task);
    const Vector via_followon =
        task.lambda.cwiseProduct(ivec) + (Vector::Ones(n()) - task.lambda).cwiseProduct(f);
    const double gap = (m - via_followon).lpNorm<Eigen::Infinity>();
    if (gap > kRouteTolerance * (1.0 + m.lpNorm<Eigen::Infinity>())) {
      throw NumericalError("emphasis routes disagree by " + describe(gap));
    }
    return m;
  }
};

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kOnPolicyTd0: return "on-policy-td0";
    case Method::kOffPolicyTd0: return "off-policy-td0";
    case Method::kEmphatic: return "emphatic";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "on-policy-td0") return Method::kOnPolicyTd0;
  if (name == "off-policy-td0") return Method::kOffPolicyTd0;
  if (name == "emphatic") return Method::kEmphatic;
  throw std::invalid_argument("unknown analysis method '" + std::string(name) + "'");
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kPositiveDefinite: return "positive-definite";
    case Verdict::kIndefinite: return "indefinite";
    case Verdict::kSemidefiniteBoundary: return "semidefinite-boundary";
  }
  return "unknown";
}

Vector stationary_distribution(const Matrix& p) {
  const Index n = p.rows();
  if (n == 0 || p.cols() != n) throw DimensionError("stationary_distribution needs a square matrix");
  if (!p.allFinite()) throw NumericalError("transition matrix has non-finite entries");

  const Matrix balance = p.transpose() - identity(n);
  Eigen::FullPivLU<Matrix> lu(balance);
  lu.setThreshold(kNullSpaceThreshold);
  if (lu.rank() < n - 1) {
    throw ReducibleChainError("stationary distribution is not unique (null space dimension " +
                              std::to_string(n - lu.rank()) + ")");
  }

  Matrix augmented(n + 1, n);
  augmented.topRows(n) = balance;
  augmented.row(n).setOnes();
  Vector rhs = Vector::Zero(n + 1);
  rhs(n) = 1.0;
  Vector d = augmented.colPivHouseholderQr().solve(rhs);

  const double residual = (p.transpose() * d - d).lpNorm<Eigen::Infinity>();
  if (!(residual < kStationaryResidual)) {
    throw NumericalError("stationary solve residual " + describe(residual) + " too large");
  }
  const double smallest = d.minCoeff();
  if (!(smallest > kStationaryFloor)) {
    throw ReducibleChainError("stationary distribution has a component <= 1e-12 (" +
                              describe(smallest) + "); chain has transient states");
  }
  return d;
}

double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix discounted_target_transition(const TaskSpec& task) {
  return induced_transition(task.mdp, task.target) * task.gamma.asDiagonal();
}

Vector true_values(const TaskSpec& task) {
  const Matrix p_pi_gamma = discounted_target_transition(task);
  const Vector r_pi = expected_reward_vector(task.mdp, task.target);
  return solve_vec(identity(task.num_states()) - p_pi_gamma, r_pi, "I - P_pi Gamma");
}

Vector weighted_interest(const TaskSpec& task) {
  return stationary_distribution(induced_transition(task.mdp, task.behavior))
      .cwiseProduct(task.interest);
}

Vector followon_vector(const TaskSpec& task) {
  return TaskMatrices(task).followon(task);
}

Matrix p_lambda(const TaskSpec& task) {
  const TaskMatrices tm(task);
  return identity(tm.n()) - tm.one_minus_p_lambda();
}

Vector emphasis_vector(const TaskSpec& task) {
  const TaskMatrices tm(task);
  return tm.emphasis(task, tm.one_minus_p_lambda());
}

ExpectedUpdate expected_update(const TaskSpec& task, Method method) {
  const TaskMatrices tm(task);
  const Matrix& phi = task.features.phi;
  const Index n = tm.n();
  ExpectedUpdate out;

  switch (method) {
    case Method::kOnPolicyTd0:
    case Method::kOffPolicyTd0: {
      const Vector weights = method == Method::kOnPolicyTd0 ? stationary_distribution(tm.p_pi) : tm.d_mu;
      out.key = weights.asDiagonal() * (identity(n) - tm.p_pi_gamma);
      out.b = phi.transpose() * weights.cwiseProduct(tm.r_pi);
      break;
    }
    case Method::kEmphatic: {
      const Matrix one_minus_pl = tm.one_minus_p_lambda();
      const Vector m = tm.emphasis(task, one_minus_pl);
      out.key = m.asDiagonal() * one_minus_pl;
      const Vector lambda_return_rewards =
          solve_vec(identity(n) - tm.p_pi_gamma_lambda, tm.r_pi, "I - P_pi Gamma Lambda");
      out.b = phi.transpose() * m.cwiseProduct(lambda_return_rewards);
      break;
    }
  }
  out.a = phi.transpose() * out.key * phi;
  return out;
}

Matrix emphatic_a_direct(const TaskSpec& task) {
  const TaskMatrices tm(task);
  const Matrix& phi = task.features.phi;
  const Index n = tm.n();
  const Vector m = tm.emphasis(task, tm.one_minus_p_lambda());
  const Matrix rhs = (identity(n) - tm.p_pi_gamma) * phi;
  const Matrix x = solve(identity(n) - tm.p_pi_gamma_lambda, rhs, "I - P_pi Gamma Lambda");
  return phi.transpose() * m.asDiagonal() * x;
}

DefinitenessCertificate definiteness_certificate(const Matrix& mat) {
  if (mat.rows() != mat.cols()) throw DimensionError("definiteness needs a square matrix");
  if (!mat.allFinite()) throw NumericalError("matrix has non-finite entries");
  DefinitenessCertificate cert;
  cert.column_sums = mat.colwise().sum().transpose();
  if (mat.size() == 0) return cert;

  const Matrix sym = 0.5 * (mat + mat.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigen solver failed");
  cert.min_sym_eig = solver.eigenvalues().minCoeff();
  if (cert.min_sym_eig > kDefinitenessTolerance) {
    cert.verdict = Verdict::kPositiveDefinite;
  } else if (cert.min_sym_eig < -kDefinitenessTolerance) {
    cert.verdict = Verdict::kIndefinite;
  } else {
    cert.verdict = Verdict::kSemidefiniteBoundary;
  }
  return cert;
}

FixedPoint fixed_point(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw DimensionError("fixed_point: shape mismatch");
  FixedPoint fp;
  fp.a_certificate = definiteness_certificate(a);

  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& sv = svd.singularValues();
  const double smallest = sv.size() ? sv.minCoeff() : 0.0;
  fp.condition_number = smallest > 0.0 ? sv.maxCoeff() / smallest
                                       : std::numeric_limits<double>::infinity();
  if (!(fp.condition_number <= kMaxConditionNumber)) {
    throw SingularSystemError("A is singular or ill-conditioned (condition " +
                              describe(fp.condition_number) + ")");
  }
  fp.theta = a.partialPivLu().solve(b);
  fp.residual = (a * fp.theta - b).lpNorm<Eigen::Infinity>();
  return fp;
}

double msve(const TaskSpec& task, const Vector& theta) {
  const Vector error = true_values(task) - task.features.phi * theta;
  return weighted_interest(task).dot(error.cwiseAbs2());
}

Vector bellman_lambda_apply(const TaskSpec& task, const Vector& v) {
  const TaskMatrices tm(task);
  const Index n = tm.n();
  const Vector lambda_rewards =
      solve_vec(identity(n) - tm.p_pi_gamma_lambda, tm.r_pi, "I - P_pi Gamma Lambda");
  return lambda_rewards + (identity(n) - tm.one_minus_p_lambda()) * v;
}

namespace {

/// Phi (Phi^T M Phi)^{-1} Phi^T M x.
Vector project(const Matrix& phi, const Vector& m, const Vector& x) {
  const Matrix gram = phi.transpose() * m.asDiagonal() * phi;
  return phi * solve_vec(gram, phi.transpose() * m.cwiseProduct(x), "Phi^T M Phi");
}

}  // namespace

ProjectedBellmanError pbe(const TaskSpec& task, const Vector& theta) {
  const Vector m = emphasis_vector(task);
  const Vector values = task.features.phi * theta;
  const Vector backup = bellman_lambda_apply(task, values);
  ProjectedBellmanError out;
  out.vec = project(task.features.phi, m, backup - values);
  out.weighted_norm = std::sqrt(m.dot(out.vec.cwiseAbs2()));
  return out;
}

Vector pbe_from_expected_update(const TaskSpec& task, const Vector& theta) {
  const Matrix& phi = task.features.phi;
  const Vector m = emphasis_vector(task);
  const ExpectedUpdate eu = expected_update(task, Method::kEmphatic);
  const Matrix gram = phi.transpose() * m.asDiagonal() * phi;
  return phi * solve_vec(gram, eu.b - eu.a * theta, "Phi^T M Phi");
}

AnalysisReport analyze(const TaskSpec& task, Method method) {
  const TaskMatrices tm(task);
  AnalysisReport rep;
  rep.method = method;
  rep.d_mu = tm.d_mu;
  try {
    rep.d_pi = stationary_distribution(tm.p_pi);
  } catch (const ReducibleChainError&) {
    rep.d_pi.reset();
  }
  rep.p_pi = tm.p_pi;
  rep.r_pi = tm.r_pi;
  rep.v_pi = true_values(task);
  rep.f = tm.followon(task);
  const Matrix one_minus_pl = tm.one_minus_p_lambda();
  rep.p_lambda = identity(tm.n()) - one_minus_pl;
  rep.m = tm.emphasis(task, one_minus_pl);

  const ExpectedUpdate eu = expected_update(task, method);
  rep.key = eu.key;
  rep.a_mat = eu.a;
  rep.b_vec = eu.b;
  const DefinitenessCertificate key_cert = definiteness_certificate(eu.key);
  rep.key_column_sums = key_cert.column_sums;
  rep.min_sym_eig = key_cert.min_sym_eig;
  rep.verdict = key_cert.verdict;

  const FixedPoint fp = fixed_point(eu.a, eu.b);
  rep.a_min_sym_eig = fp.a_certificate.min_sym_eig;
  rep.a_verdict = fp.a_certificate.verdict;
  rep.theta_bar = fp.theta;
  rep.condition_number = fp.condition_number;
  const Vector error = rep.v_pi - task.features.phi * fp.theta;
  rep.msve_at_fixed_point = tm.ivec.dot(error.cwiseAbs2());
  return rep;
}

}  // namespace etd
