#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "etd/mdp.hpp"

namespace etd {

// Exact expected-update analysis. Every inverse is a checked LU solve; no
// explicit inverses are formed.

/// Expected-update families with a closed-form key matrix.
enum class Method {
  kOnPolicyTd0,   // key = D_pi (I - P_pi Gamma)
  kOffPolicyTd0,  // key = D_mu (I - P_pi Gamma)
  kEmphatic,      // key = M (I - P_pi^lambda)
};

std::string_view to_string(Method method);
/// Accepts "on-policy-td0", "off-policy-td0", "emphatic". Throws std::invalid_argument.
Method parse_method(std::string_view name);

enum class Verdict { kPositiveDefinite, kIndefinite, kSemidefiniteBoundary };

std::string_view to_string(Verdict verdict);

/// Threshold on the symmetric-part eigenvalue separating the three verdicts.
inline constexpr double kDefinitenessTolerance = 1e-10;

/// Unique d with p^T d = d, d > 0, sum(d) = 1. Throws ReducibleChainError if
/// the stationary vector is not unique or has a (near-)zero component.
Vector stationary_distribution(const Matrix& p);

/// Largest eigenvalue modulus.
double spectral_radius(const Matrix& m);

/// P_pi * diag(gamma).
Matrix discounted_target_transition(const TaskSpec& task);

/// v_pi = (I - P_pi Gamma)^{-1} r_pi.
Vector true_values(const TaskSpec& task);

/// d_mu(s) * i(s), the interest-weighted behavior distribution.
Vector weighted_interest(const TaskSpec& task);

/// f = (I - Gamma P_pi^T)^{-1} (d_mu o i).
Vector followon_vector(const TaskSpec& task);

/// P_pi^lambda = I - (I - P_pi Gamma Lambda)^{-1} (I - P_pi Gamma).
Matrix p_lambda(const TaskSpec& task);

/// m = (I - P_pi^lambda^T)^{-1} (d_mu o i); cross-checked against
/// Lambda (d_mu o i) + (I - Lambda) f before returning.
Vector emphasis_vector(const TaskSpec& task);

struct ExpectedUpdate {
  Matrix key;  // N x N
  Matrix a;    // n x n, Phi^T key Phi
  Vector b;    // n
};

/// Key matrix, A and b of the requested method. kOnPolicyTd0 needs an
/// irreducible target chain (throws ReducibleChainError otherwise); the TD(0)
/// methods ignore lambda.
ExpectedUpdate expected_update(const TaskSpec& task, Method method);

/// Emphatic A built without forming the key matrix:
/// Phi^T M [(I - P_pi Gamma Lambda)^{-1} ((I - P_pi Gamma) Phi)].
Matrix emphatic_a_direct(const TaskSpec& task);

struct DefinitenessCertificate {
  double min_sym_eig = 0.0;  // min eigenvalue of (mat + mat^T) / 2
  Vector column_sums;
  Verdict verdict = Verdict::kSemidefiniteBoundary;

  bool positive_definite() const { return verdict == Verdict::kPositiveDefinite; }
};

DefinitenessCertificate definiteness_certificate(const Matrix& mat);

/// Condition estimate above which fixed_point refuses to solve.
inline constexpr double kMaxConditionNumber = 1e12;

struct FixedPoint {
  Vector theta;
  double condition_number = 0.0;
  double residual = 0.0;  // ||A theta - b||_inf
  DefinitenessCertificate a_certificate;

  /// The deterministic iteration converges to theta only if A is positive definite.
  bool stable() const { return a_certificate.positive_definite(); }
};

/// Solves A theta = b. Throws SingularSystemError when cond(A) > 1e12.
FixedPoint fixed_point(const Matrix& a, const Vector& b);

/// sum_s d_mu(s) i(s) (v_pi(s) - theta^T phi(s))^2.
double msve(const TaskSpec& task, const Vector& theta);

/// T^lambda v = (I - P_pi Gamma Lambda)^{-1} r_pi + P_pi^lambda v.
Vector bellman_lambda_apply(const TaskSpec& task, const Vector& v);

struct ProjectedBellmanError {
  Vector vec;                  // N-vector
  double weighted_norm = 0.0;  // sqrt(sum_s m(s) vec(s)^2)
};

/// Pi (T^lambda(Phi theta) - Phi theta) with Pi = Phi (Phi^T M Phi)^{-1} Phi^T M.
ProjectedBellmanError pbe(const TaskSpec& task, const Vector& theta);

/// Phi (Phi^T M Phi)^{-1} (b - A theta) with the emphatic A and b.
Vector pbe_from_expected_update(const TaskSpec& task, const Vector& theta);

struct AnalysisReport {
  Method method = Method::kEmphatic;
  Vector d_mu;
  std::optional<Vector> d_pi;
  Matrix p_pi;
  Vector r_pi;
  Vector v_pi;
  Vector f;
  Vector m;
  Matrix p_lambda;
  Matrix key;
  Vector key_column_sums;
  Matrix a_mat;
  Vector b_vec;
  double min_sym_eig = 0.0;
  Verdict verdict = Verdict::kSemidefiniteBoundary;
  double a_min_sym_eig = 0.0;
  Verdict a_verdict = Verdict::kSemidefiniteBoundary;
  Vector theta_bar;
  double condition_number = 0.0;
  double msve_at_fixed_point = 0.0;
};

/// Every expected-update object for one method. Propagates NumericalError.
AnalysisReport analyze(const TaskSpec& task, Method method);

}  // namespace etd
