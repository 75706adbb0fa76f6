#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "quadenv/lifting.hpp"
#include "quadenv/weighted.hpp"

namespace quadenv {

/// Requested regime is inconsistent with gamma and the operator norms.
struct RegimeViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OperatorNorms {
  double upper = 0.0;  // ||A||^2 = lambda_max(A^T A)
  double lower = 0.0;  // sigma_min(A^T A) = lambda_min(A^T A)
  double upper_residual = 0.0;
  double lower_residual = 0.0;
};

/// Power iteration on A^T A for the largest eigenvalue and on
/// (upper*I - A^T A) for the smallest, extended until the eigenpair residual
/// certifies the estimate. A zero operator returns (0, 0).
OperatorNorms operator_norms(const Eigen::MatrixXd& A);

enum class Regime { ConvexMinorant, MinimizerPreserving, Auto };

const char* regime_name(Regime r);

struct SolverConfig {
  int max_iters = 100000;
  double tol = 1e-9;
  Regime regime = Regime::Auto;
  std::uint64_t seed = 0;
  std::optional<double> rho;          // step parameter override
  std::optional<Eigen::VectorXd> x0;  // initialization override
  bool random_init = false;           // seeded perturbation of the default start
  double admm_penalty = 1.0;
};

struct IterateRecord {
  int iter;
  double objective;
  double step_norm;
};

struct LeastSquaresProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd d;
  VectorPenalty penalty;
  std::optional<double> gamma;  // unset: Auto picks 1.001 * ||A||^2
};

struct Certificate {
  bool certified = false;
  double gap = 0.0;      // f - S^2 for finite penalties, S^2 (or -S1) for indicators
  bool feasible = true;  // indicator penalties only
};

/// Touching check f(x) = S_gamma^2(f)(x). Finite-valued penalties compare the
/// gap against 1e-6*(1+f); indicator penalties count support/rank with entry
/// threshold 1e-8*(max|x|+1) and require the envelope value to vanish.
Certificate certify(const VectorPenalty& pen, double gamma, const Eigen::VectorXd& x);
Certificate certify(const MatrixPenalty& pen, double gamma, const Eigen::MatrixXd& X);

double objective_original(const LeastSquaresProblem& prob, const Eigen::VectorXd& x);
double objective_surrogate(const LeastSquaresProblem& prob, double gamma, const Eigen::VectorXd& x);

struct SolverReport {
  Eigen::VectorXd x;
  double objective_surrogate = 0.0;
  double objective_original = 0.0;
  Certificate certificate;
  bool converged = false;
  int iterations = 0;
  Regime regime = Regime::Auto;
  double gamma = 0.0;
  double rho = 0.0;
  double norm_upper = 0.0;
  double norm_lower = 0.0;
  std::uint64_t seed = 0;
  bool degenerate_operator = false;
  std::vector<IterateRecord> trace;
};

/// Forward-backward splitting on S_gamma^2(f)(x) + 0.5*||Ax-d||^2 with
/// rho = 1.001*max(||A||^2, gamma). ConvexMinorant requires
/// gamma <= sigma_min(A^T A), MinimizerPreserving gamma >= ||A||^2; Auto
/// resolves from gamma (or picks MinimizerPreserving with gamma just above
/// ||A||^2 when gamma is unset).
SolverReport solve_fbs(const LeastSquaresProblem& prob, const SolverConfig& cfg);

enum class Prior { None, Hankel };

/// Part II problem: S_gamma^2(f)(X) + 0.5*||X - D||_F^2 over a convex prior.
/// For weighted Hankel problems, D and the iterates live in the flat
/// conjugated space and the prior projects onto the conjugated Hankel
/// subspace.
struct MatrixPriorProblem {
  Eigen::MatrixXd D;
  MatrixPenalty penalty;
  double gamma = 1.0;
  Prior prior = Prior::None;
  std::optional<DirectTensorWeight> hankel_weight;
};

struct MatrixSolverReport {
  Eigen::MatrixXd x;           // feasible iterate (the answer)
  Eigen::MatrixXd prox_point;  // prox-side iterate
  double objective_surrogate = 0.0;
  double objective_original = 0.0;
  Certificate certificate;
  double prior_residual = 0.0;  // ||prox_point - x||_F
  bool converged = false;
  int iterations = 0;
  std::vector<IterateRecord> trace;
};

/// ADMM splitting x = z: prox of the envelope plus data term against the
/// prior projection.
MatrixSolverReport solve_admm(const MatrixPriorProblem& prob, const SolverConfig& cfg);

/// Alternating projections between the rank-M set and the Hankel subspace
/// from X0 = D. Requires a RankCap penalty and the Hankel prior.
MatrixSolverReport solve_cadzow(const MatrixPriorProblem& prob, const SolverConfig& cfg);

}  // namespace quadenv
