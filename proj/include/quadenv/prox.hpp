#pragma once

#include <Eigen/Core>

#include "quadenv/lifting.hpp"

namespace quadenv {

/// Parameters of the prox decomposition. Requires rho > gamma strictly, so
/// that beta*gamma = (rho-gamma)/rho lies in (0,1) and the scaled first
/// transform stays below the quadratic.
struct ProxParams {
  double gamma;
  double rho;

  ProxParams(double gamma, double rho);

  double beta() const { return (rho - gamma) / (rho * gamma); }
  double beta_gamma() const { return (rho - gamma) / rho; }
};

/// Global minimizer of beta*S_gamma(f)(x) + 0.5*||x - y||^2. Scalar penalties
/// are solved by exact candidate evaluation over the quadratic pieces (ties
/// resolve toward the smaller magnitude); cap penalties by a weighted
/// isotonic solve on the sorted entries; matrix penalties by singular value
/// (or eigenvalue) lifting of the vector solve.
double prox_s1_scaled(const ScalarPenalty& pen, const ProxParams& p, double y);
Eigen::VectorXd prox_s1_scaled(const VectorPenalty& pen, const ProxParams& p, const Eigen::VectorXd& y);
Eigen::MatrixXd prox_s1_scaled(const MatrixPenalty& pen, const ProxParams& p, const Eigen::MatrixXd& y);

/// Minimizer of S_gamma^2(f)(x) + (rho/2)*||x - y||^2, evaluated as
/// (rho*y - gamma*z)/(rho - gamma) with z = prox_s1_scaled(y).
double prox_s2(const ScalarPenalty& pen, const ProxParams& p, double y);
Eigen::VectorXd prox_s2(const VectorPenalty& pen, const ProxParams& p, const Eigen::VectorXd& y);
Eigen::MatrixXd prox_s2(const MatrixPenalty& pen, const ProxParams& p, const Eigen::MatrixXd& y);

/// Minimizer of S_gamma^2(f)(x) + (a/2)||x - d||^2 + (rho_tilde/2)||x - y||^2,
/// folded into a single prox at the weighted average point with effective
/// rho = a + rho_tilde (which must exceed gamma).
double prox_s2_with_quadratic(const ScalarPenalty& pen, double gamma, double d, double a,
                              double rho_tilde, double y);
Eigen::VectorXd prox_s2_with_quadratic(const VectorPenalty& pen, double gamma,
                                       const Eigen::VectorXd& d, double a, double rho_tilde,
                                       const Eigen::VectorXd& y);
Eigen::MatrixXd prox_s2_with_quadratic(const MatrixPenalty& pen, double gamma,
                                       const Eigen::MatrixXd& d, double a, double rho_tilde,
                                       const Eigen::MatrixXd& y);

}  // namespace quadenv
