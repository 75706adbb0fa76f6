#pragma once

#include <Eigen/Core>
#include <vector>

#include "quadenv/penalty.hpp"

namespace quadenv {

enum class VectorKind {
  L0,          // mu * ||x||_0
  CardCap,     // indicator of {||x||_0 <= M}
  PosCardCap,  // indicator of {||x||_0 <= M, x >= 0}
};

struct VectorPenalty {
  VectorKind kind;
  int dim;
  double mu = 0.0;  // L0 only
  int cap = 0;      // CardCap / PosCardCap only

  static VectorPenalty l0(double mu, int dim);
  static VectorPenalty card_cap(int cap, int dim);
  static VectorPenalty pos_card_cap(int cap, int dim);
};

enum class MatrixKind {
  ScaledRank,  // mu * rank(X)
  RankCap,     // indicator of {rank(X) <= M}
  PosRank,     // mu * rank(X) + indicator of positive semidefinite (Hermitian input)
};

struct MatrixPenalty {
  MatrixKind kind;
  int rows;
  int cols;
  double mu = 0.0;
  int cap = 0;

  static MatrixPenalty scaled_rank(double mu, int rows, int cols);
  static MatrixPenalty rank_cap(int cap, int rows, int cols);
  static MatrixPenalty pos_rank(double mu, int n);
};

/// Nonincreasing magnitudes of a vector together with the data needed to
/// reconstruct the input: values[i] = |x[permutation[i]]| and
/// x[permutation[i]] = signs[i] * values[i]. Ties sort by original index.
struct SortedMagnitudes {
  Eigen::VectorXd values;
  std::vector<int> permutation;
  Eigen::VectorXd signs;
};

SortedMagnitudes sort_magnitudes(const Eigen::VectorXd& x);

double s1_vector(const VectorPenalty& pen, double gamma, const Eigen::VectorXd& y);

/// PosCardCap has no implemented closed form (its prox goes through the S1
/// route) and throws.
double s2_vector(const VectorPenalty& pen, double gamma, const Eigen::VectorXd& x);

/// Penalty value f(x). Support is counted with exact zero comparison by
/// default; pass a positive tol to count with |x_j| > tol instead.
double vector_penalty_value(const VectorPenalty& pen, const Eigen::VectorXd& x, double tol = 0.0);

double s1_matrix(const MatrixPenalty& pen, double gamma, const Eigen::MatrixXd& Y);
double s2_matrix(const MatrixPenalty& pen, double gamma, const Eigen::MatrixXd& X);
double matrix_penalty_value(const MatrixPenalty& pen, const Eigen::MatrixXd& X, double tol);

/// Envelope of the cardinality cap on already sorted nonincreasing nonnegative
/// magnitudes. Selects the averaged-tail index k* in 1..cap and returns
/// (gamma/2k*)(sum tail)^2 - (gamma/2) sum tail^2 over the last d-(cap-k*)
/// entries. Throws if no k satisfies the optimality window.
double card_cap_envelope_sorted(const Eigen::VectorXd& sorted_values, int cap, double gamma);

/// Singular values in nonincreasing order, min(m,n) of them.
Eigen::VectorXd singular_values(const Eigen::MatrixXd& X);

/// Eigenvalues of a symmetric matrix, nonincreasing. Throws if the input is
/// not symmetric to within 1e-10 * ||X||_F.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& X);

}  // namespace quadenv
