#pragma once

#include <Eigen/Core>

#include "quadenv/lifting.hpp"

namespace quadenv {

/// Direct-tensor matrix weight w_{i,j} = v_i * u_j (v over rows, u over
/// columns). All entries must be strictly positive and finite.
struct DirectTensorWeight {
  Eigen::VectorXd u;  // length = cols
  Eigen::VectorXd v;  // length = rows

  DirectTensorWeight(Eigen::VectorXd u, Eigen::VectorXd v);
};

/// Diagonal conjugation sqrt(v_i) * x_{i,j} * sqrt(u_j); an isometry from the
/// weighted space onto the flat Frobenius space.
Eigen::MatrixXd conjugate_to_flat(const DirectTensorWeight& w, const Eigen::MatrixXd& X);

/// Quadratic envelope of mu*rank in the weighted space, evaluated through the
/// flat conjugation.
double s2_weighted_rank(const DirectTensorWeight& w, double gamma, double mu, const Eigen::MatrixXd& X);

/// Same for the rank cap indicator.
double s2_weighted_rankcap(const DirectTensorWeight& w, double gamma, int cap, const Eigen::MatrixXd& X);

/// Hankel matrix H[i][j] = f[i+j] (0-based) from a signal of odd length 2n-1.
Eigen::MatrixXd hankel_embed(const Eigen::VectorXd& f);

/// Adjoint of hankel_embed: antidiagonal sums, signal of length 2n-1.
Eigen::VectorXd hankel_adjoint(const Eigen::MatrixXd& X);

/// Orthogonal projection onto the Hankel subspace: each antidiagonal is
/// replaced by its arithmetic mean.
Eigen::MatrixXd hankel_project(const Eigen::MatrixXd& X);

/// Signal weights (n - |j - n|), j = 1..2n-1, induced by the Frobenius
/// distance of Hankel embeddings.
Eigen::VectorXd triangle_weights(int n);

/// u_i = 1/sqrt(k - |i - k|) for odd n = 2k-1.
Eigen::VectorXd flatten_u(int n);

/// Signal weights omega_j = sum_{i+l=j+1} u_i u_l induced by the direct-tensor
/// weight u_i u_l on the Hankel embedding; much flatter than the triangle.
Eigen::VectorXd flatten_omega(int n);

/// Orthogonal projection (flat Frobenius metric) onto the image of the Hankel
/// subspace under the weight conjugation, i.e. onto
/// {conjugate_to_flat(w, H) : H Hankel}. Used to run weighted Hankel problems
/// in the flat space.
Eigen::MatrixXd conjugated_hankel_project(const DirectTensorWeight& w, const Eigen::MatrixXd& Y);

/// Convenience bundle for the square Hankel setting of side n (odd n for the
/// flattening weights).
struct HankelContext {
  int n;
  Eigen::VectorXd triangle;
  Eigen::VectorXd u;
  Eigen::VectorXd omega;

  explicit HankelContext(int n);
};

}  // namespace quadenv
