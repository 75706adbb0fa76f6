#include "quadenv/weighted.hpp"

#include <cmath>
#include <stdexcept>

namespace quadenv {

namespace {

void require_positive(const Eigen::VectorXd& w, const char* name) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0) || !is_finite_value(w[i])) {
      throw std::invalid_argument(std::string(name) + ": entries must be strictly positive and finite");
    }
  }
}

}  // namespace

DirectTensorWeight::DirectTensorWeight(Eigen::VectorXd u_, Eigen::VectorXd v_)
    : u(std::move(u_)), v(std::move(v_)) {
  if (u.size() < 1 || v.size() < 1) throw std::invalid_argument("DirectTensorWeight: empty weight");
  require_positive(u, "u");
  require_positive(v, "v");
}

Eigen::MatrixXd conjugate_to_flat(const DirectTensorWeight& w, const Eigen::MatrixXd& X) {
  if (X.rows() != w.v.size() || X.cols() != w.u.size()) {
    throw std::invalid_argument("conjugate_to_flat: shape mismatch");
  }
  return w.v.cwiseSqrt().asDiagonal() * X * w.u.cwiseSqrt().asDiagonal();
}

double s2_weighted_rank(const DirectTensorWeight& w, double gamma, double mu, const Eigen::MatrixXd& X) {
  const MatrixPenalty pen = MatrixPenalty::scaled_rank(mu, static_cast<int>(X.rows()), static_cast<int>(X.cols()));
  return s2_matrix(pen, gamma, conjugate_to_flat(w, X));
}

double s2_weighted_rankcap(const DirectTensorWeight& w, double gamma, int cap, const Eigen::MatrixXd& X) {
  const MatrixPenalty pen = MatrixPenalty::rank_cap(cap, static_cast<int>(X.rows()), static_cast<int>(X.cols()));
  return s2_matrix(pen, gamma, conjugate_to_flat(w, X));
}

Eigen::MatrixXd hankel_embed(const Eigen::VectorXd& f) {
  const Eigen::Index len = f.size();
  if (len < 1 || len % 2 == 0) throw std::invalid_argument("hankel_embed: signal length must be odd");
  const Eigen::Index n = (len + 1) / 2;
  Eigen::MatrixXd H(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) H(i, j) = f[i + j];
  }
  return H;
}

Eigen::VectorXd hankel_adjoint(const Eigen::MatrixXd& X) {
  if (X.rows() != X.cols()) throw std::invalid_argument("hankel_adjoint: square input required");
  const Eigen::Index n = X.rows();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) f[i + j] += X(i, j);
  }
  return f;
}

Eigen::MatrixXd hankel_project(const Eigen::MatrixXd& X) {
  if (X.rows() != X.cols()) throw std::invalid_argument("hankel_project: square input required");
  const Eigen::Index n = X.rows();
  const Eigen::VectorXd sums = hankel_adjoint(X);
  Eigen::MatrixXd P(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Eigen::Index s = i + j;
      const Eigen::Index count = n - std::abs(s - (n - 1));
      P(i, j) = sums[s] / static_cast<double>(count);
    }
  }
  return P;
}

Eigen::VectorXd triangle_weights(int n) {
  if (n < 1) throw std::invalid_argument("triangle_weights: n must be positive");
  Eigen::VectorXd t(2 * n - 1);
  for (int j = 1; j <= 2 * n - 1; ++j) t[j - 1] = n - std::abs(j - n);
  return t;
}

Eigen::VectorXd flatten_u(int n) {
  if (n < 1 || n % 2 == 0) throw std::invalid_argument("flatten_u: n must be odd");
  const int k = (n + 1) / 2;
  Eigen::VectorXd u(n);
  for (int i = 1; i <= n; ++i) u[i - 1] = 1.0 / std::sqrt(static_cast<double>(k - std::abs(i - k)));
  return u;
}

Eigen::VectorXd flatten_omega(int n) {
  const Eigen::VectorXd u = flatten_u(n);
  Eigen::VectorXd omega = Eigen::VectorXd::Zero(2 * n - 1);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < n; ++l) omega[i + l] += u[i] * u[l];
  }
  return omega;
}

Eigen::MatrixXd conjugated_hankel_project(const DirectTensorWeight& w, const Eigen::MatrixXd& Y) {
  if (Y.rows() != Y.cols()) throw std::invalid_argument("conjugated_hankel_project: square input required");
  if (Y.rows() != w.v.size() || Y.cols() != w.u.size()) {
    throw std::invalid_argument("conjugated_hankel_project: shape mismatch");
  }
  const Eigen::Index n = Y.rows();
  // Basis matrices per antidiagonal have entries sqrt(v_i u_l); project by
  // per-antidiagonal least squares.
  Eigen::VectorXd num = Eigen::VectorXd::Zero(2 * n - 1);
  Eigen::VectorXd den = Eigen::VectorXd::Zero(2 * n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < n; ++l) {
      const double b = std::sqrt(w.v[i] * w.u[l]);
      num[i + l] += Y(i, l) * b;
      den[i + l] += w.v[i] * w.u[l];
    }
  }
  Eigen::MatrixXd P(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < n; ++l) {
      P(i, l) = std::sqrt(w.v[i] * w.u[l]) * num[i + l] / den[i + l];
    }
  }
  return P;
}

HankelContext::HankelContext(int n_) : n(n_), triangle(triangle_weights(n_)) {
  if (n % 2 == 1) {
    u = flatten_u(n);
    omega = flatten_omega(n);
  }
}

}  // namespace quadenv
