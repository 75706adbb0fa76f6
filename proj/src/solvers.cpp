#include "quadenv/solvers.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "quadenv/prox.hpp"
#include "quadenv/weighted.hpp"

namespace quadenv {

namespace {

/// Rayleigh-quotient power iteration for the top eigenvalue of a symmetric
/// PSD matrix. Runs in rounds of 200 until the eigenpair residual certifies
/// the estimate (or a hard cap).
std::pair<double, double> top_eigenvalue(const Eigen::MatrixXd& B) {
  const Eigen::Index n = B.rows();
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = uni(rng);
  v.normalize();
  const double scale = B.cwiseAbs().maxCoeff();
  if (scale == 0.0) return {0.0, 0.0};
  double lambda = 0.0;
  double residual = kInf;
  const int round = 200;
  const int hard_cap = 100000;
  double prev = kInf;
  for (int it = 0; it < hard_cap; ++it) {
    Eigen::VectorXd w = B * v;
    const double nw = w.norm();
    if (nw == 0.0) return {0.0, 0.0};
    v = w / nw;
    if ((it + 1) % round == 0 || it + 1 == hard_cap) {
      w = B * v;
      lambda = v.dot(w);
      residual = (w - lambda * v).norm();
      const bool certified = residual <= 1e-10 * std::max(1.0, lambda);
      const bool stalled = std::abs(lambda - prev) <= 1e-12 * std::max(1.0, std::abs(lambda));
      if (certified || (stalled && residual <= 1e-8 * std::max(1.0, lambda))) break;
      prev = lambda;
    }
  }
  return {lambda, residual};
}

double misfit(const Eigen::MatrixXd& A, const Eigen::VectorXd& d, const Eigen::VectorXd& x) {
  return 0.5 * (A * x - d).squaredNorm();
}

bool is_indicator(VectorKind k) { return k != VectorKind::L0; }

Eigen::MatrixXd svd_truncate(const Eigen::MatrixXd& X, int cap) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  for (Eigen::Index j = cap; j < sv.size(); ++j) sv[j] = 0.0;
  return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

Eigen::MatrixXd apply_prior(const MatrixPriorProblem& prob, const Eigen::MatrixXd& X) {
  switch (prob.prior) {
    case Prior::None:
      return X;
    case Prior::Hankel:
      return prob.hankel_weight ? conjugated_hankel_project(*prob.hankel_weight, X)
                                : hankel_project(X);
  }
  throw std::logic_error("unreachable");
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::ConvexMinorant:
      return "convex-minorant";
    case Regime::MinimizerPreserving:
      return "minimizer-preserving";
    case Regime::Auto:
      return "auto";
  }
  return "?";
}

OperatorNorms operator_norms(const Eigen::MatrixXd& A) {
  if (!A.allFinite()) throw std::domain_error("operator_norms: non-finite operator");
  OperatorNorms out;
  const Eigen::MatrixXd G = A.transpose() * A;
  auto [upper, res_u] = top_eigenvalue(G);
  out.upper = upper;
  out.upper_residual = res_u;
  if (upper == 0.0) return out;
  const Eigen::MatrixXd shifted =
      Eigen::MatrixXd(upper * Eigen::MatrixXd::Identity(G.rows(), G.cols()) - G);
  auto [top_shifted, res_l] = top_eigenvalue(shifted);
  out.lower = std::max(upper - top_shifted, 0.0);
  out.lower_residual = res_l;
  return out;
}

Certificate certify(const VectorPenalty& pen, double gamma, const Eigen::VectorXd& x) {
  Certificate cert;
  if (!x.allFinite()) throw std::domain_error("certify: non-finite point");
  if (!is_indicator(pen.kind)) {
    const double f = vector_penalty_value(pen, x);
    const double s2 = s2_vector(pen, gamma, x);
    cert.gap = std::max(f - s2, 0.0);
    cert.certified = (f - s2) <= 1e-6 * (1.0 + f);
    return cert;
  }
  const double tau = 1e-8 * (x.lpNorm<Eigen::Infinity>() + 1.0);
  const double f_tau = vector_penalty_value(pen, x, tau);
  cert.feasible = f_tau < kInf;
  double envelope;
  if (pen.kind == VectorKind::PosCardCap) {
    envelope = -s1_vector(pen, gamma, x);  // (gamma/2) * dist^2 to the feasible set
  } else {
    envelope = s2_vector(pen, gamma, x);
  }
  cert.gap = envelope;
  cert.certified = cert.feasible && envelope <= 1e-6;
  return cert;
}

Certificate certify(const MatrixPenalty& pen, double gamma, const Eigen::MatrixXd& X) {
  Certificate cert;
  if (!X.allFinite()) throw std::domain_error("certify: non-finite point");
  const double tau = 1e-8 * (X.cwiseAbs().maxCoeff() + 1.0);
  const double f_tau = matrix_penalty_value(pen, X, tau);
  switch (pen.kind) {
    case MatrixKind::ScaledRank:
    case MatrixKind::PosRank: {
      cert.feasible = f_tau < kInf;  // PosRank: positive semidefinite within tau
      if (!cert.feasible) {
        cert.gap = kInf;
        return cert;
      }
      const double s2 = s2_matrix(pen, gamma, X);
      cert.gap = std::max(f_tau - s2, 0.0);
      cert.certified = (f_tau - s2) <= 1e-6 * (1.0 + f_tau);
      return cert;
    }
    case MatrixKind::RankCap: {
      cert.feasible = f_tau < kInf;
      const double s2 = s2_matrix(pen, gamma, X);
      cert.gap = s2;
      cert.certified = cert.feasible && s2 <= 1e-6;
      return cert;
    }
  }
  throw std::logic_error("unreachable");
}

double objective_original(const LeastSquaresProblem& prob, const Eigen::VectorXd& x) {
  return vector_penalty_value(prob.penalty, x) + misfit(prob.A, prob.d, x);
}

double objective_surrogate(const LeastSquaresProblem& prob, double gamma, const Eigen::VectorXd& x) {
  return s2_vector(prob.penalty, gamma, x) + misfit(prob.A, prob.d, x);
}

SolverReport solve_fbs(const LeastSquaresProblem& prob, const SolverConfig& cfg) {
  if (prob.A.cols() != prob.penalty.dim || prob.A.rows() != prob.d.size()) {
    throw std::invalid_argument("solve_fbs: dimension mismatch");
  }
  if (!prob.A.allFinite() || !prob.d.allFinite()) throw std::domain_error("solve_fbs: non-finite data");
  if (cfg.max_iters < 1 || !(cfg.tol > 0.0)) throw std::invalid_argument("solve_fbs: bad config");

  SolverReport rep;
  rep.seed = cfg.seed;
  const OperatorNorms norms = operator_norms(prob.A);
  rep.norm_upper = norms.upper;
  rep.norm_lower = norms.lower;
  rep.degenerate_operator = norms.upper == 0.0;

  const double slack = 1.0 + 1e-12;
  double gamma = 0.0;
  Regime regime = cfg.regime;
  if (regime == Regime::Auto) {
    if (!prob.gamma) {
      gamma = rep.degenerate_operator ? 1.0 : 1.001 * norms.upper;
      regime = Regime::MinimizerPreserving;
    } else {
      gamma = *prob.gamma;
      if (gamma <= norms.lower * slack && norms.lower > 0.0) {
        regime = Regime::ConvexMinorant;
      } else if (gamma * slack >= norms.upper) {
        regime = Regime::MinimizerPreserving;
      } else {
        throw RegimeViolation("gamma lies strictly between sigma_min(A*A) and ||A||^2");
      }
    }
  } else if (regime == Regime::ConvexMinorant) {
    gamma = prob.gamma ? *prob.gamma : 0.999 * norms.lower;
    if (!(gamma > 0.0) || gamma > norms.lower * slack) {
      throw RegimeViolation("convex-minorant regime requires 0 < gamma <= sigma_min(A*A)");
    }
  } else {
    gamma = prob.gamma ? *prob.gamma : (rep.degenerate_operator ? 1.0 : 1.001 * norms.upper);
    if (!(gamma * slack >= norms.upper) || !(gamma > 0.0)) {
      throw RegimeViolation("minimizer-preserving regime requires gamma >= ||A||^2");
    }
  }
  rep.regime = regime;
  rep.gamma = gamma;

  const double rho = cfg.rho ? *cfg.rho : 1.001 * std::max(norms.upper, gamma);
  if (!(rho > gamma)) throw std::invalid_argument("solve_fbs: rho must exceed gamma");
  rep.rho = rho;
  const ProxParams prox_params(gamma, rho);

  Eigen::VectorXd x;
  if (cfg.x0) {
    if (cfg.x0->size() != prob.penalty.dim) throw std::invalid_argument("solve_fbs: bad x0");
    x = *cfg.x0;
  } else if (regime == Regime::MinimizerPreserving && !rep.degenerate_operator) {
    x = prob.A.transpose() * prob.d / norms.upper;
  } else {
    x = Eigen::VectorXd::Zero(prob.penalty.dim);
  }
  if (cfg.random_init) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const double span = 1.0 + x.norm();
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += span * uni(rng);
  }

  rep.trace.push_back({0, objective_surrogate(prob, gamma, x), 0.0});
  rep.converged = false;
  int it = 0;
  while (it < cfg.max_iters) {
    ++it;
    const Eigen::VectorXd grad = prob.A.transpose() * (prob.A * x - prob.d);
    const Eigen::VectorXd xn = prox_s2(prob.penalty, prox_params, x - grad / rho);
    const double step = (xn - x).norm();
    const double ref = 1.0 + x.norm();
    x = xn;
    rep.trace.push_back({it, objective_surrogate(prob, gamma, x), step});
    if (step <= cfg.tol * ref) {
      rep.converged = true;
      break;
    }
  }
  rep.iterations = it;
  rep.x = x;
  rep.objective_surrogate = objective_surrogate(prob, gamma, x);
  rep.objective_original = objective_original(prob, x);
  rep.certificate = certify(prob.penalty, gamma, x);
  return rep;
}

MatrixSolverReport solve_admm(const MatrixPriorProblem& prob, const SolverConfig& cfg) {
  if (prob.D.rows() != prob.penalty.rows || prob.D.cols() != prob.penalty.cols) {
    throw std::invalid_argument("solve_admm: shape mismatch");
  }
  if (!prob.D.allFinite()) throw std::domain_error("solve_admm: non-finite data");
  if (prob.prior == Prior::Hankel && prob.D.rows() != prob.D.cols()) {
    throw std::invalid_argument("solve_admm: Hankel prior needs square matrices");
  }
  const double r = cfg.admm_penalty;
  if (!(1.0 + r > prob.gamma)) {
    throw std::invalid_argument("solve_admm: need 1 + penalty parameter > gamma");
  }

  MatrixSolverReport rep;
  Eigen::MatrixXd Z = apply_prior(prob, prob.D);
  Eigen::MatrixXd X = Z;
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(prob.D.rows(), prob.D.cols());
  int it = 0;
  while (it < cfg.max_iters) {
    ++it;
    X = prox_s2_with_quadratic(prob.penalty, prob.gamma, prob.D, 1.0, r, Z - U);
    const Eigen::MatrixXd Zprev = Z;
    Z = apply_prior(prob, X + U);
    U += X - Z;
    const double primal = (X - Z).norm();
    const double dual = r * (Z - Zprev).norm();
    rep.trace.push_back({it, s2_matrix(prob.penalty, prob.gamma, Z) + 0.5 * (Z - prob.D).squaredNorm(),
                         std::max(primal, dual)});
    if (primal <= cfg.tol && dual <= cfg.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.iterations = it;
  rep.x = Z;
  rep.prox_point = X;
  rep.prior_residual = (X - Z).norm();
  rep.objective_surrogate = s2_matrix(prob.penalty, prob.gamma, Z) + 0.5 * (Z - prob.D).squaredNorm();
  const double tau = 1e-8 * (Z.cwiseAbs().maxCoeff() + 1.0);
  rep.objective_original = matrix_penalty_value(prob.penalty, Z, tau) + 0.5 * (Z - prob.D).squaredNorm();
  rep.certificate = certify(prob.penalty, prob.gamma, Z);
  return rep;
}

MatrixSolverReport solve_cadzow(const MatrixPriorProblem& prob, const SolverConfig& cfg) {
  if (prob.penalty.kind != MatrixKind::RankCap || prob.prior != Prior::Hankel) {
    throw std::invalid_argument("solve_cadzow: needs a RankCap penalty and the Hankel prior");
  }
  if (prob.D.rows() != prob.D.cols()) throw std::invalid_argument("solve_cadzow: square input required");
  if (!prob.D.allFinite()) throw std::domain_error("solve_cadzow: non-finite data");

  MatrixSolverReport rep;
  Eigen::MatrixXd X = apply_prior(prob, prob.D);
  int it = 0;
  while (it < cfg.max_iters) {
    ++it;
    const Eigen::MatrixXd Xn = apply_prior(prob, svd_truncate(X, prob.penalty.cap));
    const double step = (Xn - X).norm();
    const double ref = 1.0 + X.norm();
    X = Xn;
    rep.trace.push_back({it, 0.5 * (X - prob.D).squaredNorm(), step});
    if (step <= cfg.tol * ref) {
      rep.converged = true;
      break;
    }
  }
  rep.iterations = it;
  rep.x = X;
  rep.prox_point = X;
  rep.prior_residual = 0.0;
  rep.objective_surrogate = s2_matrix(prob.penalty, prob.gamma, X) + 0.5 * (X - prob.D).squaredNorm();
  const double tau = 1e-8 * (X.cwiseAbs().maxCoeff() + 1.0);
  rep.objective_original = matrix_penalty_value(prob.penalty, X, tau) + 0.5 * (X - prob.D).squaredNorm();
  rep.certificate = certify(prob.penalty, prob.gamma, X);
  return rep;
}

}  // namespace quadenv
