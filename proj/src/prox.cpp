#include "quadenv/prox.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace quadenv {

ProxParams::ProxParams(double gamma_, double rho_) : gamma(gamma_), rho(rho_) {
  if (!(gamma > 0.0) || !is_finite_value(gamma)) {
    throw std::invalid_argument("ProxParams: gamma must be positive and finite");
  }
  if (!(rho > gamma) || !is_finite_value(rho)) {
    throw std::invalid_argument("ProxParams: rho must exceed gamma");
  }
  if (!(beta_gamma() > 0.0 && beta_gamma() < 1.0)) {
    throw std::invalid_argument("ProxParams: beta*gamma out of (0,1)");
  }
}

namespace {

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

/// Pick the objective-minimal candidate, preferring the smaller magnitude.
double best_candidate(std::vector<double>& cands, const std::function<double(double)>& objective) {
  std::sort(cands.begin(), cands.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });
  double best = cands.front();
  double best_val = objective(best);
  for (std::size_t i = 1; i < cands.size(); ++i) {
    const double val = objective(cands[i]);
    if (val < best_val) {
      best = cands[i];
      best_val = val;
    }
  }
  return best;
}

double prox_scaled_card(double mu, const ProxParams& p, double y) {
  const double bg = p.beta_gamma();
  const double beta = p.beta();
  const double t = std::sqrt(2.0 * mu / p.gamma);
  const auto objective = [&](double x) {
    return -beta * std::min(0.5 * p.gamma * x * x, mu) + 0.5 * (x - y) * (x - y);
  };
  std::vector<double> cands = {clamp(y / (1.0 - bg), -t, t), y, t, -t};
  return best_candidate(cands, objective);
}

double prox_pos_card(double mu, const ProxParams& p, double y) {
  const double bg = p.beta_gamma();
  const double beta = p.beta();
  const double t = std::sqrt(2.0 * mu / p.gamma);
  // s1(x) = -gamma*x^2/2 on (-inf, t], -mu on [t, inf).
  const auto objective = [&](double x) {
    const double s1 = x <= t ? -0.5 * p.gamma * x * x : -mu;
    return beta * s1 + 0.5 * (x - y) * (x - y);
  };
  std::vector<double> cands = {std::min(y / (1.0 - bg), t), std::max(y, t), t};
  return best_candidate(cands, objective);
}

/// One node of the isotonic solve: two-branch quadratic
/// a_pos/2 x^2 - b x for x >= 0 and a_neg/2 x^2 - b x for x < 0.
struct IsoBlock {
  double a_pos;
  double a_neg;
  double b;
  int len;
  double value;
};

double block_minimizer(double a_pos, double a_neg, double b) {
  if (b > 0.0) return b / a_pos;
  if (b < 0.0) return b / a_neg;
  return 0.0;
}

/// Pool-adjacent-violators for a nonincreasing fit of separable convex
/// two-branch quadratics. Exact: merged blocks share the minimizer of their
/// summed node objectives.
std::vector<double> isotonic_nonincreasing(const std::vector<double>& a_pos,
                                           const std::vector<double>& a_neg,
                                           const std::vector<double>& b) {
  const std::size_t d = b.size();
  std::vector<IsoBlock> stack;
  stack.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    IsoBlock blk{a_pos[j], a_neg[j], b[j], 1, 0.0};
    blk.value = block_minimizer(blk.a_pos, blk.a_neg, blk.b);
    while (!stack.empty() && stack.back().value < blk.value) {
      const IsoBlock& prev = stack.back();
      blk.a_pos += prev.a_pos;
      blk.a_neg += prev.a_neg;
      blk.b += prev.b;
      blk.len += prev.len;
      blk.value = block_minimizer(blk.a_pos, blk.a_neg, blk.b);
      stack.pop_back();
    }
    stack.push_back(blk);
  }
  std::vector<double> out(d);
  std::size_t pos = 0;
  for (const IsoBlock& blk : stack) {
    for (int k = 0; k < blk.len; ++k) out[pos++] = blk.value;
  }
  return out;
}

Eigen::VectorXd prox_card_cap(int cap, const ProxParams& p, const Eigen::VectorXd& y) {
  const double bg = p.beta_gamma();
  const SortedMagnitudes m = sort_magnitudes(y);
  const std::size_t d = static_cast<std::size_t>(y.size());
  std::vector<double> a_pos(d), a_neg(d), b(d);
  for (std::size_t j = 0; j < d; ++j) {
    const double c = static_cast<int>(j) < cap ? 1.0 : 1.0 - bg;
    a_pos[j] = a_neg[j] = c;
    b[j] = m.values[static_cast<Eigen::Index>(j)];
  }
  const std::vector<double> fit = isotonic_nonincreasing(a_pos, a_neg, b);
  Eigen::VectorXd out(y.size());
  for (std::size_t j = 0; j < d; ++j) {
    out[m.permutation[j]] = m.signs[static_cast<Eigen::Index>(j)] * fit[j];
  }
  return out;
}

Eigen::VectorXd prox_pos_card_cap(int cap, const ProxParams& p, const Eigen::VectorXd& y) {
  const double bg = p.beta_gamma();
  const std::size_t d = static_cast<std::size_t>(y.size());
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int c) { return y[a] > y[c]; });
  std::vector<double> a_pos(d), a_neg(d), b(d);
  for (std::size_t j = 0; j < d; ++j) {
    const bool head = static_cast<int>(j) < cap;
    a_pos[j] = head ? 1.0 : 1.0 - bg;
    a_neg[j] = 1.0 - bg;
    b[j] = y[perm[j]];
  }
  const std::vector<double> fit = isotonic_nonincreasing(a_pos, a_neg, b);
  Eigen::VectorXd out(y.size());
  for (std::size_t j = 0; j < d; ++j) out[perm[j]] = fit[j];
  return out;
}

}  // namespace

double prox_s1_scaled(const ScalarPenalty& pen, const ProxParams& p, double y) {
  if (!is_finite_value(y)) throw std::domain_error("prox: non-finite y");
  switch (pen.kind) {
    case ScalarKind::ScaledCard:
      return prox_scaled_card(pen.mu, p, y);
    case ScalarKind::PosCard:
      return prox_pos_card(pen.mu, p, y);
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd prox_s1_scaled(const VectorPenalty& pen, const ProxParams& p, const Eigen::VectorXd& y) {
  if (y.size() != pen.dim) throw std::invalid_argument("prox: dimension mismatch");
  if (!y.allFinite()) throw std::domain_error("prox: non-finite y");
  switch (pen.kind) {
    case VectorKind::L0: {
      const ScalarPenalty sp = ScalarPenalty::scaled_card(pen.mu);
      Eigen::VectorXd out(y.size());
      for (Eigen::Index j = 0; j < y.size(); ++j) out[j] = prox_scaled_card(sp.mu, p, y[j]);
      return out;
    }
    case VectorKind::CardCap:
      return prox_card_cap(pen.cap, p, y);
    case VectorKind::PosCardCap:
      return prox_pos_card_cap(pen.cap, p, y);
  }
  throw std::logic_error("unreachable");
}

Eigen::MatrixXd prox_s1_scaled(const MatrixPenalty& pen, const ProxParams& p, const Eigen::MatrixXd& y) {
  if (y.rows() != pen.rows || y.cols() != pen.cols) throw std::invalid_argument("prox: shape mismatch");
  if (!y.allFinite()) throw std::domain_error("prox: non-finite y");
  switch (pen.kind) {
    case MatrixKind::ScaledRank:
    case MatrixKind::RankCap: {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::VectorXd sv = svd.singularValues();
      Eigen::VectorXd fit;
      if (pen.kind == MatrixKind::ScaledRank) {
        fit.resize(sv.size());
        for (Eigen::Index j = 0; j < sv.size(); ++j) fit[j] = prox_scaled_card(pen.mu, p, sv[j]);
      } else {
        fit = prox_card_cap(pen.cap, p, sv);
      }
      // The vector solve preserves the nonincreasing nonnegative ordering, so
      // reassembling with the input's singular vectors stays a valid SVD.
      for (Eigen::Index j = 0; j + 1 < fit.size(); ++j) {
        if (fit[j] < fit[j + 1] - 1e-12 * (1.0 + fit[j])) {
          throw std::logic_error("prox: spectral order not preserved");
        }
      }
      return svd.matrixU() * fit.asDiagonal() * svd.matrixV().transpose();
    }
    case MatrixKind::PosRank: {
      if ((y - y.transpose()).norm() > 1e-10 * std::max(y.norm(), 1e-300)) {
        throw std::invalid_argument("prox: PosRank requires symmetric input");
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (y + y.transpose()));
      Eigen::VectorXd fit(es.eigenvalues().size());
      for (Eigen::Index j = 0; j < fit.size(); ++j) {
        fit[j] = prox_pos_card(pen.mu, p, es.eigenvalues()[j]);
      }
      return es.eigenvectors() * fit.asDiagonal() * es.eigenvectors().transpose();
    }
  }
  throw std::logic_error("unreachable");
}

double prox_s2(const ScalarPenalty& pen, const ProxParams& p, double y) {
  const double z = prox_s1_scaled(pen, p, y);
  return (p.rho * y - p.gamma * z) / (p.rho - p.gamma);
}

Eigen::VectorXd prox_s2(const VectorPenalty& pen, const ProxParams& p, const Eigen::VectorXd& y) {
  const Eigen::VectorXd z = prox_s1_scaled(pen, p, y);
  return (p.rho * y - p.gamma * z) / (p.rho - p.gamma);
}

Eigen::MatrixXd prox_s2(const MatrixPenalty& pen, const ProxParams& p, const Eigen::MatrixXd& y) {
  const Eigen::MatrixXd z = prox_s1_scaled(pen, p, y);
  return (p.rho * y - p.gamma * z) / (p.rho - p.gamma);
}

namespace {

void check_quadratic_weights(double gamma, double a, double rho_tilde) {
  if (!(a >= 0.0) || !is_finite_value(a)) throw std::invalid_argument("prox: a must be nonnegative");
  if (!(rho_tilde >= 0.0) || !is_finite_value(rho_tilde)) {
    throw std::invalid_argument("prox: rho_tilde must be nonnegative");
  }
  if (!(a + rho_tilde > gamma)) throw std::invalid_argument("prox: effective rho must exceed gamma");
}

}  // namespace

double prox_s2_with_quadratic(const ScalarPenalty& pen, double gamma, double d, double a,
                              double rho_tilde, double y) {
  check_quadratic_weights(gamma, a, rho_tilde);
  const double w = (a * d + rho_tilde * y) / (a + rho_tilde);
  return prox_s2(pen, ProxParams(gamma, a + rho_tilde), w);
}

Eigen::VectorXd prox_s2_with_quadratic(const VectorPenalty& pen, double gamma,
                                       const Eigen::VectorXd& d, double a, double rho_tilde,
                                       const Eigen::VectorXd& y) {
  check_quadratic_weights(gamma, a, rho_tilde);
  const Eigen::VectorXd w = (a * d + rho_tilde * y) / (a + rho_tilde);
  return prox_s2(pen, ProxParams(gamma, a + rho_tilde), w);
}

Eigen::MatrixXd prox_s2_with_quadratic(const MatrixPenalty& pen, double gamma,
                                       const Eigen::MatrixXd& d, double a, double rho_tilde,
                                       const Eigen::MatrixXd& y) {
  check_quadratic_weights(gamma, a, rho_tilde);
  const Eigen::MatrixXd w = (a * d + rho_tilde * y) / (a + rho_tilde);
  return prox_s2(pen, ProxParams(gamma, a + rho_tilde), w);
}

}  // namespace quadenv
