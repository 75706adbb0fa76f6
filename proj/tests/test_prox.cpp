#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>

#include "quadenv/prox.hpp"

using namespace quadenv;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/// 1-D scan argmin of beta*S1 + 0.5*(x-y)^2 for the scalar penalties.
double scan_prox_s1_scalar(const ScalarPenalty& pen, const ProxParams& p, double y, double lo,
                           double hi, double step) {
  const double t = std::sqrt(2.0 * pen.mu / p.gamma);
  auto s1 = [&](double x) {
    if (pen.kind == ScalarKind::ScaledCard) return -std::min(0.5 * p.gamma * x * x, pen.mu);
    return x <= t ? -0.5 * p.gamma * x * x : -pen.mu;
  };
  double best_x = lo, best = kInf;
  for (double x = lo; x <= hi; x += step) {
    const double v = p.beta() * s1(x) + 0.5 * (x - y) * (x - y);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

double s2_obj_scalar(const ScalarPenalty& pen, const ProxParams& p, double y, double x) {
  return s2_scalar(EnvelopeParams(p.gamma, pen), x) + 0.5 * p.rho * (x - y) * (x - y);
}

/// 2-D scan argmin of S2 + rho/2 ||x-y||^2 inside the ball that must contain
/// the minimizer.
Eigen::VectorXd scan_prox_s2_2d(const std::function<double(const Eigen::VectorXd&)>& s2,
                                const ProxParams& p, const Eigen::VectorXd& y, double step) {
  const double radius = std::sqrt(2.0 * s2(y) / p.rho) + 2.0 * step;
  Eigen::VectorXd best = y;
  double best_val = kInf;
  Eigen::VectorXd x(2);
  for (double x0 = y[0] - radius; x0 <= y[0] + radius; x0 += step) {
    for (double x1 = y[1] - radius; x1 <= y[1] + radius; x1 += step) {
      x << x0, x1;
      const double v = s2(x) + 0.5 * p.rho * (x - y).squaredNorm();
      if (v < best_val) {
        best_val = v;
        best = x;
      }
    }
  }
  return best;
}

}  // namespace

TEST_CASE("scalar prox of the scaled first transform") {
  const ScalarPenalty pen = ScalarPenalty::scaled_card(1.0);
  const ProxParams p(1.0, 2.0);
  CHECK(prox_s1_scaled(pen, p, 2.0) == 2.0);
  CHECK(prox_s1_scaled(pen, p, 0.0) == 0.0);

  // Grid argmin oracle across a range of inputs.
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> ys(-4.0, 4.0);
  for (int i = 0; i < 30; ++i) {
    const double y = ys(rng);
    const double got = prox_s1_scaled(pen, p, y);
    const double ref = scan_prox_s1_scalar(pen, p, y, -6.0, 6.0, 1e-4);
    CHECK(std::abs(got - ref) <= 2e-4);
  }
  for (int i = 0; i < 30; ++i) {
    const ScalarPenalty pp = ScalarPenalty::pos_card(0.8);
    const ProxParams params(0.7, 1.9);
    const double y = ys(rng);
    const double got = prox_s1_scaled(pp, params, y);
    // The negative branch inflates by 1/(1-beta*gamma), so scan wide.
    const double ref = scan_prox_s1_scalar(pp, params, y, -14.0, 14.0, 1e-4);
    CHECK(std::abs(got - ref) <= 2e-4);
  }
}

TEST_CASE("scalar prox of the envelope") {
  const ScalarPenalty pen = ScalarPenalty::scaled_card(1.0);
  const ProxParams p(1.0, 2.0);
  CHECK(prox_s2(pen, p, 0.5) == doctest::Approx(0.0));
  CHECK(prox_s2(pen, p, 2.0) == doctest::Approx(2.0));
  CHECK(prox_s2(pen, p, 0.0) == 0.0);

  // Fixed points beyond the threshold, exactly.
  const double t = std::sqrt(2.0);
  for (double y : {t + 0.01, 2.0, 5.0, -3.0}) {
    CHECK(prox_s2(pen, p, y) == y);
  }
}

TEST_CASE("the origin is a fixed point for every penalty") {
  const ProxParams p(1.0, 2.0);
  CHECK(prox_s2(ScalarPenalty::scaled_card(1.0), p, 0.0) == 0.0);
  CHECK(prox_s2(ScalarPenalty::pos_card(1.0), p, 0.0) == 0.0);
  CHECK(prox_s2(VectorPenalty::l0(1, 3), p, Eigen::VectorXd::Zero(3)).norm() == 0.0);
  CHECK(prox_s2(VectorPenalty::card_cap(1, 3), p, Eigen::VectorXd::Zero(3)).norm() == 0.0);
  CHECK(prox_s2(VectorPenalty::pos_card_cap(1, 3), p, Eigen::VectorXd::Zero(3)).norm() == 0.0);
  CHECK(prox_s2(MatrixPenalty::rank_cap(1, 2, 2), p, Eigen::MatrixXd::Zero(2, 2)).norm() == 0.0);
  CHECK(prox_s2(MatrixPenalty::pos_rank(1, 2), p, Eigen::MatrixXd::Zero(2, 2)).norm() == 0.0);
}

TEST_CASE("vector prox matches 2-D brute force for the cap") {
  const VectorPenalty pen = VectorPenalty::card_cap(1, 2);
  const ProxParams p(1.0, 2.0);
  auto s2 = [&](const Eigen::VectorXd& x) { return s2_vector(pen, p.gamma, x); };

  const Eigen::VectorXd y0 = vec({3, 1});
  const Eigen::VectorXd got0 = prox_s2(pen, p, y0);
  const Eigen::VectorXd ref0 = scan_prox_s2_2d(s2, p, y0, 0.01);
  CHECK((got0 - ref0).lpNorm<Eigen::Infinity>() <= 0.011);

  // A near-tie input exercises the merged-block branch of the solve.
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<Eigen::VectorXd> probes = {vec({1.0, 1.0}), vec({1.0, 0.95}), vec({-2.0, 1.9})};
  for (int i = 0; i < 25; ++i) probes.push_back(vec({u(rng), u(rng)}));
  for (const Eigen::VectorXd& y : probes) {
    const Eigen::VectorXd got = prox_s2(pen, p, y);
    const Eigen::VectorXd ref = scan_prox_s2_2d(s2, p, y, 0.01);
    CHECK((got - ref).lpNorm<Eigen::Infinity>() <= 0.011);
  }
}

TEST_CASE("pos cap prox matches brute force on the first transform route") {
  const VectorPenalty pen = VectorPenalty::pos_card_cap(1, 2);
  const ProxParams p(1.0, 2.0);
  // Direct scan on beta*S1 + half square; covers negative and tied inputs.
  auto scan = [&](const Eigen::VectorXd& y, double step) {
    Eigen::VectorXd best = y;
    double best_val = kInf;
    Eigen::VectorXd x(2);
    for (double x0 = -5; x0 <= 5; x0 += step) {
      for (double x1 = -5; x1 <= 5; x1 += step) {
        x << x0, x1;
        const double v = p.beta() * s1_vector(pen, p.gamma, x) + 0.5 * (x - y).squaredNorm();
        if (v < best_val) {
          best_val = v;
          best = x;
        }
      }
    }
    return best;
  };
  for (const Eigen::VectorXd& y :
       {vec({2, -1}), vec({1, 0.9}), vec({-0.5, -2}), vec({0.3, 0.31})}) {
    const Eigen::VectorXd got = prox_s1_scaled(pen, p, y);
    const Eigen::VectorXd ref = scan(y, 0.02);
    CHECK((got - ref).lpNorm<Eigen::Infinity>() <= 0.021);
  }
}

TEST_CASE("cap proxes survive perturbation fuzzing in higher dimensions") {
  // The scaled-S1 prox objective is strongly convex, so optimality against
  // random perturbations certifies the isotonic solve globally.
  std::mt19937 rng(424242);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> dims(1, 8);
  std::uniform_real_distribution<double> gam(0.3, 2.5);
  std::uniform_real_distribution<double> ratio(1.05, 8.0);
  std::uniform_int_distribution<int> tie(0, 2);
  for (int trial = 0; trial < 400; ++trial) {
    const int d = dims(rng);
    const int cap = std::uniform_int_distribution<int>(1, d)(rng);
    Eigen::VectorXd y(d);
    for (int j = 0; j < d; ++j) y[j] = 2.0 * g(rng);
    if (tie(rng) == 0 && d >= 2) y[1] = y[0];
    const double gamma = gam(rng);
    const ProxParams p(gamma, gamma * ratio(rng));
    const bool positive = trial % 2 == 1;
    const VectorPenalty pen =
        positive ? VectorPenalty::pos_card_cap(cap, d) : VectorPenalty::card_cap(cap, d);
    const Eigen::VectorXd z = prox_s1_scaled(pen, p, y);
    const double at_z = p.beta() * s1_vector(pen, gamma, z) + 0.5 * (z - y).squaredNorm();
    for (int probe = 0; probe < 40; ++probe) {
      Eigen::VectorXd delta(d);
      for (int j = 0; j < d; ++j) delta[j] = g(rng);
      delta *= std::pow(10.0, -(probe % 5)) / delta.norm();
      const Eigen::VectorXd cand = z + delta;
      const double at_cand =
          p.beta() * s1_vector(pen, gamma, cand) + 0.5 * (cand - y).squaredNorm();
      CHECK(at_cand >= at_z - 1e-10);
    }
  }
}

TEST_CASE("decomposition consistency on random draws") {
  std::mt19937 rng(123);
  std::uniform_real_distribution<double> gammas(0.3, 3.0);
  std::uniform_real_distribution<double> ratio(1.05, 10.0);
  std::uniform_real_distribution<double> ys(-3.0, 3.0);
  for (int i = 0; i < 25; ++i) {
    const double gamma = gammas(rng);
    const ProxParams p(gamma, gamma * ratio(rng));
    const ScalarPenalty pen = ScalarPenalty::scaled_card(1.0);
    const double y = ys(rng);
    const double got = prox_s2(pen, p, y);
    // scan of the envelope objective directly
    double best = kInf, best_x = 0;
    for (double x = -8; x <= 8; x += 1e-3) {
      const double v = s2_obj_scalar(pen, p, y, x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    CHECK(std::abs(got - best_x) <= 1.5e-3);
  }
}

TEST_CASE("prox is Lipschitz with modulus rho/(rho-gamma)") {
  // The envelope is gamma-weakly convex, so its prox at rho > gamma is
  // single-valued and rho/(rho-gamma)-Lipschitz. It is NOT nonexpansive:
  // e.g. mu=1, gamma=1, rho=1.7 maps -1.6 -> -1.6 and -1.0 -> -0.4086.
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const ProxParams p(1.0, 1.7);
  const double modulus = p.rho / (p.rho - p.gamma);
  const ScalarPenalty sc = ScalarPenalty::scaled_card(1.0);
  double best_ratio = 0.0;
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng), b = u(rng);
    if (a == b) continue;
    const double ratio = std::abs(prox_s2(sc, p, a) - prox_s2(sc, p, b)) / std::abs(a - b);
    CHECK(ratio <= modulus + 1e-10);
    best_ratio = std::max(best_ratio, ratio);
  }
  CHECK(best_ratio > 1.0);  // expansiveness does occur
  const VectorPenalty cap = VectorPenalty::card_cap(2, 4);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd a(4), b(4);
    for (int j = 0; j < 4; ++j) {
      a[j] = u(rng);
      b[j] = u(rng);
    }
    CHECK((prox_s2(cap, p, a) - prox_s2(cap, p, b)).norm() <=
          modulus * (a - b).norm() + 1e-10);
  }
}

TEST_CASE("spectral prox preserves order and matches the vector route") {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  const ProxParams p(1.0, 2.5);
  for (int i = 0; i < 50; ++i) {
    Eigen::VectorXd sigma(4);
    for (int j = 0; j < 4; ++j) sigma[j] = u(rng);
    std::sort(sigma.data(), sigma.data() + 4, std::greater<>());
    const Eigen::VectorXd out = prox_s1_scaled(VectorPenalty::card_cap(2, 4), p, sigma);
    for (int j = 0; j + 1 < 4; ++j) CHECK(out[j] >= out[j + 1] - 1e-12);
    CHECK(out.minCoeff() >= -1e-12);
  }

  // Matrix prox on a diagonal matrix equals the vector prox of the diagonal.
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d.diagonal() << 3.0, 1.5, 0.2;
  const Eigen::MatrixXd out =
      prox_s2(MatrixPenalty::rank_cap(1, 3, 3), p, d);
  const Eigen::VectorXd ref = prox_s2(VectorPenalty::card_cap(1, 3), p, vec({3.0, 1.5, 0.2}));
  CHECK((out.diagonal() - ref).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK((out - Eigen::MatrixXd(out.diagonal().asDiagonal())).norm() <= 1e-10);
}

TEST_CASE("scaled rank prox is optimal against perturbations") {
  std::mt19937 rng(71);
  std::normal_distribution<double> g;
  Eigen::MatrixXd y(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) y(i, j) = 1.5 * g(rng);
  const MatrixPenalty pen = MatrixPenalty::scaled_rank(1.0, 3, 2);
  const ProxParams p(1.0, 2.2);
  const Eigen::MatrixXd z = prox_s1_scaled(pen, p, y);
  const double at_z = p.beta() * s1_matrix(pen, p.gamma, z) + 0.5 * (z - y).squaredNorm();
  for (int probe = 0; probe < 300; ++probe) {
    Eigen::MatrixXd delta(3, 2);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) delta(i, j) = g(rng);
    delta *= std::pow(10.0, -(probe % 4)) / delta.norm();
    const Eigen::MatrixXd cand = z + delta;
    const double at_cand =
        p.beta() * s1_matrix(pen, p.gamma, cand) + 0.5 * (cand - y).squaredNorm();
    CHECK(at_cand >= at_z - 1e-10);
  }
}

TEST_CASE("pos rank prox through the eigendecomposition") {
  std::mt19937 rng(29);
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = g(rng);
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  const ProxParams p(1.0, 2.0);
  const Eigen::MatrixXd z = prox_s1_scaled(MatrixPenalty::pos_rank(1, 3), p, sym);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const ScalarPenalty pc = ScalarPenalty::pos_card(1.0);
  Eigen::VectorXd lam(3);
  for (int j = 0; j < 3; ++j) lam[j] = prox_s1_scaled(pc, p, es.eigenvalues()[j]);
  const Eigen::MatrixXd ref = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  CHECK((z - ref).norm() <= 1e-10);
}

TEST_CASE("prox with folded quadratic") {
  const ScalarPenalty pen = ScalarPenalty::scaled_card(1.0);
  CHECK(prox_s2_with_quadratic(pen, 1.0, 2.0, 1.0, 1.0, 2.0) == doctest::Approx(2.0));
  // d == y averages to the same point with rho = 2.
  CHECK(prox_s2_with_quadratic(pen, 1.0, 0.5, 1.0, 1.0, 0.5) ==
        doctest::Approx(prox_s2(pen, ProxParams(1.0, 2.0), 0.5)));
  // Small a approaches the plain prox at rho_tilde.
  const double limit = prox_s2(pen, ProxParams(1.0, 1.5), 0.9);
  CHECK(prox_s2_with_quadratic(pen, 1.0, 123.0, 1e-12, 1.5, 0.9) == doctest::Approx(limit).epsilon(1e-6));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ProxParams(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ProxParams(2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ProxParams(0.0, 1.0), std::invalid_argument);
  const ScalarPenalty pen = ScalarPenalty::scaled_card(1.0);
  CHECK_THROWS_AS(prox_s2_with_quadratic(pen, 2.0, 0.0, 0.5, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(prox_s1_scaled(pen, ProxParams(1.0, 2.0), std::nan("")), std::domain_error);
}
