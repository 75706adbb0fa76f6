#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "quadenv/lifting.hpp"
#include "quadenv/oracle.hpp"

using namespace quadenv;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Eigen::MatrixXd random_orthogonal(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  return Eigen::HouseholderQR<Eigen::MatrixXd>(m).householderQ();
}

/// Enumeration oracle for S1 of the cap indicators: -gamma/2 times the
/// squared distance to the feasible set, minimized over supports.
double s1_cap_enumerated(const Eigen::VectorXd& y, int cap, double gamma, bool positive) {
  const int d = static_cast<int>(y.size());
  double best = kInf;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    if (__builtin_popcount(mask) > cap) continue;
    double dist2 = 0.0;
    for (int j = 0; j < d; ++j) {
      if (mask & (1u << j)) {
        if (positive && y[j] < 0.0) dist2 += y[j] * y[j];
      } else {
        dist2 += y[j] * y[j];
      }
    }
    best = std::min(best, dist2);
  }
  return -0.5 * gamma * best;
}

}  // namespace

TEST_CASE("sort_magnitudes") {
  const SortedMagnitudes m = sort_magnitudes(vec({1, -3, 3}));
  CHECK(m.values[0] == 3.0);
  CHECK(m.values[1] == 3.0);
  CHECK(m.values[2] == 1.0);
  CHECK(m.permutation == std::vector<int>{1, 2, 0});
  CHECK(m.signs[0] == -1.0);
  CHECK(m.signs[1] == 1.0);
  CHECK(m.signs[2] == 1.0);

  const SortedMagnitudes z = sort_magnitudes(vec({0, 0}));
  CHECK(z.permutation == std::vector<int>{0, 1});

  const SortedMagnitudes s = sort_magnitudes(vec({-5}));
  CHECK(s.values[0] == 5.0);
  CHECK(s.signs[0] == -1.0);

  // Reconstruction property on random input.
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  Eigen::VectorXd x(6);
  for (int i = 0; i < 6; ++i) x[i] = g(rng);
  const SortedMagnitudes r = sort_magnitudes(x);
  for (int i = 0; i < 6; ++i) {
    CHECK(x[r.permutation[static_cast<std::size_t>(i)]] == r.signs[i] * r.values[i]);
  }
  CHECK_THROWS_AS(sort_magnitudes(vec({1, kInf})), std::domain_error);
}

TEST_CASE("s1_vector known values and enumeration oracle") {
  CHECK(s1_vector(VectorPenalty::card_cap(1, 3), 1.0, vec({3, 1, 2})) == doctest::Approx(-2.5));
  CHECK(s1_vector(VectorPenalty::card_cap(3, 3), 1.0, vec({3, 1, 2})) == 0.0);
  CHECK(s1_vector(VectorPenalty::pos_card_cap(1, 2), 1.0, vec({2, -1})) == doctest::Approx(-0.5));
  CHECK(s1_vector(VectorPenalty::l0(1, 2), 1.0, vec({1, 10})) == doctest::Approx(-1.5));

  std::mt19937 rng(17);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_real_distribution<double> gam(0.2, 4.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd y(4);
    for (int i = 0; i < 4; ++i) y[i] = g(rng);
    const double gamma = gam(rng);
    for (int cap = 1; cap <= 4; ++cap) {
      CHECK(s1_vector(VectorPenalty::card_cap(cap, 4), gamma, y) ==
            doctest::Approx(s1_cap_enumerated(y, cap, gamma, false)).epsilon(1e-12));
      CHECK(s1_vector(VectorPenalty::pos_card_cap(cap, 4), gamma, y) ==
            doctest::Approx(s1_cap_enumerated(y, cap, gamma, true)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(s1_vector(VectorPenalty::l0(1, 3), 1.0, vec({1, 2})), std::invalid_argument);
}

TEST_CASE("s2_vector known values") {
  CHECK(s2_vector(VectorPenalty::card_cap(1, 2), 1.0, vec({2, 0})) == 0.0);
  CHECK(s2_vector(VectorPenalty::card_cap(1, 2), 1.0, vec({2, 1})) == doctest::Approx(2.0));
  CHECK(s2_vector(VectorPenalty::l0(1, 2), 1.0, vec({std::sqrt(2.0), std::sqrt(2.0) / 2})) ==
        doctest::Approx(1.75));
  CHECK_THROWS_AS(s2_vector(VectorPenalty::pos_card_cap(1, 2), 1.0, vec({1, 0})), std::invalid_argument);
}

TEST_CASE("cap envelope with M=1 equals gamma*|x1*x2| in 2-D") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd x = vec({u(rng), u(rng)});
    const double gamma = 0.25 + std::abs(u(rng));
    CHECK(s2_vector(VectorPenalty::card_cap(1, 2), gamma, x) ==
          doctest::Approx(gamma * std::abs(x[0] * x[1])).epsilon(1e-12));
  }
}

TEST_CASE("separable consistency of the L0 envelope") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  const VectorPenalty pen = VectorPenalty::l0(0.7, 5);
  const EnvelopeParams sp(1.3, ScalarPenalty::scaled_card(0.7));
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x(5);
    for (int j = 0; j < 5; ++j) x[j] = u(rng);
    double sum = 0.0;
    for (int j = 0; j < 5; ++j) sum += s2_scalar(sp, x[j]);
    CHECK(s2_vector(pen, 1.3, x) == sum);
  }
}

TEST_CASE("cap envelope matches the 2-D grid oracle") {
  const double step = 0.01;
  const GridSpec inner = GridSpec::centered(4.0, step, 2);
  const GridSpec padded = GridSpec::centered(12.0, step, 2);
  const VectorPenalty pen = VectorPenalty::card_cap(1, 2);
  const auto f_tab = tabulate(padded, [&](std::span<const double> x) {
    const int nnz = (x[0] != 0.0 ? 1 : 0) + (x[1] != 0.0 ? 1 : 0);
    return nnz <= 1 ? 0.0 : kInf;
  });
  const double gamma = 1.0;
  const auto oracle = grid_s2(padded, f_tab, gamma, inner);
  double worst = 0.0;
  long idx = 0;
  for (long i = 0; i < inner.axis_size(0); ++i) {
    for (long j = 0; j < inner.axis_size(1); ++j, ++idx) {
      const Eigen::VectorXd x = vec({inner.point(0, i), inner.point(1, j)});
      worst = std::max(worst, std::abs(oracle[static_cast<std::size_t>(idx)] - s2_vector(pen, gamma, x)));
    }
  }
  CHECK(worst <= 5.0 * step);
}

TEST_CASE("cap envelope matches a 3-D grid oracle with M=2") {
  const double step = 0.05;
  const GridSpec inner = GridSpec::centered(1.5, step, 3);
  const GridSpec padded = GridSpec::centered(5.0, step, 3);
  const auto f_tab = tabulate(padded, [&](std::span<const double> x) {
    const int nnz = (x[0] != 0.0) + (x[1] != 0.0) + (x[2] != 0.0);
    return nnz <= 2 ? 0.0 : kInf;
  });
  const auto oracle = grid_s2(padded, f_tab, 1.0, inner);
  const VectorPenalty pen = VectorPenalty::card_cap(2, 3);
  double worst = 0.0;
  long idx = 0;
  for (long i = 0; i < inner.axis_size(0); ++i)
    for (long j = 0; j < inner.axis_size(1); ++j)
      for (long k = 0; k < inner.axis_size(2); ++k, ++idx) {
        const Eigen::VectorXd x = vec({inner.point(0, i), inner.point(1, j), inner.point(2, k)});
        worst = std::max(worst, std::abs(oracle[static_cast<std::size_t>(idx)] - s2_vector(pen, 1.0, x)));
      }
  CHECK(worst <= 5.0 * step);
}

TEST_CASE("cap envelope agrees with a breakpoint scan in higher dimensions") {
  // Independent route: with x sorted nonincreasing and nonnegative, the
  // envelope is gamma * max_{t>=0} G(t) with
  //   G(t) = sum_{j>M} (t x_j - x_j^2/2) - 0.5 * sum_{j<=M} ((t - x_j)_+)^2,
  // a concave piecewise quadratic whose pieces break at the head values.
  auto scan_route = [](const Eigen::VectorXd& x_sorted, int cap, double gamma) {
    const int d = static_cast<int>(x_sorted.size());
    double tail_sum = 0.0;
    for (int j = cap; j < d; ++j) tail_sum += x_sorted[j];
    auto g_at = [&](double t) {
      double val = 0.0;
      for (int j = cap; j < d; ++j) val += t * x_sorted[j] - 0.5 * x_sorted[j] * x_sorted[j];
      for (int j = 0; j < cap; ++j) {
        const double e = std::max(t - x_sorted[j], 0.0);
        val -= 0.5 * e * e;
      }
      return val;
    };
    std::vector<double> candidates{0.0};
    for (int j = 0; j < cap; ++j) candidates.push_back(x_sorted[j]);
    // Interior root of G' on each piece: t = (tail_sum + sum of absorbed
    // head entries) / (count absorbed).
    for (int k = 1; k <= cap; ++k) {
      double absorbed = 0.0;
      for (int j = cap - k; j < cap; ++j) absorbed += x_sorted[j];
      candidates.push_back((tail_sum + absorbed) / k);
    }
    double best = -kInf;
    for (double t : candidates) {
      if (t >= 0.0) best = std::max(best, g_at(t));
    }
    return gamma * best;
  };

  std::mt19937 rng(2718);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<int> dims(1, 8);
  std::uniform_real_distribution<double> gam(0.25, 3.0);
  std::uniform_int_distribution<int> tie(0, 2);
  for (int trial = 0; trial < 2000; ++trial) {
    const int d = dims(rng);
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = u(rng);
    if (tie(rng) == 0 && d >= 2) x[1] = -x[0];  // force magnitude ties
    if (tie(rng) == 1 && d >= 3) x[2] = 0.0;
    const int cap = std::uniform_int_distribution<int>(1, d)(rng);
    const double gamma = gam(rng);
    const double closed = s2_vector(VectorPenalty::card_cap(cap, d), gamma, x);
    const double scanned = scan_route(sort_magnitudes(x).values, cap, gamma);
    CHECK(closed == doctest::Approx(scanned).epsilon(1e-10));
  }
}

TEST_CASE("s1_matrix known values") {
  Eigen::MatrixXd y2 = Eigen::MatrixXd::Zero(2, 2);
  y2.diagonal() << 2.0, 0.5;
  CHECK(s1_matrix(MatrixPenalty::scaled_rank(1, 2, 2), 1.0, y2) == doctest::Approx(-1.125));
  CHECK(s1_matrix(MatrixPenalty::scaled_rank(1, 2, 2), 1.0, Eigen::MatrixXd::Zero(2, 2)) == 0.0);

  Eigen::MatrixXd y3 = Eigen::MatrixXd::Zero(3, 3);
  y3.diagonal() << 3.0, 1.0, 2.0;
  const double lifted = s1_matrix(MatrixPenalty::rank_cap(1, 3, 3), 1.0, y3);
  CHECK(lifted == doctest::Approx(-2.5));
  CHECK(lifted == doctest::Approx(s1_vector(VectorPenalty::card_cap(1, 3), 1.0, vec({3, 2, 1}))));
}

TEST_CASE("rank-cap transform agrees with a dense rank-1 search") {
  // Brute force over rank-1 candidates s*u(theta)*v(phi)^T: the best fit
  // leaves exactly the trailing singular values, -gamma/2 * (s2^2 + s3^2).
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(3, 3);
  y.diagonal() << 3.0, 1.0, 2.0;
  auto sphere = [](double theta, double phi) {
    Eigen::Vector3d u;
    u << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
    return u;
  };
  double best = 0.0;
  const int nt = 60, np = 120;
  for (int i = 0; i <= nt; ++i) {
    for (int j = 0; j < np; ++j) {
      const Eigen::Vector3d u = sphere(M_PI * i / nt, 2 * M_PI * j / np);
      // For fixed u the optimal v is the normalized image of u under Y^T.
      const Eigen::Vector3d w = y.transpose() * u;
      best = std::max(best, w.norm());
    }
  }
  const double dist2 = y.squaredNorm() - best * best;
  CHECK(s1_matrix(MatrixPenalty::rank_cap(1, 3, 3), 1.0, y) ==
        doctest::Approx(-0.5 * dist2).epsilon(1e-3));
}

TEST_CASE("s2_matrix known values") {
  Eigen::MatrixXd x2 = Eigen::MatrixXd::Zero(2, 2);
  x2.diagonal() << 2.0, 0.5;
  const double expected = 1.0 + (1.0 - std::pow(1.0 - 0.5 / std::sqrt(2.0), 2));
  CHECK(s2_matrix(MatrixPenalty::scaled_rank(1, 2, 2), 1.0, x2) == doctest::Approx(expected).epsilon(1e-10));

  const Eigen::VectorXd u = vec({1, -2, 0.5});
  const Eigen::VectorXd v = vec({3, 1});
  const Eigen::MatrixXd rank1 = u * v.transpose();
  CHECK(s2_matrix(MatrixPenalty::rank_cap(1, 3, 2), 1.0, rank1) == doctest::Approx(0.0).epsilon(1e-12));

  Eigen::MatrixXd xneg = Eigen::MatrixXd::Zero(2, 2);
  xneg.diagonal() << 1.0, -0.5;
  CHECK(s2_matrix(MatrixPenalty::pos_rank(1, 2), 1.0, xneg) == kInf);
}

TEST_CASE("unitary invariance of the spectral lifts") {
  std::mt19937 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd u = random_orthogonal(4, rng);
    const Eigen::MatrixXd v = random_orthogonal(3, rng);
    std::normal_distribution<double> g;
    Eigen::MatrixXd y(4, 3);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 3; ++j) y(i, j) = g(rng);
    const Eigen::MatrixXd conj = u * y * v.transpose();
    for (const MatrixPenalty& pen :
         {MatrixPenalty::scaled_rank(0.8, 4, 3), MatrixPenalty::rank_cap(2, 4, 3)}) {
      const double rel = 1e-10;
      CHECK(s1_matrix(pen, 1.4, conj) ==
            doctest::Approx(s1_matrix(pen, 1.4, y)).epsilon(rel));
      CHECK(s2_matrix(pen, 1.4, conj) ==
            doctest::Approx(s2_matrix(pen, 1.4, y)).epsilon(rel));
    }
  }
}

TEST_CASE("von Neumann trace inequality") {
  std::mt19937 rng(97);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> dim(1, 6);
  for (int trial = 0; trial < 500; ++trial) {
    const int m = dim(rng), n = dim(rng);
    Eigen::MatrixXd x(m, n), y(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        x(i, j) = g(rng);
        y(i, j) = g(rng);
      }
    const double lhs = (x.transpose() * y).trace();
    const double rhs = singular_values(x).dot(singular_values(y));
    CHECK(lhs <= rhs + 1e-10);
  }
  // Equality when the singular vectors are shared.
  for (int trial = 0; trial < 100; ++trial) {
    const int n = dim(rng);
    const Eigen::MatrixXd u = random_orthogonal(n, rng);
    const Eigen::MatrixXd v = random_orthogonal(n, rng);
    Eigen::VectorXd s1(n), s2(n);
    for (int i = 0; i < n; ++i) {
      s1[i] = std::abs(g(rng));
      s2[i] = std::abs(g(rng));
    }
    std::sort(s1.data(), s1.data() + n, std::greater<>());
    std::sort(s2.data(), s2.data() + n, std::greater<>());
    const Eigen::MatrixXd x = u * s1.asDiagonal() * v.transpose();
    const Eigen::MatrixXd y = u * s2.asDiagonal() * v.transpose();
    const double lhs = (x.transpose() * y).trace();
    CHECK(lhs == doctest::Approx(s1.dot(s2)).epsilon(1e-8));
  }
}

TEST_CASE("sandwich and spectral consistency") {
  std::mt19937 rng(13);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd x(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) x(i, j) = g(rng);
    const MatrixPenalty pen = MatrixPenalty::scaled_rank(1.1, 3, 3);
    const double s2 = s2_matrix(pen, 0.9, x);
    CHECK(s2 >= 0.0);
    CHECK(s2 <= matrix_penalty_value(pen, x, 1e-12) + 1e-9);
  }
  // Diagonal matrices with sorted nonnegative diagonal reduce to the vector lift.
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3, 3);
  d.diagonal() << 2.5, 1.0, 0.25;
  CHECK(s2_matrix(MatrixPenalty::rank_cap(1, 3, 3), 1.0, d) ==
        doctest::Approx(s2_vector(VectorPenalty::card_cap(1, 3), 1.0, vec({2.5, 1.0, 0.25}))));
}

TEST_CASE("PosRank requires symmetry") {
  Eigen::MatrixXd x(2, 2);
  x << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(s1_matrix(MatrixPenalty::pos_rank(1, 2), 1.0, x), std::invalid_argument);
}
