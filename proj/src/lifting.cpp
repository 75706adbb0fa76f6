#include "quadenv/lifting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace quadenv {

namespace {

void require_dim(const VectorPenalty& pen, const Eigen::VectorXd& x) {
  if (x.size() != pen.dim) {
    throw std::invalid_argument("vector penalty: dimension mismatch");
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!is_finite_value(x[i])) throw std::domain_error("non-finite vector entry");
  }
}

void require_shape(const MatrixPenalty& pen, const Eigen::MatrixXd& X) {
  if (X.rows() != pen.rows || X.cols() != pen.cols) {
    throw std::invalid_argument("matrix penalty: shape mismatch");
  }
  if (!X.allFinite()) throw std::domain_error("non-finite matrix entry");
}

double require_gamma(double gamma) {
  if (!(gamma > 0.0) || !is_finite_value(gamma)) {
    throw std::invalid_argument("gamma must be positive and finite");
  }
  return gamma;
}

}  // namespace

VectorPenalty VectorPenalty::l0(double mu, int dim) {
  if (!(mu > 0.0) || !is_finite_value(mu)) throw std::invalid_argument("L0: mu must be positive");
  if (dim < 1) throw std::invalid_argument("L0: dim must be positive");
  return {VectorKind::L0, dim, mu, 0};
}

VectorPenalty VectorPenalty::card_cap(int cap, int dim) {
  if (dim < 1) throw std::invalid_argument("CardCap: dim must be positive");
  if (cap < 1 || cap > dim) throw std::invalid_argument("CardCap: need 1 <= M <= dim");
  return {VectorKind::CardCap, dim, 0.0, cap};
}

VectorPenalty VectorPenalty::pos_card_cap(int cap, int dim) {
  if (dim < 1) throw std::invalid_argument("PosCardCap: dim must be positive");
  if (cap < 1 || cap > dim) throw std::invalid_argument("PosCardCap: need 1 <= M <= dim");
  return {VectorKind::PosCardCap, dim, 0.0, cap};
}

MatrixPenalty MatrixPenalty::scaled_rank(double mu, int rows, int cols) {
  if (!(mu > 0.0) || !is_finite_value(mu)) throw std::invalid_argument("ScaledRank: mu must be positive");
  if (rows < 1 || cols < 1) throw std::invalid_argument("ScaledRank: bad shape");
  return {MatrixKind::ScaledRank, rows, cols, mu, 0};
}

MatrixPenalty MatrixPenalty::rank_cap(int cap, int rows, int cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("RankCap: bad shape");
  if (cap < 1 || cap > std::min(rows, cols)) throw std::invalid_argument("RankCap: need 1 <= M <= min(m,n)");
  return {MatrixKind::RankCap, rows, cols, 0.0, cap};
}

MatrixPenalty MatrixPenalty::pos_rank(double mu, int n) {
  if (!(mu > 0.0) || !is_finite_value(mu)) throw std::invalid_argument("PosRank: mu must be positive");
  if (n < 1) throw std::invalid_argument("PosRank: bad shape");
  return {MatrixKind::PosRank, n, n, mu, 0};
}

SortedMagnitudes sort_magnitudes(const Eigen::VectorXd& x) {
  const Eigen::Index d = x.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!is_finite_value(x[i])) throw std::domain_error("sort_magnitudes: non-finite entry");
  }
  SortedMagnitudes out;
  out.permutation.resize(static_cast<std::size_t>(d));
  std::iota(out.permutation.begin(), out.permutation.end(), 0);
  std::stable_sort(out.permutation.begin(), out.permutation.end(), [&](int a, int b) {
    return std::abs(x[a]) > std::abs(x[b]);
  });
  out.values.resize(d);
  out.signs.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double v = x[out.permutation[static_cast<std::size_t>(i)]];
    out.values[i] = std::abs(v);
    out.signs[i] = v < 0.0 ? -1.0 : 1.0;
  }
  return out;
}

double s1_vector(const VectorPenalty& pen, double gamma, const Eigen::VectorXd& y) {
  require_gamma(gamma);
  require_dim(pen, y);
  switch (pen.kind) {
    case VectorKind::L0: {
      const EnvelopeParams p(gamma, ScalarPenalty::scaled_card(pen.mu));
      double acc = 0.0;
      for (Eigen::Index j = 0; j < y.size(); ++j) acc += s1_scalar(p, y[j]);
      return acc;
    }
    case VectorKind::CardCap: {
      const SortedMagnitudes m = sort_magnitudes(y);
      double tail = 0.0;
      for (Eigen::Index j = pen.cap; j < m.values.size(); ++j) tail += m.values[j] * m.values[j];
      return -0.5 * gamma * tail;
    }
    case VectorKind::PosCardCap: {
      // Sort the values themselves (not magnitudes) nonincreasingly.
      std::vector<double> s(y.data(), y.data() + y.size());
      std::sort(s.begin(), s.end(), std::greater<>());
      double head = 0.0;
      for (int j = 0; j < pen.cap; ++j) {
        const double v = std::max(s[static_cast<std::size_t>(j)], 0.0);
        head += v * v;
      }
      return 0.5 * gamma * (head - y.squaredNorm());
    }
  }
  throw std::logic_error("unreachable");
}

double card_cap_envelope_sorted(const Eigen::VectorXd& v, int cap, double gamma) {
  const int d = static_cast<int>(v.size());
  if (cap < 1 || cap > d) throw std::invalid_argument("card_cap_envelope_sorted: bad cap");
  // Suffix sums over the sorted magnitudes; tail for a given k starts at
  // 0-based index cap-k.
  std::vector<double> suf(static_cast<std::size_t>(d) + 1, 0.0);
  std::vector<double> suf2(static_cast<std::size_t>(d) + 1, 0.0);
  for (int j = d - 1; j >= 0; --j) {
    suf[j] = suf[j + 1] + v[j];
    suf2[j] = suf2[j + 1] + v[j] * v[j];
  }
  const double slack = 1e-12 * (1.0 + (d > 0 ? v[0] : 0.0));
  double selected = kInf;
  bool found = false;
  for (int k = 1; k <= cap; ++k) {
    const int start = cap - k;  // first tail index, 0-based
    const double t = suf[start] / k;
    const double upper = start >= 1 ? v[start - 1] : kInf;
    const double lower = v[start];
    if (t <= upper + slack && t >= lower - slack) {
      const double value = 0.5 * gamma * (suf[start] * suf[start] / k - suf2[start]);
      if (!found) {
        selected = value;
        found = true;
      } else if (std::abs(value - selected) > 1e-9 * (1.0 + std::abs(selected))) {
        throw std::logic_error("card_cap_envelope_sorted: inconsistent k selection");
      }
    }
  }
  if (!found) throw std::logic_error("card_cap_envelope_sorted: no admissible k");
  return std::max(selected, 0.0);
}

double s2_vector(const VectorPenalty& pen, double gamma, const Eigen::VectorXd& x) {
  require_gamma(gamma);
  require_dim(pen, x);
  switch (pen.kind) {
    case VectorKind::L0: {
      const EnvelopeParams p(gamma, ScalarPenalty::scaled_card(pen.mu));
      double acc = 0.0;
      for (Eigen::Index j = 0; j < x.size(); ++j) acc += s2_scalar(p, x[j]);
      return acc;
    }
    case VectorKind::CardCap: {
      const SortedMagnitudes m = sort_magnitudes(x);
      return card_cap_envelope_sorted(m.values, pen.cap, gamma);
    }
    case VectorKind::PosCardCap:
      throw std::invalid_argument("s2_vector: PosCardCap has no closed form; use the S1/prox route");
  }
  throw std::logic_error("unreachable");
}

double vector_penalty_value(const VectorPenalty& pen, const Eigen::VectorXd& x, double tol) {
  require_dim(pen, x);
  int support = 0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (std::abs(x[j]) > tol) ++support;
  }
  switch (pen.kind) {
    case VectorKind::L0:
      return pen.mu * support;
    case VectorKind::CardCap:
      return support <= pen.cap ? 0.0 : kInf;
    case VectorKind::PosCardCap: {
      if (support > pen.cap) return kInf;
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (x[j] < -tol) return kInf;
      }
      return 0.0;
    }
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& X) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
  if (svd.info() != Eigen::Success) throw std::runtime_error("SVD failed");
  return svd.singularValues();
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& X) {
  if (X.rows() != X.cols()) throw std::invalid_argument("symmetric_eigenvalues: square input required");
  const double asym = (X - X.transpose()).norm();
  if (asym > 1e-10 * std::max(X.norm(), 1e-300)) {
    throw std::invalid_argument("symmetric_eigenvalues: input not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (X + X.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  return es.eigenvalues().reverse();
}

double s1_matrix(const MatrixPenalty& pen, double gamma, const Eigen::MatrixXd& Y) {
  require_gamma(gamma);
  require_shape(pen, Y);
  switch (pen.kind) {
    case MatrixKind::ScaledRank: {
      const Eigen::VectorXd sv = singular_values(Y);
      const EnvelopeParams p(gamma, ScalarPenalty::scaled_card(pen.mu));
      double acc = 0.0;
      for (Eigen::Index j = 0; j < sv.size(); ++j) acc += s1_scalar(p, sv[j]);
      return acc;
    }
    case MatrixKind::RankCap: {
      const Eigen::VectorXd sv = singular_values(Y);
      return s1_vector(VectorPenalty::card_cap(pen.cap, static_cast<int>(sv.size())), gamma, sv);
    }
    case MatrixKind::PosRank: {
      const Eigen::VectorXd ev = symmetric_eigenvalues(Y);
      const EnvelopeParams p(gamma, ScalarPenalty::pos_card(pen.mu));
      double acc = 0.0;
      for (Eigen::Index j = 0; j < ev.size(); ++j) acc += s1_scalar(p, ev[j]);
      return acc;
    }
  }
  throw std::logic_error("unreachable");
}

double s2_matrix(const MatrixPenalty& pen, double gamma, const Eigen::MatrixXd& X) {
  require_gamma(gamma);
  require_shape(pen, X);
  switch (pen.kind) {
    case MatrixKind::ScaledRank: {
      const Eigen::VectorXd sv = singular_values(X);
      const EnvelopeParams p(gamma, ScalarPenalty::scaled_card(pen.mu));
      double acc = 0.0;
      for (Eigen::Index j = 0; j < sv.size(); ++j) acc += s2_scalar(p, sv[j]);
      return acc;
    }
    case MatrixKind::RankCap: {
      const Eigen::VectorXd sv = singular_values(X);
      return card_cap_envelope_sorted(sv, pen.cap, gamma);
    }
    case MatrixKind::PosRank: {
      const Eigen::VectorXd ev = symmetric_eigenvalues(X);
      const double tol = 1e-10 * X.norm();
      const EnvelopeParams p(gamma, ScalarPenalty::pos_card(pen.mu));
      double acc = 0.0;
      for (Eigen::Index j = 0; j < ev.size(); ++j) {
        if (ev[j] < -tol) return kInf;
        acc += s2_scalar(p, std::max(ev[j], 0.0));
      }
      return acc;
    }
  }
  throw std::logic_error("unreachable");
}

double matrix_penalty_value(const MatrixPenalty& pen, const Eigen::MatrixXd& X, double tol) {
  require_shape(pen, X);
  switch (pen.kind) {
    case MatrixKind::ScaledRank: {
      const Eigen::VectorXd sv = singular_values(X);
      int rank = 0;
      for (Eigen::Index j = 0; j < sv.size(); ++j) {
        if (sv[j] > tol) ++rank;
      }
      return pen.mu * rank;
    }
    case MatrixKind::RankCap: {
      const Eigen::VectorXd sv = singular_values(X);
      int rank = 0;
      for (Eigen::Index j = 0; j < sv.size(); ++j) {
        if (sv[j] > tol) ++rank;
      }
      return rank <= pen.cap ? 0.0 : kInf;
    }
    case MatrixKind::PosRank: {
      const Eigen::VectorXd ev = symmetric_eigenvalues(X);
      int rank = 0;
      for (Eigen::Index j = 0; j < ev.size(); ++j) {
        if (ev[j] < -tol) return kInf;
        if (std::abs(ev[j]) > tol) ++rank;
      }
      return pen.mu * rank;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace quadenv
