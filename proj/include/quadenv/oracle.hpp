#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <vector>

#include "quadenv/lifting.hpp"

namespace quadenv {

/// Uniform grid with a shared step across dimensions; points are exact
/// integer multiples of the step, so 0 is always a grid point and thresholds
/// can be made grid points by snapping the step.
struct GridSpec {
  double step = 0.0;
  std::vector<long> lo;  // inclusive index bounds, point = index * step
  std::vector<long> hi;

  static GridSpec from_bounds(const std::vector<std::pair<double, double>>& bounds, double step);
  static GridSpec centered(double halfwidth, double step, int dims);
  /// Largest step <= approx_step such that target is an exact multiple.
  static double snapped_step(double target, double approx_step);

  int dims() const { return static_cast<int>(lo.size()); }
  long axis_size(int a) const { return hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)] + 1; }
  long total_size() const;
  double point(int a, long i) const { return (lo[static_cast<std::size_t>(a)] + i) * step; }
  GridSpec padded(double pad_width) const;
  bool contains(const GridSpec& inner) const;
};

/// Row-major tabulation (axis 0 slowest).
std::vector<double> tabulate(const GridSpec& g,
                             const std::function<double(std::span<const double>)>& f);

long grid_index(const GridSpec& g, std::span<const long> idx);

/// Discrete Legendre conjugate sup_x <x,y> - g(x) over the input grid,
/// evaluated on the output grid. +inf inputs are skipped; throws if every
/// input value is +inf. Exact discrete supremum via per-axis hull sweeps.
std::vector<double> grid_legendre(const GridSpec& in, const std::vector<double>& g,
                                  const GridSpec& out);

/// First transform sup_x -f(x) - (gamma/2)||x-y||^2 over the input grid.
/// Output grid must be a subgrid of the input grid.
std::vector<double> grid_s1(const GridSpec& in, const std::vector<double>& f, double gamma,
                            const GridSpec& out);

/// Reference implementation by direct scan, for cross-checking the fast
/// transform on small grids.
std::vector<double> grid_s1_naive(const GridSpec& in, const std::vector<double>& f, double gamma,
                                  const GridSpec& out);

/// Quadratic envelope oracle: inf-convolution with (gamma/2)||.||^2 followed
/// by the matching sup-convolution, both exact discrete extrema over the
/// input grid. Tabulate f on a grid padded enough that the extremizers for
/// every output point are interior; the output grid must be a subgrid.
std::vector<double> grid_s2(const GridSpec& in, const std::vector<double>& f, double gamma,
                            const GridSpec& out);

/// Seminorm variant: the quadratic is (1/2)||A(x-y)||^2 for a diagonal A with
/// per-axis entries diag_a (zero entries collapse that axis to a global
/// extremum). Only diagonal operators are supported.
std::vector<double> grid_seminorm_s2(const GridSpec& in, const std::vector<double>& f,
                                     const Eigen::VectorXd& diag_a, const GridSpec& out);

/// s2 values along an ascending gamma list; throws if the list is unsorted,
/// if the values fail to be nondecreasing, or if they overshoot f(x).
std::vector<double> gamma_sweep(const ScalarPenalty& pen, double x, const std::vector<double>& gammas);
std::vector<double> gamma_sweep(const VectorPenalty& pen, const Eigen::VectorXd& x,
                                const std::vector<double>& gammas);

/// Central second differences of s2 along the given directions. When s2 sits
/// strictly below f at x0, some scanned direction must report -gamma within
/// 100*h; otherwise throws.
std::vector<double> curvature_scan(const ScalarPenalty& pen, double gamma, double x0,
                                   const std::vector<double>& directions, double h);
std::vector<double> curvature_scan(const VectorPenalty& pen, double gamma, const Eigen::VectorXd& x0,
                                   const std::vector<Eigen::VectorXd>& directions, double h);

struct ExhaustiveResult {
  Eigen::VectorXd x;
  double objective;
  std::vector<int> support;
};

/// Ground-truth minimizer of f(x) + 0.5*||Ax-d||^2 for L0/CardCap penalties by
/// support enumeration (n <= 12) with ridge-regularized normal equations.
ExhaustiveResult exhaustive_l0_minimizer(const Eigen::MatrixXd& A, const Eigen::VectorXd& d,
                                         const VectorPenalty& pen);

/// Worker count for grid scans: QUADENV_THREADS if set, else the machine
/// parallelism.
int oracle_thread_count();

}  // namespace quadenv
