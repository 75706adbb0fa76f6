#include "quadenv/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include "quadenv/penalty.hpp"

namespace quadenv {

int oracle_thread_count() {
  if (const char* env = std::getenv("QUADENV_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

void parallel_for(long count, const std::function<void(long)>& fn) {
  const int threads = std::min<long>(oracle_thread_count(), count);
  if (threads <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (long i = t; i < count; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

void validate(const GridSpec& g) {
  if (g.dims() < 1 || g.dims() > 3) throw std::invalid_argument("grid: dims must be 1..3");
  if (!(g.step > 0.0) || !is_finite_value(g.step)) throw std::invalid_argument("grid: bad step");
  for (int a = 0; a < g.dims(); ++a) {
    if (g.hi[static_cast<std::size_t>(a)] < g.lo[static_cast<std::size_t>(a)]) {
      throw std::invalid_argument("grid: empty axis");
    }
  }
  if (g.total_size() > 100000000L) throw std::invalid_argument("grid: more than 1e8 points");
}

/// Lower-envelope-of-parabolas transform (Felzenszwalb-Huttenlocher):
/// out[q] = min_k in[k] + c*(x_k - x_q)^2 on a shared uniform line grid.
/// +inf entries are skipped; c = 0 collapses to the line minimum.
void quad_min_line(const std::vector<double>& in, std::vector<double>& out, double step, double c) {
  const long n = static_cast<long>(in.size());
  out.assign(in.size(), kInf);
  if (c == 0.0) {
    double m = kInf;
    for (double v : in) m = std::min(m, v);
    std::fill(out.begin(), out.end(), m);
    return;
  }
  static thread_local std::vector<long> v;
  static thread_local std::vector<double> z;
  v.clear();
  z.clear();
  v.reserve(in.size());
  z.reserve(in.size() + 1);
  for (long k = 0; k < n; ++k) {
    if (in[static_cast<std::size_t>(k)] == kInf) continue;
    const double fk = in[static_cast<std::size_t>(k)];
    const double xk = k * step;
    if (v.empty()) {
      v.push_back(k);
      z.push_back(-kInf);
      z.push_back(kInf);
      continue;
    }
    while (true) {
      const long j = v.back();
      const double fj = in[static_cast<std::size_t>(j)];
      const double xj = j * step;
      const double s = ((fk + c * xk * xk) - (fj + c * xj * xj)) / (2.0 * c * (xk - xj));
      if (s <= z[z.size() - 2] && v.size() > 1) {
        v.pop_back();
        z.pop_back();
        z.back() = kInf;
        continue;
      }
      v.push_back(k);
      z.back() = s;
      z.push_back(kInf);
      break;
    }
  }
  if (v.empty()) return;  // all-infinite line
  std::size_t k = 0;
  for (long q = 0; q < n; ++q) {
    const double xq = q * step;
    while (z[k + 1] < xq) ++k;
    const double xk2 = v[k] * step;
    out[static_cast<std::size_t>(q)] = in[static_cast<std::size_t>(v[k])] + c * (xk2 - xq) * (xk2 - xq);
  }
}

/// Discrete Legendre transform of one line: out[m] = max_k x_k*y_m - g_k,
/// exact via the lower convex hull of the finite samples.
void legendre_line(const std::vector<double>& g, long in_lo, double in_step,
                   std::vector<double>& out, long out_lo, double out_step) {
  const long n = static_cast<long>(g.size());
  static thread_local std::vector<long> hull;
  hull.clear();
  auto slope_ge = [&](long a, long b, long c3) {
    // slope(a,b) >= slope(b,c): pop b from the lower hull.
    const double xa = (in_lo + a) * in_step, xb = (in_lo + b) * in_step, xc = (in_lo + c3) * in_step;
    return (g[static_cast<std::size_t>(b)] - g[static_cast<std::size_t>(a)]) * (xc - xb) >=
           (g[static_cast<std::size_t>(c3)] - g[static_cast<std::size_t>(b)]) * (xb - xa);
  };
  for (long k = 0; k < n; ++k) {
    if (g[static_cast<std::size_t>(k)] == kInf) continue;
    while (hull.size() >= 2 && slope_ge(hull[hull.size() - 2], hull.back(), k)) hull.pop_back();
    hull.push_back(k);
  }
  const long out_n = static_cast<long>(out.size());
  if (hull.empty()) {
    // Supremum over an empty set: the line contributes nothing downstream.
    std::fill(out.begin(), out.end(), -kInf);
    return;
  }
  std::size_t ptr = 0;
  auto eval = [&](std::size_t h, double y) {
    const double x = (in_lo + hull[h]) * in_step;
    return x * y - g[static_cast<std::size_t>(hull[h])];
  };
  for (long m = 0; m < out_n; ++m) {
    const double y = (out_lo + m) * out_step;
    while (ptr + 1 < hull.size() && eval(ptr + 1, y) >= eval(ptr, y)) ++ptr;
    out[static_cast<std::size_t>(m)] = eval(ptr, y);
  }
}

struct AxisView {
  long lines;        // number of lines along the axis
  long stride;       // element stride within a line
  long outer_block;  // elements spanned by one outer index in the input
};

AxisView axis_view(const std::vector<long>& dims, int axis) {
  long inner = 1;
  for (std::size_t a = static_cast<std::size_t>(axis) + 1; a < dims.size(); ++a) inner *= dims[a];
  long outer = 1;
  for (std::size_t a = 0; a < static_cast<std::size_t>(axis); ++a) outer *= dims[a];
  return {outer * inner, inner, inner * dims[static_cast<std::size_t>(axis)]};
}

std::vector<long> spec_dims(const GridSpec& g) {
  std::vector<long> d(static_cast<std::size_t>(g.dims()));
  for (int a = 0; a < g.dims(); ++a) d[static_cast<std::size_t>(a)] = g.axis_size(a);
  return d;
}

/// Apply a 1-D line transform along `axis`, possibly changing that axis size.
std::vector<double> transform_axis(const std::vector<double>& in, const std::vector<long>& in_dims,
                                   int axis, long out_axis_size,
                                   const std::function<void(const std::vector<double>&, std::vector<double>&)>& line_fn) {
  const AxisView view = axis_view(in_dims, axis);
  std::vector<long> out_dims = in_dims;
  out_dims[static_cast<std::size_t>(axis)] = out_axis_size;
  long out_total = 1;
  for (long d : out_dims) out_total *= d;
  std::vector<double> out(static_cast<std::size_t>(out_total));
  const long in_axis = in_dims[static_cast<std::size_t>(axis)];
  const long inner = view.stride;
  const long out_block = inner * out_axis_size;
  parallel_for(view.lines, [&](long line) {
    const long outer = line / inner;
    const long inner_idx = line % inner;
    const long in_base = outer * view.outer_block + inner_idx;
    const long out_base = outer * out_block + inner_idx;
    std::vector<double> buf_in(static_cast<std::size_t>(in_axis));
    std::vector<double> buf_out(static_cast<std::size_t>(out_axis_size));
    for (long k = 0; k < in_axis; ++k) buf_in[static_cast<std::size_t>(k)] = in[static_cast<std::size_t>(in_base + k * inner)];
    line_fn(buf_in, buf_out);
    for (long k = 0; k < out_axis_size; ++k) out[static_cast<std::size_t>(out_base + k * inner)] = buf_out[static_cast<std::size_t>(k)];
  });
  return out;
}

std::vector<double> extract_subgrid(const GridSpec& in, const std::vector<double>& vals,
                                    const GridSpec& out) {
  if (!in.contains(out)) throw std::invalid_argument("grid: output grid is not a subgrid of the input");
  const std::vector<long> in_dims = spec_dims(in);
  std::vector<double> res(static_cast<std::size_t>(out.total_size()));
  std::vector<long> idx(static_cast<std::size_t>(out.dims()), 0);
  const long total = out.total_size();
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    long in_flat = 0;
    for (int a = 0; a < out.dims(); ++a) {
      long sz = 1;
      for (int b = a + 1; b < out.dims(); ++b) sz *= out.axis_size(b);
      const long i = rem / sz;
      rem %= sz;
      const long in_i = out.lo[static_cast<std::size_t>(a)] + i - in.lo[static_cast<std::size_t>(a)];
      in_flat = in_flat * in_dims[static_cast<std::size_t>(a)] + in_i;
    }
    res[static_cast<std::size_t>(flat)] = vals[static_cast<std::size_t>(in_flat)];
  }
  return res;
}

/// Componentwise inf-convolution with per-axis quadratics c_a*(x-y)^2.
std::vector<double> inf_conv(const GridSpec& g, std::vector<double> vals,
                             const std::vector<double>& c) {
  const std::vector<long> dims = spec_dims(g);
  for (int a = 0; a < g.dims(); ++a) {
    vals = transform_axis(vals, dims, a, dims[static_cast<std::size_t>(a)],
                          [&](const std::vector<double>& in, std::vector<double>& out) {
                            quad_min_line(in, out, g.step, c[static_cast<std::size_t>(a)]);
                          });
  }
  return vals;
}

std::vector<double> sup_conv(const GridSpec& g, std::vector<double> vals,
                             const std::vector<double>& c) {
  for (double& v : vals) v = -v;
  vals = inf_conv(g, std::move(vals), c);
  for (double& v : vals) v = -v;
  return vals;
}

void check_some_finite(const std::vector<double>& vals) {
  for (double v : vals) {
    if (v < kInf) return;
  }
  throw std::invalid_argument("grid: all-infinite input");
}

}  // namespace

GridSpec GridSpec::from_bounds(const std::vector<std::pair<double, double>>& bounds, double step) {
  GridSpec g;
  g.step = step;
  for (const auto& [lo, hi] : bounds) {
    if (!is_finite_value(lo) || !is_finite_value(hi) || lo > hi) {
      throw std::invalid_argument("grid: bad bounds");
    }
    g.lo.push_back(static_cast<long>(std::floor(lo / step + 1e-9)));
    g.hi.push_back(static_cast<long>(std::ceil(hi / step - 1e-9)));
  }
  validate(g);
  return g;
}

GridSpec GridSpec::centered(double halfwidth, double step, int dims) {
  std::vector<std::pair<double, double>> b(static_cast<std::size_t>(dims), {-halfwidth, halfwidth});
  return from_bounds(b, step);
}

double GridSpec::snapped_step(double target, double approx_step) {
  if (!(target > 0.0) || !(approx_step > 0.0)) throw std::invalid_argument("grid: bad snap");
  return target / std::ceil(target / approx_step);
}

long GridSpec::total_size() const {
  long t = 1;
  for (int a = 0; a < dims(); ++a) t *= axis_size(a);
  return t;
}

GridSpec GridSpec::padded(double pad_width) const {
  GridSpec g = *this;
  const long extra = static_cast<long>(std::ceil(pad_width / step));
  for (std::size_t a = 0; a < g.lo.size(); ++a) {
    g.lo[a] -= extra;
    g.hi[a] += extra;
  }
  validate(g);
  return g;
}

bool GridSpec::contains(const GridSpec& inner) const {
  if (inner.step != step || inner.dims() != dims()) return false;
  for (std::size_t a = 0; a < lo.size(); ++a) {
    if (inner.lo[a] < lo[a] || inner.hi[a] > hi[a]) return false;
  }
  return true;
}

long grid_index(const GridSpec& g, std::span<const long> idx) {
  long flat = 0;
  for (int a = 0; a < g.dims(); ++a) {
    flat = flat * g.axis_size(a) + (idx[static_cast<std::size_t>(a)] - g.lo[static_cast<std::size_t>(a)]);
  }
  return flat;
}

std::vector<double> tabulate(const GridSpec& g,
                             const std::function<double(std::span<const double>)>& f) {
  validate(g);
  const long total = g.total_size();
  std::vector<double> vals(static_cast<std::size_t>(total));
  std::vector<double> x(static_cast<std::size_t>(g.dims()));
  std::vector<long> idx(static_cast<std::size_t>(g.dims()), 0);
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    for (int a = g.dims() - 1; a >= 0; --a) {
      const long n = g.axis_size(a);
      idx[static_cast<std::size_t>(a)] = rem % n;
      rem /= n;
    }
    for (int a = 0; a < g.dims(); ++a) x[static_cast<std::size_t>(a)] = g.point(a, idx[static_cast<std::size_t>(a)]);
    vals[static_cast<std::size_t>(flat)] = f(x);
  }
  return vals;
}

std::vector<double> grid_legendre(const GridSpec& in, const std::vector<double>& g,
                                  const GridSpec& out) {
  validate(in);
  validate(out);
  if (in.dims() != out.dims()) throw std::invalid_argument("grid_legendre: dims mismatch");
  if (g.size() != static_cast<std::size_t>(in.total_size())) {
    throw std::invalid_argument("grid_legendre: value count mismatch");
  }
  check_some_finite(g);
  std::vector<double> vals = g;
  std::vector<long> dims = spec_dims(in);
  for (int a = 0; a < in.dims(); ++a) {
    if (a > 0) {
      // sup over the next axis adds to the partial conjugate, so the line
      // transform (which subtracts its input) sees the negation.
      for (double& v : vals) v = -v;
    }
    const long out_n = out.axis_size(a);
    const long in_lo = in.lo[static_cast<std::size_t>(a)];
    const long out_lo = out.lo[static_cast<std::size_t>(a)];
    vals = transform_axis(vals, dims, a, out_n,
                          [&](const std::vector<double>& line_in, std::vector<double>& line_out) {
                            legendre_line(line_in, in_lo, in.step, line_out, out_lo, out.step);
                          });
    dims[static_cast<std::size_t>(a)] = out_n;
  }
  return vals;
}

std::vector<double> grid_s1(const GridSpec& in, const std::vector<double>& f, double gamma,
                            const GridSpec& out) {
  validate(in);
  validate(out);
  if (f.size() != static_cast<std::size_t>(in.total_size())) {
    throw std::invalid_argument("grid_s1: value count mismatch");
  }
  check_some_finite(f);
  const std::vector<double> c(static_cast<std::size_t>(in.dims()), 0.5 * gamma);
  std::vector<double> m = inf_conv(in, f, c);
  for (double& v : m) v = -v;
  return extract_subgrid(in, m, out);
}

std::vector<double> grid_s1_naive(const GridSpec& in, const std::vector<double>& f, double gamma,
                                  const GridSpec& out) {
  validate(in);
  validate(out);
  check_some_finite(f);
  const long in_total = in.total_size();
  const long out_total = out.total_size();
  std::vector<double> res(static_cast<std::size_t>(out_total), -kInf);
  std::vector<double> xs(static_cast<std::size_t>(in.dims()));
  std::vector<double> ys(static_cast<std::size_t>(out.dims()));
  for (long oy = 0; oy < out_total; ++oy) {
    long rem = oy;
    for (int a = out.dims() - 1; a >= 0; --a) {
      const long n = out.axis_size(a);
      ys[static_cast<std::size_t>(a)] = out.point(a, rem % n);
      rem /= n;
    }
    double best = -kInf;
    for (long ix = 0; ix < in_total; ++ix) {
      if (f[static_cast<std::size_t>(ix)] == kInf) continue;
      long r = ix;
      for (int a = in.dims() - 1; a >= 0; --a) {
        const long n = in.axis_size(a);
        xs[static_cast<std::size_t>(a)] = in.point(a, r % n);
        r /= n;
      }
      double dist2 = 0.0;
      for (int a = 0; a < in.dims(); ++a) {
        const double dd = xs[static_cast<std::size_t>(a)] - ys[static_cast<std::size_t>(a)];
        dist2 += dd * dd;
      }
      best = std::max(best, -f[static_cast<std::size_t>(ix)] - 0.5 * gamma * dist2);
    }
    res[static_cast<std::size_t>(oy)] = best;
  }
  return res;
}

std::vector<double> grid_s2(const GridSpec& in, const std::vector<double>& f, double gamma,
                            const GridSpec& out) {
  validate(in);
  validate(out);
  if (f.size() != static_cast<std::size_t>(in.total_size())) {
    throw std::invalid_argument("grid_s2: value count mismatch");
  }
  check_some_finite(f);
  const std::vector<double> c(static_cast<std::size_t>(in.dims()), 0.5 * gamma);
  std::vector<double> m = inf_conv(in, f, c);
  std::vector<double> s2 = sup_conv(in, std::move(m), c);
  return extract_subgrid(in, s2, out);
}

std::vector<double> grid_seminorm_s2(const GridSpec& in, const std::vector<double>& f,
                                     const Eigen::VectorXd& diag_a, const GridSpec& out) {
  validate(in);
  validate(out);
  if (in.dims() > 2) throw std::invalid_argument("grid_seminorm_s2: dims must be 1..2");
  if (diag_a.size() != in.dims()) throw std::invalid_argument("grid_seminorm_s2: diagonal size mismatch");
  check_some_finite(f);
  std::vector<double> c(static_cast<std::size_t>(in.dims()));
  for (int a = 0; a < in.dims(); ++a) {
    c[static_cast<std::size_t>(a)] = 0.5 * diag_a[a] * diag_a[a];
  }
  std::vector<double> m = inf_conv(in, f, c);
  std::vector<double> s2 = sup_conv(in, std::move(m), c);
  return extract_subgrid(in, s2, out);
}

namespace {

std::vector<double> sweep_values(const std::function<double(double)>& s2_at, double f_at,
                                 const std::vector<double>& gammas) {
  if (gammas.empty()) throw std::invalid_argument("gamma_sweep: empty list");
  for (std::size_t i = 0; i + 1 < gammas.size(); ++i) {
    if (!(gammas[i] < gammas[i + 1])) throw std::invalid_argument("gamma_sweep: list must be ascending");
  }
  std::vector<double> vals;
  vals.reserve(gammas.size());
  for (double g : gammas) vals.push_back(s2_at(g));
  for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
    if (vals[i] > vals[i + 1] + 1e-12 * (1.0 + std::abs(vals[i]))) {
      throw std::logic_error("gamma_sweep: values not nondecreasing");
    }
  }
  if (f_at < kInf && vals.back() > f_at + 1e-12 * (1.0 + std::abs(f_at))) {
    throw std::logic_error("gamma_sweep: value exceeds f(x)");
  }
  return vals;
}

std::vector<double> scan_values(double gamma, double s2_center, double f_center, std::size_t n_dirs,
                                const std::function<double(std::size_t, double)>& s2_dir, double h) {
  std::vector<double> out(n_dirs);
  bool has_match = false;
  for (std::size_t k = 0; k < n_dirs; ++k) {
    const double plus = s2_dir(k, h);
    const double minus = s2_dir(k, -h);
    out[k] = (plus - 2.0 * s2_center + minus) / (h * h);
    if (std::abs(out[k] + gamma) <= 100.0 * h) has_match = true;
  }
  if (s2_center < f_center - 1e-9 && !has_match) {
    throw std::logic_error("curvature_scan: no direction with second derivative -gamma");
  }
  return out;
}

}  // namespace

std::vector<double> gamma_sweep(const ScalarPenalty& pen, double x, const std::vector<double>& gammas) {
  return sweep_values(
      [&](double g) { return s2_scalar(EnvelopeParams(g, pen), x); },
      scalar_penalty_value(pen, x), gammas);
}

std::vector<double> gamma_sweep(const VectorPenalty& pen, const Eigen::VectorXd& x,
                                const std::vector<double>& gammas) {
  return sweep_values([&](double g) { return s2_vector(pen, g, x); },
                      vector_penalty_value(pen, x), gammas);
}

std::vector<double> curvature_scan(const ScalarPenalty& pen, double gamma, double x0,
                                   const std::vector<double>& directions, double h) {
  const EnvelopeParams p(gamma, pen);
  return scan_values(gamma, s2_scalar(p, x0), scalar_penalty_value(pen, x0), directions.size(),
                     [&](std::size_t k, double t) { return s2_scalar(p, x0 + t * directions[k]); }, h);
}

std::vector<double> curvature_scan(const VectorPenalty& pen, double gamma, const Eigen::VectorXd& x0,
                                   const std::vector<Eigen::VectorXd>& directions, double h) {
  return scan_values(gamma, s2_vector(pen, gamma, x0), vector_penalty_value(pen, x0),
                     directions.size(),
                     [&](std::size_t k, double t) {
                       return s2_vector(pen, gamma, x0 + t * directions[k]);
                     },
                     h);
}

ExhaustiveResult exhaustive_l0_minimizer(const Eigen::MatrixXd& A, const Eigen::VectorXd& d,
                                         const VectorPenalty& pen) {
  const int n = static_cast<int>(A.cols());
  if (A.rows() != d.size()) throw std::invalid_argument("exhaustive: dimension mismatch");
  if (n != pen.dim) throw std::invalid_argument("exhaustive: penalty dimension mismatch");
  if (n > 12) throw std::invalid_argument("exhaustive: n must be <= 12");
  if (pen.kind != VectorKind::L0 && pen.kind != VectorKind::CardCap) {
    throw std::invalid_argument("exhaustive: penalty must be L0 or CardCap");
  }
  ExhaustiveResult best;
  best.x = Eigen::VectorXd::Zero(n);
  best.objective = vector_penalty_value(pen, best.x) + 0.5 * d.squaredNorm();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    const int k = __builtin_popcount(mask);
    if (pen.kind == VectorKind::CardCap && k > pen.cap) continue;
    Eigen::MatrixXd As(A.rows(), k);
    std::vector<int> cols;
    cols.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < n; ++j) {
      if (mask & (1u << j)) {
        As.col(static_cast<Eigen::Index>(cols.size())) = A.col(j);
        cols.push_back(j);
      }
    }
    Eigen::MatrixXd gram = As.transpose() * As;
    gram.diagonal().array() += 1e-12;
    const Eigen::VectorXd xs = gram.ldlt().solve(As.transpose() * d);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < cols.size(); ++i) x[cols[i]] = xs[static_cast<Eigen::Index>(i)];
    const double obj = vector_penalty_value(pen, x) + 0.5 * (A * x - d).squaredNorm();
    if (obj < best.objective) {
      best.objective = obj;
      best.x = x;
      best.support = cols;
    }
  }
  return best;
}

}  // namespace quadenv
