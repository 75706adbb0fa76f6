#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "quadenv/io.hpp"
#include "quadenv/oracle.hpp"
#include "quadenv/prox.hpp"
#include "quadenv/solvers.hpp"
#include "quadenv/weighted.hpp"

using json = nlohmann::ordered_json;
using namespace quadenv;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitRegime = 3;
constexpr int kExitNoConvergence = 4;

struct Range {
  double lo, hi, step;
};

Range parse_range(const std::string& s) {
  Range r{};
  const auto c1 = s.find(':');
  const auto c2 = s.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw std::invalid_argument("range must be lo:hi:step");
  }
  r.lo = std::stod(s.substr(0, c1));
  r.hi = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
  r.step = std::stod(s.substr(c2 + 1));
  if (!(r.step > 0.0) || !(r.lo <= r.hi)) throw std::invalid_argument("empty range");
  return r;
}

std::ostream& open_sink(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

// ---------------------------------------------------------------------------
// envelope

int run_envelope(const std::string& penalty_name, double mu, double gamma,
                 const std::string& range_str, const std::string& figure, double d_value,
                 const std::string& out_path) {
  const Range r = parse_range(range_str);
  std::ofstream file;
  std::ostream& out = open_sink(out_path, file);

  const EnvelopeParams card(gamma, ScalarPenalty::scaled_card(mu));
  auto emit = [&](const std::vector<std::string>& header,
                  const std::function<std::vector<double>(double)>& row) {
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    const long count = std::lround((r.hi - r.lo) / r.step);
    for (long i = 0; i <= count; ++i) {
      const double x = r.lo + i * r.step;
      const std::vector<double> vals = row(x);
      out << format_double(x);
      for (double v : vals) out << ',' << format_double(v);
      out << '\n';
    }
  };

  if (figure.empty()) {
    EnvelopeParams p = penalty_name == "poscard"
                           ? EnvelopeParams(gamma, ScalarPenalty::pos_card(mu))
                           : card;
    emit({"x", "f", "s2"}, [&](double x) {
      return std::vector<double>{scalar_penalty_value(p.penalty, x), s2_scalar(p, x)};
    });
    return 0;
  }
  if (figure == "basic") {
    emit({"x", "f", "s2"}, [&](double x) {
      return std::vector<double>{scalar_penalty_value(card.penalty, x), s2_scalar(card, x)};
    });
    return 0;
  }
  if (figure == "intro") {
    // |x|_0 + (x-1)^2/2 against its envelope and the l1 relaxation.
    const EnvelopeParams unit(1.0, ScalarPenalty::scaled_card(1.0));
    emit({"x", "J", "CE", "relax"}, [&](double x) {
      const double q = 0.5 * (x - 1.0) * (x - 1.0);
      return std::vector<double>{scalar_penalty_value(unit.penalty, x) + q,
                                 s2_scalar(unit, x) + q, std::abs(x) + q};
    });
    return 0;
  }
  if (figure == "fig1" || figure == "fig2") {
    emit({"x", "J", "J_gamma"}, [&](double x) {
      const double q = 0.5 * (x - d_value) * (x - d_value);
      return std::vector<double>{scalar_penalty_value(card.penalty, x) + q, s2_scalar(card, x) + q};
    });
    return 0;
  }
  throw CLI::ValidationError("--figure must be one of intro, basic, fig1, fig2");
}

// ---------------------------------------------------------------------------
// solve

VectorPenalty parse_vector_penalty(const json& p, int dim) {
  const std::string kind = p.at("kind");
  if (kind == "l0" || kind == "card") return VectorPenalty::l0(p.at("mu").get<double>(), dim);
  if (kind == "cardcap") return VectorPenalty::card_cap(p.at("M").get<int>(), dim);
  if (kind == "poscardcap") return VectorPenalty::pos_card_cap(p.at("M").get<int>(), dim);
  throw std::invalid_argument("unknown vector penalty kind '" + kind + "'");
}

MatrixPenalty parse_matrix_penalty(const json& p, int rows, int cols) {
  const std::string kind = p.at("kind");
  if (kind == "rank") return MatrixPenalty::scaled_rank(p.at("mu").get<double>(), rows, cols);
  if (kind == "rankcap") return MatrixPenalty::rank_cap(p.at("M").get<int>(), rows, cols);
  if (kind == "posrank") return MatrixPenalty::pos_rank(p.at("mu").get<double>(), rows);
  throw std::invalid_argument("unknown matrix penalty kind '" + kind + "'");
}

json report_common(const std::string& method, bool converged, int iterations, bool certified,
                   double gap) {
  json rep;
  rep["schema"] = "quadenv-report/1";
  rep["timestamp"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
  rep["method"] = method;
  rep["converged"] = converged;
  rep["iterations"] = iterations;
  rep["certified"] = certified;
  rep["gap"] = gap;
  return rep;
}

void put_objective(json& rep, const char* key, double v) {
  if (is_finite_value(v)) {
    rep[key] = v;
  } else {
    rep[key] = "inf";
  }
}

void write_iterates(const std::string& path, const std::vector<IterateRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iter,objective,step\n";
  for (const IterateRecord& r : trace) {
    out << r.iter << ',' << format_double(r.objective) << ',' << format_double(r.step_norm) << '\n';
  }
}

int run_solve(const std::string& problem_path, std::string report_path, std::string solution_path,
              std::string iterates_path) {
  std::ifstream in(problem_path);
  if (!in) throw std::runtime_error("cannot read " + problem_path);
  json doc = json::parse(in);

  const std::string base = problem_path;
  if (solution_path.empty()) solution_path = base + ".x.csv";
  if (iterates_path.empty()) iterates_path = base + ".iters.csv";

  const json solver = doc.at("solver");
  const std::string method = solver.at("method");
  SolverConfig cfg;
  cfg.tol = solver.value("tol", method == "fbs" ? 1e-9 : 1e-8);
  cfg.max_iters = solver.value("max_iters", 100000);
  cfg.seed = solver.value("seed", 0);

  std::optional<double> gamma;
  if (doc.contains("gamma") && doc["gamma"].is_number()) gamma = doc["gamma"].get<double>();

  const json op = doc.at("operator");
  const std::string op_type = op.at("type");
  const std::string data_path = doc.at("data");

  json rep;
  bool converged = false;

  if (method == "fbs") {
    const Eigen::VectorXd d = read_vector_csv(data_path);
    Eigen::MatrixXd A;
    if (op_type == "dense") {
      A = read_matrix_csv(op.at("path").get<std::string>());
    } else if (op_type == "identity") {
      A = Eigen::MatrixXd::Identity(d.size(), d.size());
    } else {
      throw std::invalid_argument("fbs supports dense or identity operators");
    }
    LeastSquaresProblem prob{A, d, parse_vector_penalty(doc.at("penalty"), static_cast<int>(A.cols())),
                             gamma};
    const SolverReport r = solve_fbs(prob, cfg);
    converged = r.converged;
    write_vector_csv(solution_path, r.x);
    write_iterates(iterates_path, r.trace);
    rep = report_common("fbs", r.converged, r.iterations, r.certificate.certified, r.certificate.gap);
    rep["regime"] = regime_name(r.regime);
    rep["gamma"] = r.gamma;
    rep["rho"] = r.rho;
    rep["norm_upper"] = r.norm_upper;
    rep["norm_lower"] = r.norm_lower;
    rep["seed"] = r.seed;
    rep["degenerate_operator"] = r.degenerate_operator;
    put_objective(rep, "objective_surrogate", r.objective_surrogate);
    put_objective(rep, "objective_original", r.objective_original);
  } else if (method == "admm" || method == "cadzow") {
    if (op_type != "hankel") throw std::invalid_argument(method + " expects the hankel operator");
    if (doc.value("prior", "") != std::string("hankel")) {
      throw std::invalid_argument(method + " requires prior: hankel");
    }
    const Eigen::VectorXd signal = read_vector_csv(data_path);
    Eigen::MatrixXd D = hankel_embed(signal);
    const int n = static_cast<int>(D.rows());

    std::optional<DirectTensorWeight> weight;
    if (doc.contains("weight")) {
      const auto uj = doc["weight"].at("u").get<std::vector<double>>();
      const auto vj = doc["weight"].at("v").get<std::vector<double>>();
      weight.emplace(Eigen::Map<const Eigen::VectorXd>(uj.data(), static_cast<Eigen::Index>(uj.size())),
                     Eigen::Map<const Eigen::VectorXd>(vj.data(), static_cast<Eigen::Index>(vj.size())));
      D = conjugate_to_flat(*weight, D);
    }

    MatrixPriorProblem prob{D, parse_matrix_penalty(doc.at("penalty"), n, n), gamma.value_or(1.0),
                            Prior::Hankel, weight};
    const MatrixSolverReport r = method == "admm" ? solve_admm(prob, cfg) : solve_cadzow(prob, cfg);
    converged = r.converged;

    Eigen::MatrixXd solution = r.x;
    if (weight) {
      // Back to the original space by undoing the diagonal conjugation.
      const Eigen::VectorXd iu = weight->u.cwiseSqrt().cwiseInverse();
      const Eigen::VectorXd iv = weight->v.cwiseSqrt().cwiseInverse();
      solution = iv.asDiagonal() * solution * iu.asDiagonal();
      solution = hankel_project(solution);
    }
    write_vector_csv(solution_path, hankel_adjoint(solution).cwiseQuotient(
                                        triangle_weights(n).cwiseMax(1.0)));
    write_iterates(iterates_path, r.trace);
    rep = report_common(method, r.converged, r.iterations, r.certificate.certified,
                        r.certificate.gap);
    rep["gamma"] = prob.gamma;
    rep["seed"] = cfg.seed;
    rep["feasibility"] = r.prior_residual;
    put_objective(rep, "objective_surrogate", r.objective_surrogate);
    put_objective(rep, "objective_original", r.objective_original);
  } else {
    throw std::invalid_argument("unknown solver method '" + method + "'");
  }

  rep["solution_path"] = solution_path;
  rep["iterates_path"] = iterates_path;
  const std::string text = rep.dump(2) + "\n";
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot write " + report_path);
    out << text;
  }
  std::cout << text;
  return converged ? 0 : kExitNoConvergence;
}

// ---------------------------------------------------------------------------
// oracle suites

struct Check {
  std::string name;
  double deviation;
  double bound;
};

json finish_suite(const std::string& suite, const std::vector<Check>& checks,
                  const std::string& out_path, int& exit_code) {
  json doc;
  doc["suite"] = suite;
  bool pass = true;
  doc["checks"] = json::array();
  for (const Check& c : checks) {
    const bool ok = c.deviation <= c.bound;
    pass = pass && ok;
    doc["checks"].push_back(
        {{"name", c.name}, {"max_deviation", c.deviation}, {"bound", c.bound}, {"pass", ok}});
  }
  doc["pass"] = pass;
  const std::string text = doc.dump(2) + "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << text;
  }
  std::cout << text;
  exit_code = pass ? 0 : 1;
  return doc;
}

std::vector<Check> suite_envelopes() {
  std::vector<Check> checks;
  for (const bool positive : {false, true}) {
    for (const double gamma : {0.25, 1.0, 4.0}) {
      for (const double mu : {0.5, 1.0, 2.0}) {
        const ScalarPenalty pen =
            positive ? ScalarPenalty::pos_card(mu) : ScalarPenalty::scaled_card(mu);
        const EnvelopeParams p(gamma, pen);
        const double t = scalar_threshold(p);
        const double step = GridSpec::snapped_step(t, 1e-3);
        const GridSpec inner = GridSpec::centered(5.0 * t, step, 1);
        const GridSpec padded = inner.padded(5.0 * t);
        const auto f = tabulate(padded, [&](std::span<const double> x) {
          return scalar_penalty_value(pen, x[0]);
        });
        const auto oracle = grid_s2(padded, f, gamma, inner);
        double dev = 0.0;
        for (long i = 0; i < inner.axis_size(0); ++i) {
          const double x = inner.point(0, i);
          const double closed = s2_scalar(p, x);
          if (closed == kInf) continue;
          dev = std::max(dev, std::abs(closed - oracle[static_cast<std::size_t>(i)]));
        }
        checks.push_back({(positive ? std::string("poscard") : std::string("card")) + "/gamma=" +
                              format_double(gamma) + "/mu=" + format_double(mu),
                          dev, 1e-2});
      }
    }
  }
  // 2-D cardinality cap against the grid.
  const double step = 0.01;
  const GridSpec inner = GridSpec::centered(4.0, step, 2);
  const GridSpec padded = GridSpec::centered(12.0, step, 2);
  const auto f = tabulate(padded, [](std::span<const double> x) {
    return (x[0] != 0.0) + (x[1] != 0.0) <= 1 ? 0.0 : kInf;
  });
  for (const double gamma : {0.5, 1.0, 2.0}) {
    const auto oracle = grid_s2(padded, f, gamma, inner);
    const VectorPenalty pen = VectorPenalty::card_cap(1, 2);
    double dev = 0.0;
    long idx = 0;
    Eigen::VectorXd x(2);
    for (long i = 0; i < inner.axis_size(0); ++i) {
      for (long j = 0; j < inner.axis_size(1); ++j, ++idx) {
        x << inner.point(0, i), inner.point(1, j);
        dev = std::max(dev, std::abs(s2_vector(pen, gamma, x) - oracle[static_cast<std::size_t>(idx)]));
      }
    }
    checks.push_back({"cardcap2d/gamma=" + format_double(gamma), dev, 0.1});
  }
  return checks;
}

std::vector<Check> suite_prox(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gam(0.25, 3.0);
  std::uniform_real_distribution<double> ratio(1.05, 10.0);
  std::uniform_real_distribution<double> ys(-3.0, 3.0);
  std::uniform_int_distribution<int> which(0, 2);
  double worst_scalar = 0.0, worst_vec = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const double gamma = gam(rng);
    const ProxParams p(gamma, gamma * ratio(rng));
    const int kind = which(rng);
    if (kind == 0) {
      const ScalarPenalty pen = ScalarPenalty::scaled_card(1.0);
      const double y = ys(rng);
      const double got = prox_s2(pen, p, y);
      const EnvelopeParams ep(gamma, pen);
      double best = kInf, best_x = 0.0;
      const double radius = std::sqrt(2.0 * s2_scalar(ep, y) / p.rho) + 2e-3;
      for (double x = y - radius; x <= y + radius; x += 1e-3) {
        const double v = s2_scalar(ep, x) + 0.5 * p.rho * (x - y) * (x - y);
        if (v < best) {
          best = v;
          best_x = x;
        }
      }
      worst_scalar = std::max(worst_scalar, std::abs(got - best_x));
    } else {
      const VectorPenalty pen =
          kind == 1 ? VectorPenalty::l0(1.0, 2) : VectorPenalty::card_cap(1, 2);
      Eigen::VectorXd y(2);
      y << ys(rng), ys(rng);
      const Eigen::VectorXd got = prox_s2(pen, p, y);
      const double radius = std::sqrt(2.0 * s2_vector(pen, gamma, y) / p.rho) + 0.02;
      Eigen::VectorXd x(2), best_x = y;
      double best = kInf;
      for (double x0 = y[0] - radius; x0 <= y[0] + radius; x0 += 0.01) {
        for (double x1 = y[1] - radius; x1 <= y[1] + radius; x1 += 0.01) {
          x << x0, x1;
          const double v = s2_vector(pen, gamma, x) + 0.5 * p.rho * (x - y).squaredNorm();
          if (v < best) {
            best = v;
            best_x = x;
          }
        }
      }
      worst_vec = std::max(worst_vec, (got - best_x).lpNorm<Eigen::Infinity>());
    }
  }
  return {{"prox-scalar-vs-grid", worst_scalar, 1.5e-3}, {"prox-2d-vs-grid", worst_vec, 1.5e-2}};
}

std::vector<Check> suite_regimes(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  double convexity_violation = 0.0;
  double surrogate_above_original = 0.0;
  double cm_certified_gap = 0.0;      // convex regime: certified => global optimum
  double mp_exhaustive_excess = 0.0;  // preserving regime: exhaustive point minimizes J_gamma
  double mp_local_drop = 0.0;         // preserving regime: certified => local minimizer of J
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4;
    Eigen::MatrixXd a(n + 1, n);
    for (int i = 0; i < n + 1; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    const OperatorNorms norms = operator_norms(a);
    Eigen::VectorXd d(n + 1);
    for (int i = 0; i < n + 1; ++i) d[i] = 1.5 * g(rng);
    const ExhaustiveResult ex = exhaustive_l0_minimizer(a, d, VectorPenalty::l0(0.7, n));
    SolverConfig cfg;
    cfg.tol = 1e-12;
    // Convex-minorant regime: gamma below the smallest squared singular value.
    if (norms.lower > 1e-6) {
      const double gamma = 0.8 * norms.lower;
      LeastSquaresProblem prob{a, d, VectorPenalty::l0(0.7, n), gamma};
      for (int pair = 0; pair < 500; ++pair) {
        Eigen::VectorXd x(n), y(n);
        for (int j = 0; j < n; ++j) {
          x[j] = 2.0 * g(rng);
          y[j] = 2.0 * g(rng);
        }
        const double lhs = objective_surrogate(prob, gamma, 0.5 * (x + y));
        const double rhs = 0.5 * objective_surrogate(prob, gamma, x) +
                           0.5 * objective_surrogate(prob, gamma, y);
        convexity_violation = std::max(convexity_violation, lhs - rhs);
        surrogate_above_original = std::max(
            surrogate_above_original, objective_surrogate(prob, gamma, x) - objective_original(prob, x));
      }
      const SolverReport rep = solve_fbs(prob, cfg);
      if (rep.certificate.certified) {
        cm_certified_gap = std::max(cm_certified_gap,
                                    std::abs(rep.objective_original - ex.objective));
      }
    }
    // Minimizer-preserving regime: the exhaustive optimum attains the lowest
    // surrogate value, certified outputs are local minimizers of J.
    LeastSquaresProblem prob{a, d, VectorPenalty::l0(0.7, n), std::nullopt};
    const SolverReport rep = solve_fbs(prob, cfg);
    prob.gamma = rep.gamma;
    mp_exhaustive_excess =
        std::max(mp_exhaustive_excess,
                 objective_surrogate(prob, rep.gamma, ex.x) - rep.objective_surrogate);
    if (rep.certificate.certified) {
      for (int probe = 0; probe < 200; ++probe) {
        Eigen::VectorXd nu(n);
        for (int j = 0; j < n; ++j) nu[j] = g(rng);
        nu.normalize();
        mp_local_drop = std::max(
            mp_local_drop, rep.objective_original - objective_original(prob, rep.x + 1e-3 * nu));
      }
    }
  }
  return {{"midpoint-convexity", convexity_violation, 1e-9},
          {"surrogate-below-original", surrogate_above_original, 1e-12},
          {"convex-certified-vs-exhaustive", cm_certified_gap, 1e-7},
          {"preserving-exhaustive-minimal", mp_exhaustive_excess, 1e-9},
          {"preserving-certified-local-min", mp_local_drop, 1e-9}};
}

std::vector<Check> suite_vonneumann(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> dim(1, 6);
  double violation = 0.0;
  double equality_dev = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const int m = dim(rng), n = dim(rng);
    Eigen::MatrixXd x(m, n), y(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        x(i, j) = g(rng);
        y(i, j) = g(rng);
      }
    const double lhs = (x.transpose() * y).trace();
    const double rhs = singular_values(x).dot(singular_values(y));
    violation = std::max(violation, lhs - rhs);
    // Shared singular vectors: reuse x's factors with y's spectrum.
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd shared =
        svd.matrixU() * singular_values(y).head(std::min(m, n)).asDiagonal() *
        svd.matrixV().transpose();
    const double pair = (x.transpose() * shared).trace();
    const double bound = singular_values(x).dot(singular_values(shared));
    equality_dev = std::max(equality_dev, std::abs(pair - bound));
  }
  return {{"trace-inequality", violation, 1e-10}, {"shared-vectors-equality", equality_dev, 1e-8}};
}

std::vector<Check> suite_hankel(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.08);
  double admm_minus_cadzow = -kInf;
  double triangle_dev = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 5;
    Eigen::VectorXd f(2 * n - 1);
    for (int j = 0; j < 2 * n - 1; ++j) f[j] = std::pow(0.85, j) + noise(rng);
    const Eigen::MatrixXd hd = hankel_embed(f);
    MatrixPriorProblem prob{hd, MatrixPenalty::rank_cap(1, n, n), 1.0, Prior::Hankel};
    SolverConfig cfg;
    cfg.tol = 1e-10;
    const MatrixSolverReport admm = solve_admm(prob, cfg);
    const MatrixSolverReport cadzow = solve_cadzow(prob, cfg);
    admm_minus_cadzow =
        std::max(admm_minus_cadzow, admm.objective_original - cadzow.objective_original);
    // Triangle identity on this instance.
    Eigen::VectorXd other(2 * n - 1);
    for (int j = 0; j < 2 * n - 1; ++j) other[j] = noise(rng);
    const double lhs = (hankel_embed(f) - hankel_embed(other)).squaredNorm();
    const Eigen::VectorXd tri = triangle_weights(n);
    double rhs = 0.0;
    for (int j = 0; j < 2 * n - 1; ++j) rhs += tri[j] * (f[j] - other[j]) * (f[j] - other[j]);
    triangle_dev = std::max(triangle_dev, std::abs(lhs - rhs));
  }
  return {{"admm-objective-below-cadzow", admm_minus_cadzow, 1e-9},
          {"triangle-weight-identity", triangle_dev, 1e-10}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadratic envelope toolbox"};
  app.require_subcommand(1);

  // envelope
  auto* envelope = app.add_subcommand("envelope", "tabulate penalties and their envelopes as CSV");
  std::string penalty_name = "card";
  double mu = 1.0, gamma = 1.0, d_value = 1.0;
  std::string range_str;
  std::string figure;
  std::string out_path;
  envelope->add_option("--penalty", penalty_name, "card or poscard")
      ->check(CLI::IsMember({"card", "poscard"}));
  envelope->add_option("--mu", mu, "penalty weight");
  envelope->add_option("--gamma", gamma, "curvature parameter");
  envelope->add_option("--range", range_str, "grid as lo:hi:step");
  envelope->add_option("--figure", figure, "intro, basic, fig1 or fig2");
  envelope->add_option("--d", d_value, "data point for the misfit curves");
  envelope->add_option("--out", out_path, "output CSV path (default stdout)");

  // solve
  auto* solve = app.add_subcommand("solve", "run a solver described by a problem JSON file");
  std::string problem_path, report_path, solution_path, iterates_path;
  solve->add_option("problem", problem_path, "problem JSON file")->required();
  solve->add_option("--report", report_path, "also write the report JSON here");
  solve->add_option("--solution", solution_path, "solution CSV path");
  solve->add_option("--iterates", iterates_path, "iterate log CSV path");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "run a verification battery");
  std::string suite;
  int trials = 0;  // 0: per-suite default (prox 200, vonneumann 1000)
  std::uint64_t seed = 0;
  std::string oracle_out;
  oracle->add_option("suite", suite, "envelopes, prox, regimes, vonneumann or hankel")->required();
  oracle->add_option("--trials", trials, "number of random trials");
  oracle->add_option("--seed", seed, "random seed");
  oracle->add_option("--out", oracle_out, "output JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (envelope->parsed()) {
      if (!figure.empty() && range_str.empty()) {
        range_str = figure == "fig2" ? "-1:4:0.001" : "-3:3:0.001";
      }
      if (figure == "fig2" && !envelope->count("--gamma")) gamma = 2.0;
      if (figure == "fig2" && !envelope->count("--d")) d_value = 2.0;
      if (figure == "fig1" && !envelope->count("--gamma")) gamma = 0.5;
      if (range_str.empty()) throw std::invalid_argument("missing --range");
      return run_envelope(penalty_name, mu, gamma, range_str, figure, d_value, out_path);
    }
    if (solve->parsed()) {
      return run_solve(problem_path, report_path, solution_path, iterates_path);
    }
    if (oracle->parsed()) {
      int exit_code = kExitUsage;
      if (suite == "envelopes") {
        finish_suite(suite, suite_envelopes(), oracle_out, exit_code);
      } else if (suite == "prox") {
        finish_suite(suite, suite_prox(trials > 0 ? trials : 200, seed), oracle_out, exit_code);
      } else if (suite == "regimes") {
        finish_suite(suite, suite_regimes(seed), oracle_out, exit_code);
      } else if (suite == "vonneumann") {
        finish_suite(suite, suite_vonneumann(trials > 0 ? trials : 1000, seed), oracle_out,
                     exit_code);
      } else if (suite == "hankel") {
        finish_suite(suite, suite_hankel(seed), oracle_out, exit_code);
      } else {
        std::cerr << "unknown suite '" << suite << "'\n";
        return kExitUsage;
      }
      return exit_code;
    }
  } catch (const RegimeViolation& e) {
    std::cerr << "regime violation: " << e.what() << '\n';
    return kExitRegime;
  } catch (const json::exception& e) {
    std::cerr << "problem file error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
