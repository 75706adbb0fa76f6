#pragma once

#include <limits>

namespace quadenv {

/// IEEE infinity, used as the explicit extended-real value. Arithmetic and
/// comparisons treat it as absorbing; no finite sentinel constants are used.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_finite_value(double v) { return v == v && v < kInf && v > -kInf; }

enum class ScalarKind {
  ScaledCard,  // mu * |x|_0
  PosCard,     // mu on (0, inf), 0 at 0, +inf on (-inf, 0)
};

struct ScalarPenalty {
  ScalarKind kind;
  double mu;

  static ScalarPenalty scaled_card(double mu);
  static ScalarPenalty pos_card(double mu);
};

/// Penalty value f(x). PosCard returns +inf for x < 0.
double scalar_penalty_value(const ScalarPenalty& p, double x);

/// Curvature parameter paired with a scalar penalty. Validates gamma > 0
/// and that the induced threshold sqrt(2*mu/gamma) is finite.
struct EnvelopeParams {
  double gamma;
  ScalarPenalty penalty;

  EnvelopeParams(double gamma, ScalarPenalty penalty);
};

/// First transform: sup_x -f(x) - (gamma/2)(x-y)^2. Always in (-inf, 0].
double s1_scalar(const EnvelopeParams& p, double y);

/// Second transform (quadratic envelope). Takes values in [0, f(x)];
/// +inf only for PosCard at x < 0. The clamp max(.,0) is applied before
/// squaring so the plateau value mu is hit exactly.
double s2_scalar(const EnvelopeParams& p, double x);

/// T = sqrt(2*mu/gamma); s2_scalar equals mu exactly for |x| >= T.
double scalar_threshold(const EnvelopeParams& p);

}  // namespace quadenv
