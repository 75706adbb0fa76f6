#include "quadenv/penalty.hpp"

#include <cmath>
#include <stdexcept>

namespace quadenv {

namespace {

void require_finite(double v, const char* what) {
  if (!is_finite_value(v)) {
    throw std::domain_error(std::string("non-finite ") + what);
  }
}

}  // namespace

ScalarPenalty ScalarPenalty::scaled_card(double mu) {
  if (!(mu > 0.0) || !is_finite_value(mu)) {
    throw std::invalid_argument("ScaledCard: mu must be positive and finite");
  }
  return {ScalarKind::ScaledCard, mu};
}

ScalarPenalty ScalarPenalty::pos_card(double mu) {
  if (!(mu > 0.0) || !is_finite_value(mu)) {
    throw std::invalid_argument("PosCard: mu must be positive and finite");
  }
  return {ScalarKind::PosCard, mu};
}

double scalar_penalty_value(const ScalarPenalty& p, double x) {
  require_finite(x, "x");
  switch (p.kind) {
    case ScalarKind::ScaledCard:
      return x == 0.0 ? 0.0 : p.mu;
    case ScalarKind::PosCard:
      if (x < 0.0) return kInf;
      return x == 0.0 ? 0.0 : p.mu;
  }
  throw std::logic_error("unreachable");
}

EnvelopeParams::EnvelopeParams(double gamma_, ScalarPenalty penalty_)
    : gamma(gamma_), penalty(penalty_) {
  if (!(gamma > 0.0) || !is_finite_value(gamma)) {
    throw std::invalid_argument("EnvelopeParams: gamma must be positive and finite");
  }
  const double t = std::sqrt(2.0 * penalty.mu / gamma);
  if (!(t > 0.0) || !is_finite_value(t)) {
    throw std::invalid_argument("EnvelopeParams: threshold sqrt(2*mu/gamma) not finite");
  }
}

double s1_scalar(const EnvelopeParams& p, double y) {
  require_finite(y, "y");
  const double mu = p.penalty.mu;
  switch (p.penalty.kind) {
    case ScalarKind::ScaledCard:
      return -std::min(0.5 * p.gamma * y * y, mu);
    case ScalarKind::PosCard: {
      // -(min(sqrt(gamma)*y/sqrt(2), sqrt(mu)))^2; for y < 0 the min picks the
      // negative branch whose square is gamma*y^2/2.
      const double m = std::min(std::sqrt(p.gamma) * y / std::sqrt(2.0), std::sqrt(mu));
      return -(m * m);
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

// mu - (max(sqrt(mu) - s, 0))^2 expanded as s*(2*sqrt(mu) - s) below the
// clamp; avoids the mu - mu cancellation so the envelope is exactly 0 at the
// origin and exactly mu on the plateau.
double clamped_parabola(double mu, double s) {
  const double root_mu = std::sqrt(mu);
  if (s >= root_mu) return mu;
  return s * (2.0 * root_mu - s);
}

}  // namespace

double s2_scalar(const EnvelopeParams& p, double x) {
  require_finite(x, "x");
  const double mu = p.penalty.mu;
  switch (p.penalty.kind) {
    case ScalarKind::ScaledCard:
      return clamped_parabola(mu, std::sqrt(p.gamma) * std::abs(x) / std::sqrt(2.0));
    case ScalarKind::PosCard: {
      if (x < 0.0) return kInf;
      return clamped_parabola(mu, std::sqrt(p.gamma) * x / std::sqrt(2.0));
    }
  }
  throw std::logic_error("unreachable");
}

double scalar_threshold(const EnvelopeParams& p) {
  return std::sqrt(2.0 * p.penalty.mu / p.gamma);
}

}  // namespace quadenv
