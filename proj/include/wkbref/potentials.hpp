#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wkbref/error.hpp"

namespace wkbref {

enum class PotentialKind { harmonic, tanh2, pade_generated, tabulated };

inline std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::harmonic: return "harmonic";
    case PotentialKind::tanh2: return "tanh2";
    case PotentialKind::pade_generated: return "pade";
    case PotentialKind::tabulated: return "tabulated";
  }
  return "unknown";
}

/// Coefficients of the rational slope ds/dx = k (1 - c s^2) / (1 + b s + g s^2),
/// with V = s^2. For a finite well c = 1/U; unbounded wells use c = 0.
struct PadeParams {
  double k = 1.0;
  double c = 0.0;
  double b = 0.0;
  double g = 0.0;

  double denominator(double s) const { return 1.0 + s * (b + g * s); }
  double sigma(double s) const { return k * (1.0 - c * s * s) / denominator(s); }
  bool has_finite_top() const { return c > 0.0; }
  double height() const {
    return c > 0.0 ? 1.0 / c : std::numeric_limits<double>::infinity();
  }
};

/// Smallest value of 1 + b s + g s^2 on [-half_width, half_width].
inline double min_denominator(const PadeParams& p, double half_width) {
  double m = std::min(p.denominator(-half_width), p.denominator(half_width));
  if (p.g != 0.0) {
    const double vertex = -p.b / (2.0 * p.g);
    if (std::abs(vertex) <= half_width) m = std::min(m, p.denominator(vertex));
  }
  return m;
}

/// Throws PreconditionError unless the parameters describe a well with a
/// positive slope everywhere in the physical s-interval [-sqrt(U), sqrt(U)].
inline void validate(const PadeParams& p) {
  require(std::isfinite(p.k) && p.k > 0.0, "pade: k must be positive");
  require(std::isfinite(p.c) && std::isfinite(p.b) && std::isfinite(p.g),
          "pade: coefficients must be finite");
  if (p.c > 0.0) {
    require(min_denominator(p, std::sqrt(1.0 / p.c)) > 0.0,
            "pade: denominator 1 + b s + g s^2 vanishes inside [-sqrt(U), sqrt(U)]");
  }
}

/// Evaluatable 1-D well with its sole minimum V(0) = 0.
///
/// Besides V(x) every model exposes its flank inverse x(s) of the signed map
/// s = sign(x) sqrt(V), and a weight from which 1/sigma = dx/ds is rebuilt
/// without cancellation near the top of a finite well:
///   finite wells:    flank_weight(s) = (U - s^2) / sigma(s)
///   unbounded wells: flank_weight(s) = 1 / sigma(s)
/// Both are smooth on the closed s-interval for the wells handled here.
struct PotentialModel {
  PotentialKind kind = PotentialKind::harmonic;
  double beta = 1.0;
  double curvature_k = 1.0;
  double height_U = std::numeric_limits<double>::infinity();
  double offset = 0.0;   // constant removed from the raw input at load time
  double x_shift = 0.0;  // raw position of the minimum
  bool symmetric = false;
  double x_min = -std::numeric_limits<double>::infinity();
  double x_max = std::numeric_limits<double>::infinity();

  std::function<double(double)> value;
  std::function<double(double)> slope;
  std::function<double(double)> x_of_s;
  std::function<double(double)> flank_weight;

  /// |s| values where the flank is only once differentiable (interpolation
  /// nodes), ascending; quadrature splits there.
  std::vector<double> s_breaks_plus;
  std::vector<double> s_breaks_minus;

  /// Present when the model is itself a rational-slope reference well.
  std::optional<PadeParams> pade;

  double evaluate(double x) const { return value(x); }
  double raw_value(double x) const { return value(x) + offset; }
  bool finite() const { return std::isfinite(height_U); }

  /// dx/ds at s, given the exact gap U - s^2 (unused for unbounded wells).
  double inv_sigma(double s, double top_gap) const {
    const double w = flank_weight(s);
    return finite() ? w / top_gap : w;
  }
};

inline PotentialModel make_harmonic(double kcoef, double beta) {
  require(kcoef > 0.0 && std::isfinite(kcoef), "harmonic: k must be positive");
  require(beta > 0.0 && std::isfinite(beta), "harmonic: beta must be positive");
  PotentialModel m;
  m.kind = PotentialKind::harmonic;
  m.beta = beta;
  m.curvature_k = kcoef;
  m.symmetric = true;
  const double k2 = kcoef * kcoef;
  m.value = [k2](double x) { return k2 * x * x; };
  m.slope = [k2](double x) { return 2.0 * k2 * x; };
  m.x_of_s = [kcoef](double s) { return s / kcoef; };
  m.flank_weight = [kcoef](double) { return 1.0 / kcoef; };
  m.pade = PadeParams{kcoef, 0.0, 0.0, 0.0};
  return m;
}

/// V = U t^2 (1 + a t^2) with t = tanh(p x). a = 0 is the basic well; a != 0
/// leaves the exactly solvable family while keeping closed-form flanks.
inline PotentialModel make_tanh2_well(double U, double p, double beta, double perturbation = 0.0) {
  require(U > 0.0 && std::isfinite(U), "tanh2: U must be positive");
  require(p > 0.0 && std::isfinite(p), "tanh2: p must be positive");
  require(beta > 0.0 && std::isfinite(beta), "tanh2: beta must be positive");
  require(perturbation > -0.5 && std::isfinite(perturbation),
          "tanh2: perturbation must exceed -1/2 to keep the flanks monotone");
  const double a = perturbation;
  const double rootU = std::sqrt(U);

  PotentialModel m;
  m.kind = PotentialKind::tanh2;
  m.beta = beta;
  m.curvature_k = p * rootU;
  m.height_U = U * (1.0 + a);
  m.symmetric = true;
  m.value = [U, p, a](double x) {
    const double t2 = std::pow(std::tanh(p * x), 2);
    return U * t2 * (1.0 + a * t2);
  };
  m.slope = [U, p, a](double x) {
    const double t = std::tanh(p * x);
    return U * p * (1.0 - t * t) * (2.0 * t + 4.0 * a * t * t * t);
  };
  m.x_of_s = [U, p, a](double s) {
    const double v = s * s / U;
    const double t2 = 2.0 * v / (1.0 + std::sqrt(1.0 + 4.0 * a * v));
    return std::copysign(std::atanh(std::sqrt(t2)), s) / p;
  };
  m.flank_weight = [U, p, a, rootU](double s) {
    const double v = s * s / U;
    const double t2 = 2.0 * v / (1.0 + std::sqrt(1.0 + 4.0 * a * v));
    return rootU * (1.0 + a + a * t2) * std::sqrt(1.0 + a * t2) / (p * (1.0 + 2.0 * a * t2));
  };
  if (a == 0.0) m.pade = PadeParams{p * rootU, 1.0 / U, 0.0, 0.0};
  return m;
}

namespace detail {

/// Closed-form x(s) = (1/k) int_0^s (1 + b t + g t^2) / (1 - c t^2) dt for c > 0.
inline double pade_position(const PadeParams& p, double s) {
  const double rc = std::sqrt(p.c);
  if (rc * std::abs(s) >= 1.0) return std::copysign(std::numeric_limits<double>::infinity(), s);
  const double lead = (1.0 + p.g / p.c) * std::atanh(rc * s) / rc;
  const double linear = -(p.g / p.c) * s;
  const double log_term = -(p.b / (2.0 * p.c)) * std::log1p(-p.c * s * s);
  return (lead + linear + log_term) / p.k;
}

/// Monotone inversion of x(s) backed by a (s, x) table.
class PadeInverter {
 public:
  static constexpr int kTableSize = 4096;

  explicit PadeInverter(const PadeParams& p) : p_(p), top_(std::sqrt(1.0 / p.c)) {
    // s = top * tanh(u) crowds the nodes toward the flanks, where x(s) grows
    // logarithmically.
    constexpr double u_max = 16.0;
    s_.resize(kTableSize);
    x_.resize(kTableSize);
    for (int i = 0; i < kTableSize; ++i) {
      const double u = -u_max + 2.0 * u_max * i / (kTableSize - 1);
      s_[i] = top_ * std::tanh(u);
      x_[i] = pade_position(p_, s_[i]);
    }
  }

  double s_of_x(double x) const {
    if (x == 0.0) return 0.0;
    double lo, hi;
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    if (it == x_.begin()) {
      lo = -top_;
      hi = s_.front();
    } else if (it == x_.end()) {
      lo = s_.back();
      hi = top_;
    } else {
      const auto i = static_cast<std::size_t>(it - x_.begin());
      lo = s_[i - 1];
      hi = s_[i];
    }
    // Bisection until the bracket is tight, then Newton on dx/ds.
    for (int it_b = 0; it_b < 200 && hi - lo > 1e-9 * top_; ++it_b) {
      const double mid = 0.5 * (lo + hi);
      if (pade_position(p_, mid) < x) lo = mid; else hi = mid;
    }
    double s = 0.5 * (lo + hi);
    for (int it_n = 0; it_n < 8; ++it_n) {
      const double step = (pade_position(p_, s) - x) * p_.sigma(s);
      double next = s - step;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - s) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(s)) {
        s = next;
        break;
      }
      if (pade_position(p_, next) < x) lo = next; else hi = next;
      s = next;
    }
    return s;
  }

  const std::vector<double>& s_table() const { return s_; }
  const std::vector<double>& x_table() const { return x_; }

 private:
  PadeParams p_;
  double top_;
  std::vector<double> s_;
  std::vector<double> x_;
};

}  // namespace detail

/// Builds the finite well whose slope in s = sign(x) sqrt(V) is the rational
/// form of `params`.
inline PotentialModel generate_from_pade(const PadeParams& params, double beta) {
  require(beta > 0.0 && std::isfinite(beta), "pade: beta must be positive");
  require(params.c > 0.0, "pade: c must be positive (finite well)");
  validate(params);
  auto inverter = std::make_shared<const detail::PadeInverter>(params);

  PotentialModel m;
  m.kind = PotentialKind::pade_generated;
  m.beta = beta;
  m.curvature_k = params.k;
  m.height_U = 1.0 / params.c;
  m.symmetric = params.b == 0.0;
  m.pade = params;
  m.value = [inverter](double x) {
    const double s = inverter->s_of_x(x);
    return s * s;
  };
  m.slope = [inverter, params](double x) {
    const double s = inverter->s_of_x(x);
    return 2.0 * s * params.sigma(s);
  };
  m.x_of_s = [params](double s) { return detail::pade_position(params, s); };
  m.flank_weight = [params](double s) { return params.denominator(s) / (params.k * params.c); };
  return m;
}

/// Signed square-root map s(x) = sign(x) sqrt(V(x)).
inline double s_map(const PotentialModel& model, double x) {
  return std::copysign(std::sqrt(std::max(0.0, model.evaluate(x))), x);
}

struct TurningPoints {
  double x_minus;
  double x_plus;
};

namespace detail {

inline double flank_crossing(const PotentialModel& model, double eps, double direction) {
  const double edge = direction > 0 ? model.x_max : model.x_min;
  double inner = 0.0;
  double outer = direction * std::sqrt(eps) / model.curvature_k;
  int expansions = 0;
  while (model.evaluate(outer) < eps) {
    inner = outer;
    outer *= 2.0;
    if (direction * outer >= direction * edge) {
      outer = edge;
      if (!(model.evaluate(outer) >= eps))
        throw PreconditionError("turning_points: energy " + std::to_string(eps) +
                                " is not enclosed by the potential domain");
      break;
    }
    if (++expansions > 1100) throw PreconditionError("turning_points: no crossing found");
  }
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (inner + outer);
    if (mid == inner || mid == outer) break;
    if (model.evaluate(mid) < eps) inner = mid; else outer = mid;
  }
  // Return whichever bracket end has the smaller residual.
  const double ri = std::abs(model.evaluate(inner) - eps);
  const double ro = std::abs(model.evaluate(outer) - eps);
  return ri < ro ? inner : outer;
}

}  // namespace detail

inline TurningPoints turning_points(const PotentialModel& model, double eps) {
  require(eps > 0.0, "turning_points: energy must be positive");
  require(eps < model.height_U, "turning_points: energy at or above the well top has no bound turning points");
  return {detail::flank_crossing(model, eps, -1.0), detail::flank_crossing(model, eps, +1.0)};
}

}  // namespace wkbref
