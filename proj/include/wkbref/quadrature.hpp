#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wkbref/error.hpp"
#include "wkbref/potentials.hpp"

namespace wkbref {

struct QuadratureOptions {
  int min_level = 4;
  int max_level = 12;
  double tolerance = 1e-11;  // absolute and relative, whichever is larger
  int fixed_level = -1;      // >= 0 evaluates exactly that level, no refinement
};

/// Tolerance override for experiments; reads WKB_QUAD_TOL once.
inline QuadratureOptions default_quadrature() {
  static const QuadratureOptions opts = [] {
    QuadratureOptions o;
    if (const char* env = std::getenv("WKB_QUAD_TOL")) {
      char* end = nullptr;
      const double tol = std::strtod(env, &end);
      if (end != env && std::isfinite(tol) && tol > 0.0) o.tolerance = tol;
    }
    return o;
  }();
  return opts;
}

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  int level = 0;
};

/// Double-exponential (tanh-sinh) quadrature of f over [a, b].
///
/// The integrand is called as f(x, dist_lo, dist_hi) where dist_lo = x - a and
/// dist_hi = b - x are computed from the transformation itself, so they stay
/// accurate at nodes that crowd an endpoint closer than x can resolve.
template <class F>
QuadResult tanh_sinh(F&& f, double a, double b, const QuadratureOptions& opt = default_quadrature()) {
  constexpr double t_max = 6.0;  // node distances stay above ~1e-275 (b - a)
  constexpr double half_pi = std::numbers::pi / 2.0;
  const double width = b - a;
  if (width == 0.0) return {};

  auto node = [&](double t) {
    const double u = half_pi * std::sinh(t);
    const double e = std::exp(-2.0 * std::abs(u));
    const double near = width * e / (1.0 + e);  // distance to the closer endpoint
    const double far = width - near;
    const double w = half_pi * std::cosh(t) * 4.0 * e / ((1.0 + e) * (1.0 + e)) * (width / 2.0);
    if (near == 0.0 || w == 0.0) return 0.0;
    const double val = t < 0 ? f(a + near, near, far) : (t > 0 ? f(b - near, far, near) : f(a + near, near, far));
    return w * val;
  };

  auto level_sum = [&](double h, bool only_new) {
    double sum = 0.0;
    const long n = static_cast<long>(std::llround(t_max / h));
    const long stride = only_new ? 2 : 1;
    const long start = only_new ? 1 : 0;
    for (long j = start; j <= n; j += stride) {
      const double t = j * h;
      if (j == 0) {
        sum += node(0.0);
      } else {
        sum += node(t) + node(-t);
      }
    }
    return sum;
  };

  if (opt.fixed_level >= 0) {
    const double h = std::ldexp(1.0, -opt.fixed_level);
    return {h * level_sum(h, false), 0.0, opt.fixed_level};
  }

  double h = 1.0;
  double raw = level_sum(h, false);
  double previous = h * raw;
  double current = previous;
  double err = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= opt.max_level; ++level) {
    h *= 0.5;
    raw += level_sum(h, true);
    current = h * raw;
    err = std::abs(current - previous);
    if (!std::isfinite(current))
      throw NumericalError("quadrature", "non-finite integrand value");
    if (level >= opt.min_level && err <= std::max(opt.tolerance, opt.tolerance * std::abs(current)))
      return {current, err, level};
    previous = current;
  }
  char msg[96];
  std::snprintf(msg, sizeof msg, "no convergence after level %d, achieved error %.3g", opt.max_level, err);
  throw NumericalError("quadrature", msg);
}

/// Phase integral split at x = 0: Phi = (1/(pi beta)) int sqrt(eps - V) dx.
struct PhaseSplit {
  double eps = 0.0;
  double phi_plus = 0.0;
  double phi_minus = 0.0;
  double phi_total = 0.0;
  double error = 0.0;
};

namespace detail {

inline void check_bound_energy(const PotentialModel& model, double eps, const char* who) {
  require(std::isfinite(eps) && eps > 0.0, std::string(who) + ": energy must be positive");
  require(eps <= model.height_U, std::string(who) + ": energy above the well top");
}

/// Integrates g(s, eps - s^2, 1/sigma) over one flank s in [0, sqrt(eps)] in
/// the variable |s|; side selects the flank. Models with breakpoints are
/// integrated piece by piece.
template <class G>
QuadResult flank_integral(const PotentialModel& model, double eps, int side, G&& g,
                          const QuadratureOptions& opt) {
  const double root = std::sqrt(eps);
  const double above = model.finite() ? model.height_U - eps : 0.0;
  auto piece = [&](double lo, double hi, const QuadratureOptions& o) {
    const double hi_gap = root - hi;
    auto integrand = [&](double s, double, double dist_hi) {
      const double gap = (hi_gap + dist_hi) * (root + s);  // eps - s^2 without cancellation
      const double inv_sigma = model.inv_sigma(side * s, above + gap);
      return g(s, gap, inv_sigma);
    };
    return tanh_sinh(integrand, lo, hi, o);
  };
  try {
    const auto& breaks = side > 0 ? model.s_breaks_plus : model.s_breaks_minus;
    if (breaks.empty()) return piece(0.0, root, opt);
    QuadratureOptions sub = opt;
    sub.min_level = std::min(opt.min_level, 2);
    QuadResult total;
    double lo = 0.0;
    auto add = [&](double hi) {
      const QuadResult r = piece(lo, hi, sub);
      total.value += r.value;
      total.error += r.error;
      total.level = std::max(total.level, r.level);
      lo = hi;
    };
    // Pieces away from the turning point are smooth on their closed interval;
    // one Gauss-Kronrod pass suffices unless its own estimate says otherwise.
    auto add_interior = [&](double hi) {
      const double hi_gap = root - hi;
      auto integrand = [&](double s) {
        const double gap = (hi_gap + (hi - s)) * (root + s);
        return g(s, gap, model.inv_sigma(side * s, above + gap));
      };
      double err = 0.0;
      const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, lo, hi, 0, 0.0, &err);
      if (std::isfinite(value) && err <= std::max(opt.tolerance, opt.tolerance * std::abs(value))) {
        total.value += value;
        total.error += err;
        lo = hi;
      } else {
        add(hi);
      }
    };
    for (double b : breaks) {
      if (b >= root) break;
      if (b > lo) add_interior(b);
    }
    add(root);
    return total;
  } catch (const NumericalError& e) {
    if (e.energy() != NumericalError::kNoEnergy) throw;
    throw NumericalError(e.module(), e.detail(), eps);
  }
}

}  // namespace detail

/// Phi^+, Phi^- and their sum at eps, valid up to and including eps = U for
/// finite wells.
inline PhaseSplit phase_integral(const PotentialModel& model, double eps,
                                 const QuadratureOptions& opt = default_quadrature()) {
  detail::check_bound_energy(model, eps, "phase_integral");
  const double scale = 1.0 / (std::numbers::pi * model.beta);
  auto g = [](double, double gap, double inv_sigma) { return std::sqrt(gap) * inv_sigma; };
  const QuadResult plus = detail::flank_integral(model, eps, +1, g, opt);
  PhaseSplit split;
  split.eps = eps;
  split.phi_plus = scale * plus.value;
  if (model.symmetric) {
    split.phi_minus = split.phi_plus;
    split.error = 2.0 * scale * plus.error;
  } else {
    const QuadResult minus = detail::flank_integral(model, eps, -1, g, opt);
    split.phi_minus = scale * minus.value;
    split.error = scale * (plus.error + minus.error);
  }
  split.phi_total = split.phi_plus + split.phi_minus;
  return split;
}

/// dPhi/deps = (1/(2 pi beta)) int dx / sqrt(eps - V), for 0 < eps < U.
inline QuadResult phase_derivative(const PotentialModel& model, double eps,
                                   const QuadratureOptions& opt = default_quadrature()) {
  detail::check_bound_energy(model, eps, "phase_derivative");
  require(eps < model.height_U, "phase_derivative: diverges at the well top");
  const double scale = 1.0 / (2.0 * std::numbers::pi * model.beta);
  auto g = [](double, double gap, double inv_sigma) { return inv_sigma / std::sqrt(gap); };
  const QuadResult plus = detail::flank_integral(model, eps, +1, g, opt);
  const QuadResult minus = model.symmetric ? plus : detail::flank_integral(model, eps, -1, g, opt);
  return {scale * (plus.value + minus.value), scale * (plus.error + minus.error),
          std::max(plus.level, minus.level)};
}

/// Half-interval moments with the reference weight 1 / (1 - c s^2):
///   I0 = int_0^sqrt(eps) sqrt(eps - s^2) / (1 - c s^2) ds
///   I2 = int_0^sqrt(eps) s^2 sqrt(eps - s^2) / (1 - c s^2) ds
///   J1 = int_0^sqrt(eps) s sqrt(eps - s^2) / (1 - c s^2) ds
struct MomentIntegrals {
  double I0 = 0.0;
  double I2 = 0.0;
  double J1 = 0.0;
  double error = 0.0;
};

inline MomentIntegrals moment_integrals(double c, double eps,
                                        const QuadratureOptions& opt = default_quadrature()) {
  require(std::isfinite(eps) && eps > 0.0, "moment_integrals: energy must be positive");
  require(std::isfinite(c), "moment_integrals: c must be finite");
  // At eps = 1/c the weight is singular at the endpoint and the gap to the top
  // is taken as zero exactly.
  const bool at_top = c > 0.0 && std::abs(c * eps - 1.0) <= 1e-12;
  require(at_top || c * eps < 1.0, "moment_integrals: 1 - c s^2 vanishes inside (0, sqrt(eps))");
  const double root = std::sqrt(eps);
  const double above = at_top ? 0.0 : (c > 0.0 ? 1.0 / c - eps : 0.0);

  auto weight = [&](double s, double gap) {
    // sqrt(eps - s^2) / (1 - c s^2)
    if (c > 0.0) return std::sqrt(gap) / (c * (above + gap));
    return std::sqrt(gap) / (1.0 - c * s * s);
  };
  auto make = [&](int power) {
    return [&, power](double s, double, double dist_hi) {
      const double gap = dist_hi * (root + s);
      return std::pow(s, power) * weight(s, gap);
    };
  };
  const QuadResult i0 = tanh_sinh(make(0), 0.0, root, opt);
  const QuadResult i2 = tanh_sinh(make(2), 0.0, root, opt);
  const QuadResult j1 = tanh_sinh(make(1), 0.0, root, opt);
  return {i0.value, i2.value, j1.value, i0.error + i2.error + j1.error};
}

/// W(eps) = int (dV/dx)^2 / sqrt(eps - V) dx between the turning points.
/// In the root variable s this is int 4 s^2 sigma(s) / sqrt(eps - s^2) ds.
inline QuadResult delta1_raw_integral(const PotentialModel& model, double eps,
                                      const QuadratureOptions& opt = default_quadrature()) {
  detail::check_bound_energy(model, eps, "delta1_raw_integral");
  require(eps < model.height_U, "delta1_raw_integral: energy must lie below the well top");
  auto g = [](double s, double gap, double inv_sigma) { return 4.0 * s * s / (inv_sigma * std::sqrt(gap)); };
  const QuadResult plus = detail::flank_integral(model, eps, +1, g, opt);
  const QuadResult minus = model.symmetric ? plus : detail::flank_integral(model, eps, -1, g, opt);
  return {plus.value + minus.value, plus.error + minus.error, std::max(plus.level, minus.level)};
}

}  // namespace wkbref
