#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "wkbref/error.hpp"
#include "wkbref/potentials.hpp"
#include "wkbref/quadrature.hpp"

namespace wkbref {

enum class CorrectionSource { closed_form, direct_numeric, basic_well };

inline std::string to_string(CorrectionSource source) {
  switch (source) {
    case CorrectionSource::closed_form: return "closed_form";
    case CorrectionSource::direct_numeric: return "direct_numeric";
    case CorrectionSource::basic_well: return "basic_well";
  }
  return "unknown";
}

struct CorrectionSet {
  double eps = 0.0;
  double delta1 = 0.0;
  double delta_total = 0.0;
  double delta3 = 0.0;
  std::optional<double> gamma;
  CorrectionSource source = CorrectionSource::closed_form;
};

/// Resummed phase defect 2 d1 / (1 + sqrt(1 + 16 d1^2)); maps R onto (-1/2, 1/2).
inline double delta_from_delta1(double delta1) {
  if (std::isinf(delta1)) return std::copysign(0.5, delta1);
  // For huge |d1| the 16 d1^2 term overflows; the limit form is exact there.
  if (std::abs(delta1) > 1e150) return std::copysign(0.5, delta1) - 1.0 / (8.0 * delta1);
  return 2.0 * delta1 / (1.0 + std::sqrt(1.0 + 16.0 * delta1 * delta1));
}

inline double delta3_from_delta1(double delta1) { return -4.0 * delta1 * delta1 * delta1; }

/// First defect of U tanh^2(p x): constant in energy.
inline double delta1_basic(double U, double p, double beta) {
  require(U > 0.0 && p > 0.0 && beta > 0.0, "delta1_basic: U, p and beta must be positive");
  return -beta * p / (8.0 * std::sqrt(U));
}

/// Sign convention inside the one-parameter closed forms. `series_consistent`
/// is the form whose small-eps expansion reproduces the published series and
/// agrees with direct integration; `flipped` keeps the opposite inner sign and
/// exists for regression comparisons only.
enum class ClosedFormSigns { series_consistent, flipped };

struct Delta1Estimate {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

/// Widest gap between interpolation node energies around eps on either flank;
/// zero for models without nodes.
inline double node_energy_spacing(const PotentialModel& model, double eps) {
  const double root = std::sqrt(eps);
  double spacing = 0.0;
  for (const auto* breaks : {&model.s_breaks_plus, &model.s_breaks_minus}) {
    if (breaks->empty()) continue;
    const auto it = std::lower_bound(breaks->begin(), breaks->end(), root);
    const double hi = it == breaks->end() ? breaks->back() : *it;
    const double lo = it == breaks->begin() ? 0.0 : *(it - 1);
    spacing = std::max(spacing, hi * hi - lo * lo);
  }
  return spacing;
}

}  // namespace detail

/// Energy spacing used by the second-derivative stencil around eps. On
/// interpolated wells the step spans at least two node gaps.
inline double delta1_stencil_step(const PotentialModel& model, double eps) {
  const double room = model.finite() ? std::min(eps, model.height_U - eps) : eps;
  const double nodes = 2.0 * detail::node_energy_spacing(model, eps);
  return std::min(std::max(1e-3 * room, nodes), room / 4.5);
}

/// delta1 = (beta / 24 pi) d^2 W / d eps^2 with W from delta1_raw_integral,
/// using a five-point stencil at steps h and 2h combined by Richardson
/// extrapolation. All stencil points share one quadrature level so that W is
/// sampled as a smooth function of eps.
inline Delta1Estimate delta1_direct(const PotentialModel& model, double eps,
                                    const QuadratureOptions& opt = default_quadrature()) {
  require(std::isfinite(eps) && eps > 0.0, "delta1_direct: energy must be positive");
  require(eps < model.height_U, "delta1_direct: energy must lie below the well top");
  const double h = delta1_stencil_step(model, eps);
  require(h > 0.0 && eps - 4.0 * h > 0.0 && eps + 4.0 * h < model.height_U,
          "delta1_direct: no room for the difference stencil");

  const QuadResult centre = delta1_raw_integral(model, eps, opt);
  QuadratureOptions fixed = opt;
  fixed.fixed_level = std::min(centre.level + 1, opt.max_level);
  auto W = [&](double e) { return delta1_raw_integral(model, e, fixed).value; };

  const double w0 = W(eps);
  const std::array<int, 3> mult{1, 2, 4};
  std::array<double, 3> up{}, down{};
  for (std::size_t i = 0; i < mult.size(); ++i) {
    up[i] = W(eps + mult[i] * h);
    down[i] = W(eps - mult[i] * h);
  }
  auto stencil = [&](double f1p, double f1m, double f2p, double f2m, double step) {
    return (-(f2p + f2m) + 16.0 * (f1p + f1m) - 30.0 * w0) / (12.0 * step * step);
  };
  const double d_h = stencil(up[0], down[0], up[1], down[1], h);
  const double d_2h = stencil(up[1], down[1], up[2], down[2], 2.0 * h);
  const double d2W = d_h + (d_h - d_2h) / 15.0;

  // Rounding noise of the positive integrand propagated through the stencil.
  const double noise_W = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(w0);
  const double noise = (64.0 / 12.0) * noise_W / (h * h);
  const double scale = model.beta / (24.0 * std::numbers::pi);
  Delta1Estimate out{scale * d2W, scale * (std::abs(d_h - d_2h) / 15.0 + noise)};
  if (scale * noise > 1e-6 * std::max(1.0, std::abs(out.value)))
    throw NumericalError("corrections", "W(eps) too noisy for the difference stencil", eps);
  return out;
}

/// Closed first defect of the rational-slope reference well, for b = 0 or g = 0.
/// General (b, g) falls back to direct integration on the generated well.
inline double delta1_closed(const PadeParams& params, double beta, double eps,
                            ClosedFormSigns signs = ClosedFormSigns::series_consistent) {
  require(beta > 0.0, "delta1_closed: beta must be positive");
  require(std::isfinite(eps) && eps > 0.0, "delta1_closed: energy must be positive");
  require(params.c <= 0.0 || eps <= 1.0 / params.c, "delta1_closed: energy above the well top");
  const double flip = signs == ClosedFormSigns::series_consistent ? 1.0 : -1.0;
  const double lead = -beta * params.k / 8.0;
  if (params.b == 0.0) {
    const double base = 1.0 + flip * eps * params.g;
    require(base > 0.0, "delta1_closed: 1 + eps g must be positive");
    return lead * (params.c + params.g) / std::pow(base, 2.5);
  }
  if (params.g == 0.0) {
    const double b2 = params.b * params.b;
    const double base = 1.0 - flip * eps * b2;
    require(base > 0.0, "delta1_closed: 1 - eps b^2 must be positive");
    return lead * (params.c - b2) / std::pow(base, 2.5);
  }
  return delta1_direct(generate_from_pade(params, beta), eps).value;
}

/// Leading terms of the small-eps series of the closed forms.
inline double delta1_series(const PadeParams& p, double beta, double eps) {
  const double b2 = p.b * p.b;
  return -beta * p.k * (p.c + p.g - b2) / 8.0 +
         5.0 * beta * p.k * eps * (p.c * p.g + p.g * p.g + b2 * b2 - 3.0 * b2 * p.g - p.c * b2) / 16.0;
}

/// d delta1 / d eps of the closed forms.
inline double gamma_closed(const PadeParams& p, double beta, double eps) {
  const double lead = -beta * p.k / 8.0;
  if (p.b == 0.0) return lead * (p.c + p.g) * (-2.5 * p.g) / std::pow(1.0 + eps * p.g, 3.5);
  if (p.g == 0.0) {
    const double b2 = p.b * p.b;
    return lead * (p.c - b2) * (2.5 * b2) / std::pow(1.0 - eps * b2, 3.5);
  }
  throw PreconditionError("gamma_closed: no closed form when both b and g are nonzero");
}

/// d delta1 / d eps by central differences of delta1_direct. Zero certifies
/// membership in the exactly solvable family.
inline double gamma_diagnostic(const PotentialModel& model, double eps,
                               const QuadratureOptions& opt = default_quadrature()) {
  require(std::isfinite(eps) && eps > 0.0 && eps < model.height_U,
          "gamma_diagnostic: energy must lie inside the well");
  const double room = model.finite() ? std::min(eps, model.height_U - eps) : eps;
  const double h = 1e-2 * room;
  const double up = delta1_direct(model, eps + h, opt).value;
  const double down = delta1_direct(model, eps - h, opt).value;
  return (up - down) / (2.0 * h);
}

}  // namespace wkbref
