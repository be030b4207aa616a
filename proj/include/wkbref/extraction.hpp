#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "wkbref/error.hpp"
#include "wkbref/potentials.hpp"
#include "wkbref/quadrature.hpp"

namespace wkbref {

struct ExtractionReport {
  PadeParams params;
  double eps_used = 0.0;
  double phi_plus = 0.0;
  double phi_minus = 0.0;
  double residual_b = 0.0;  // propagated quadrature error of each coefficient
  double residual_g = 0.0;
  std::optional<double> adiabaticity;
  bool valid = true;
  /// params with coefficients indistinguishable from zero set to zero.
  PadeParams reference;
  /// Both b and g nonzero: no closed delta1 exists, corrections go direct.
  bool needs_direct_delta1 = false;
};

namespace detail {

/// Coefficients below this relative size are quadrature noise and treated as zero.
constexpr double kNegligibleCoefficient = 1e-9;

inline void finish_report(ExtractionReport& r, double U) {
  auto clean = [](double v, double unit, double residual) {
    return std::abs(v) * unit <= std::max(kNegligibleCoefficient, 10.0 * residual * unit) ? 0.0 : v;
  };
  const double rootU = std::sqrt(U);
  const double b_clean = clean(r.params.b, rootU, r.residual_b);
  const double g_clean = clean(r.params.g, U, r.residual_g);
  r.reference = r.params;
  r.reference.b = b_clean;
  r.reference.g = g_clean;
  r.needs_direct_delta1 = b_clean != 0.0 && g_clean != 0.0;
  r.valid = std::isfinite(r.params.b) && std::isfinite(r.params.g) && min_denominator(r.params, rootU) > 0.0;
}

}  // namespace detail

/// Which sign the bracket of the density-based c formula carries.
/// `standard` reproduces c = 1/U on the basic well; `flipped` is kept only to
/// document the opposite sign convention.
enum class DensityCSign { standard, flipped };

/// c = {1 - [1 / (2 k beta dPhi/deps)]^2} / eps, assuming g = 0.
inline double extract_c_from_density(const PotentialModel& model, double eps,
                                     DensityCSign sign = DensityCSign::standard,
                                     const QuadratureOptions& opt = default_quadrature()) {
  require(eps > 0.0 && eps < model.height_U, "extract_c_from_density: energy must lie inside the well");
  const QuadResult dphi = phase_derivative(model, eps, opt);
  if (!(dphi.value > 0.0)) throw NumericalError("extraction", "non-positive dPhi/deps", eps);
  const double ratio = 1.0 / (2.0 * model.curvature_k * model.beta * dphi.value);
  const double bracket = 1.0 - ratio * ratio;
  return (sign == DensityCSign::standard ? bracket : -bracket) / eps;
}

/// |eps dc/deps| / |c| at one energy; empty where c vanishes.
inline std::optional<double> adiabaticity_at(const PotentialModel& model, double eps,
                                             const QuadratureOptions& opt = default_quadrature()) {
  const double c = extract_c_from_density(model, eps, DensityCSign::standard, opt);
  if (std::abs(c) * eps < 1e-9) return std::nullopt;
  const double room = model.finite() ? std::min(eps, model.height_U - eps) : eps;
  const double h = 1e-2 * room;
  const double up = extract_c_from_density(model, eps + h, DensityCSign::standard, opt);
  const double down = extract_c_from_density(model, eps - h, DensityCSign::standard, opt);
  return std::abs(eps * (up - down) / (2.0 * h)) / std::abs(c);
}

/// Chebyshev points of the first kind mapped to [lo, hi], ascending.
inline std::vector<double> chebyshev_grid(double lo, double hi, int count) {
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double theta = std::numbers::pi * (2.0 * (count - 1 - i) + 1.0) / (2.0 * count);
    grid[static_cast<std::size_t>(i)] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * std::cos(theta);
  }
  return grid;
}

inline std::vector<double> default_adiabaticity_grid(const PotentialModel& model) {
  require(model.finite(), "adiabaticity: default grid needs a finite well");
  return chebyshev_grid(0.1 * model.height_U, 0.9 * model.height_U, 9);
}

/// |eps dc/deps| / |c| per grid point, with c from the density formula.
/// Points where c vanishes report no value.
inline std::vector<std::optional<double>> adiabaticity_check(const PotentialModel& model,
                                                             const std::vector<double>& eps_grid,
                                                             const QuadratureOptions& opt = default_quadrature()) {
  require(eps_grid.size() >= 3, "adiabaticity: at least three energies are required");
  for (double e : eps_grid)
    require(e > 0.0 && e < model.height_U, "adiabaticity: grid must lie inside (0, U)");
  std::vector<std::optional<double>> ratios;
  ratios.reserve(eps_grid.size());
  for (double eps : eps_grid) ratios.push_back(adiabaticity_at(model, eps, opt));
  return ratios;
}

/// Recovers b and g from the half phase integrals at the well top, where
///   g = 2 beta k Phi(U) / U^2 - 2 / U,  b = pi beta k (Phi+ - Phi-) / (2 U^(3/2)).
inline ExtractionReport extract_at_top(const PotentialModel& model,
                                       const QuadratureOptions& opt = default_quadrature()) {
  require(model.finite(), "extract: the well has no finite top; use the density-based c extraction instead");
  const double U = model.height_U;
  const double k = model.curvature_k;
  const double beta = model.beta;
  const PhaseSplit split = phase_integral(model, U, opt);

  ExtractionReport r;
  r.eps_used = U;
  r.phi_plus = split.phi_plus;
  r.phi_minus = split.phi_minus;
  r.params.k = k;
  r.params.c = 1.0 / U;
  r.params.g = 2.0 * beta * k * split.phi_total / (U * U) - 2.0 / U;
  r.params.b = std::numbers::pi * beta * k * (split.phi_plus - split.phi_minus) / (2.0 * std::pow(U, 1.5));
  r.residual_g = 2.0 * beta * k * split.error / (U * U);
  r.residual_b = std::numbers::pi * beta * k * split.error / (2.0 * std::pow(U, 1.5));
  detail::finish_report(r, U);
  return r;
}

/// Solves the two moment equations at an interior energy:
///   Phi+ + Phi- = (2 / pi beta k)(I0 + g I2),  Phi+ - Phi- = (2 b / pi beta k) J1.
inline ExtractionReport extract_at_energy(const PotentialModel& model, double eps,
                                          const QuadratureOptions& opt = default_quadrature()) {
  require(model.finite(), "extract: the well has no finite top; use the density-based c extraction instead");
  require(eps > 0.0 && eps <= model.height_U, "extract_at_energy: energy must lie in (0, U]");
  const double U = model.height_U;
  const double k = model.curvature_k;
  const double beta = model.beta;
  const double c = 1.0 / U;
  const PhaseSplit split = phase_integral(model, eps, opt);
  const MomentIntegrals m = moment_integrals(c, eps, opt);
  if (m.I2 < 1e-14 || m.J1 < 1e-14)
    throw NumericalError("extraction", "degenerate moment system near eps = 0", eps);

  const double scale = std::numbers::pi * beta * k / 2.0;
  ExtractionReport r;
  r.eps_used = eps;
  r.phi_plus = split.phi_plus;
  r.phi_minus = split.phi_minus;
  r.params.k = k;
  r.params.c = c;
  r.params.g = (scale * split.phi_total - m.I0) / m.I2;
  r.params.b = scale * (split.phi_plus - split.phi_minus) / m.J1;
  r.residual_g = (scale * split.error + m.error) / m.I2 + std::abs(r.params.g) * m.error / m.I2;
  r.residual_b = scale * split.error / m.J1 + std::abs(r.params.b) * m.error / m.J1;
  detail::finish_report(r, U);
  if (eps < U) {
    r.adiabaticity = adiabaticity_at(model, eps, opt);
  }
  return r;
}

}  // namespace wkbref
