#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wkbref/error.hpp"
#include "wkbref/potentials.hpp"

namespace wkbref {

/// Finite-difference discretization of -beta^2 psi'' + V psi = eps psi on
/// [-L, L] with Dirichlet ends; grid_points counts both boundary nodes.
struct OracleConfig {
  double halfwidth = 15.0;
  int grid_points = 4001;
  /// Eigenvalues at or above this are discarded; NaN selects the well top.
  double energy_cutoff = std::numeric_limits<double>::quiet_NaN();
  /// Bisection tolerance; NaN selects 1e-10 * max(1, cutoff).
  double tolerance = std::numeric_limits<double>::quiet_NaN();
};

/// Symmetric tridiagonal matrix with constant off-diagonal.
struct Tridiagonal {
  std::vector<double> diagonal;
  double off_diagonal = 0.0;

  /// Number of eigenvalues strictly below lambda (Sturm sequence count).
  int count_below(double lambda) const {
    const double e2 = off_diagonal * off_diagonal;
    const double tiny = std::numeric_limits<double>::min() * 1e4;
    int count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < diagonal.size(); ++i) {
      q = diagonal[i] - lambda - (i == 0 ? 0.0 : e2 / q);
      if (q == 0.0) q = -tiny;
      if (q < 0.0) ++count;
    }
    return count;
  }

  /// The index-th smallest eigenvalue in [lo, hi] by bisection.
  double eigenvalue(int index, double lo, double hi, double tol) const {
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if (count_below(mid) > index) hi = mid; else lo = mid;
    }
    return 0.5 * (lo + hi);
  }
};

struct OracleGrid {
  Tridiagonal matrix;
  double spacing = 0.0;
  double halfwidth = 0.0;
  int grid_points = 0;
};

namespace detail {

inline double oracle_cutoff(const PotentialModel& model, const OracleConfig& cfg) {
  const double cutoff = std::isnan(cfg.energy_cutoff) ? model.height_U : cfg.energy_cutoff;
  require(std::isfinite(cutoff) && cutoff > 0.0, "oracle: unbounded wells need an explicit energy cutoff");
  return cutoff;
}

}  // namespace detail

/// Assembles the matrix, doubling the box (at fixed spacing) up to 4x while
/// the walls sit below the cutoff.
inline OracleGrid assemble(const PotentialModel& model, const OracleConfig& cfg) {
  require(cfg.grid_points >= 200, "oracle: at least 200 grid points are required");
  require(cfg.halfwidth > 0.0, "oracle: halfwidth must be positive");
  const double cutoff = detail::oracle_cutoff(model, cfg);
  const double wall = model.finite() && cutoff >= model.height_U ? model.height_U * (1.0 - 1e-6) : cutoff;

  double L = cfg.halfwidth;
  long points = cfg.grid_points;
  auto walls_ok = [&](double half) {
    if (-half < model.x_min || half > model.x_max) return false;
    return model.evaluate(-half) >= wall && model.evaluate(half) >= wall;
  };
  int doublings = 0;
  while (!walls_ok(L)) {
    if (doublings == 2 || -2.0 * L < model.x_min || 2.0 * L > model.x_max)
      throw PreconditionError("oracle: box walls stay below the energy cutoff (leaky box); enlarge the halfwidth");
    L *= 2.0;
    points = 2 * (points - 1) + 1;
    ++doublings;
  }

  OracleGrid grid;
  grid.halfwidth = L;
  grid.grid_points = static_cast<int>(points);
  grid.spacing = 2.0 * L / static_cast<double>(points - 1);
  const double kinetic = model.beta * model.beta / (grid.spacing * grid.spacing);
  grid.matrix.off_diagonal = -kinetic;
  grid.matrix.diagonal.resize(static_cast<std::size_t>(points - 2));
  for (long i = 1; i + 1 < points; ++i) {
    const double x = -L + grid.spacing * static_cast<double>(i);
    grid.matrix.diagonal[static_cast<std::size_t>(i - 1)] = 2.0 * kinetic + model.evaluate(x);
  }
  return grid;
}

/// All eigenvalues below the cutoff, ascending.
inline std::vector<double> diagonalize(const PotentialModel& model, const OracleConfig& cfg) {
  const double cutoff = detail::oracle_cutoff(model, cfg);
  const double tol = std::isnan(cfg.tolerance) ? 1e-10 * std::max(1.0, cutoff) : cfg.tolerance;
  const OracleGrid grid = assemble(model, cfg);
  const int count = grid.matrix.count_below(cutoff);
  const double floor = *std::min_element(grid.matrix.diagonal.begin(), grid.matrix.diagonal.end()) -
                       2.0 * std::abs(grid.matrix.off_diagonal);
  std::vector<double> levels;
  levels.reserve(static_cast<std::size_t>(count));
  double lo = floor;
  for (int i = 0; i < count; ++i) {
    const double e = grid.matrix.eigenvalue(i, lo, cutoff, tol);
    levels.push_back(e);
    lo = std::max(lo, e - tol);
  }
  return levels;
}

struct OracleResult {
  std::vector<double> levels;   // extrapolated
  double achieved_tol = 0.0;    // max change between the two extrapolations
  bool monotone = true;         // refinement differences keep sign and shrink
  bool count_stable = true;
  std::vector<std::vector<double>> raw;  // per refinement, finest last
};

/// Runs N, 2N-1 and 4N-3 points (halving the spacing), Richardson-extrapolates
/// pairs with the second-order factor 4 and reports the spread between the two
/// extrapolations as the achieved tolerance.
inline OracleResult converge(const PotentialModel& model, const OracleConfig& base) {
  OracleResult out;
  OracleConfig cfg = base;
  for (int r = 0; r < 3; ++r) {
    out.raw.push_back(diagonalize(model, cfg));
    cfg.grid_points = 2 * (cfg.grid_points - 1) + 1;
  }
  std::size_t m = out.raw[0].size();
  for (const auto& lv : out.raw) {
    if (lv.size() != m) out.count_stable = false;
    m = std::min(m, lv.size());
  }
  out.levels.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double a = out.raw[0][i], b = out.raw[1][i], c = out.raw[2][i];
    const double r1 = (4.0 * b - a) / 3.0;
    const double r2 = (4.0 * c - b) / 3.0;
    out.levels[i] = r2;
    out.achieved_tol = std::max(out.achieved_tol, std::abs(r2 - r1));
    const double d1 = b - a, d2 = c - b;
    if (d1 * d2 < 0.0 || std::abs(d2) > std::abs(d1)) out.monotone = false;
  }
  return out;
}

}  // namespace wkbref
