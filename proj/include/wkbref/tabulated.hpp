#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wkbref/error.hpp"
#include "wkbref/potentials.hpp"

namespace wkbref {

/// Piecewise cubic Hermite interpolant with monotonicity-preserving
/// (Hyman-limited) node slopes. Samples are normalized so that the
/// unique minimum sits at x = 0 with value 0.
class TabulatedPotential {
 public:
  TabulatedPotential(std::vector<double> grid, std::vector<double> values) {
    require(grid.size() == values.size(), "tabulated: grid and values differ in length");
    require(grid.size() >= 16, "tabulated: at least 16 samples are required");
    for (std::size_t i = 1; i < grid.size(); ++i)
      require(grid[i] > grid[i - 1], "tabulated: grid must be strictly increasing");
    for (double v : values) require(std::isfinite(v), "tabulated: non-finite sample");

    const auto min_it = std::min_element(values.begin(), values.end());
    min_index_ = static_cast<std::size_t>(min_it - values.begin());
    require(min_index_ > 0 && min_index_ + 1 < values.size(),
            "tabulated: minimum must be interior so that both flanks are sampled");
    offset_ = *min_it;
    x_shift_ = grid[min_index_];
    for (auto& x : grid) x -= x_shift_;
    for (auto& v : values) v -= offset_;
    grid[min_index_] = 0.0;
    values[min_index_] = 0.0;
    for (std::size_t i = 0; i < min_index_; ++i)
      require(values[i] > values[i + 1], "tabulated: left flank must decrease strictly toward the minimum");
    for (std::size_t i = min_index_; i + 1 < values.size(); ++i)
      require(values[i + 1] > values[i], "tabulated: right flank must increase strictly away from the minimum");

    x_ = std::move(grid);
    v_ = std::move(values);
    d_ = monotone_slopes(x_, v_);
    d_[min_index_] = 0.0;
  }

  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }
  double offset() const { return offset_; }
  double x_shift() const { return x_shift_; }
  std::size_t size() const { return x_.size(); }
  std::size_t min_index() const { return min_index_; }
  const std::vector<double>& grid() const { return x_; }
  const std::vector<double>& values() const { return v_; }

  double value(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return v_[i] * (2 * t3 - 3 * t2 + 1) + h * d_[i] * (t3 - 2 * t2 + t) +
           v_[i + 1] * (-2 * t3 + 3 * t2) + h * d_[i + 1] * (t3 - t2);
  }

  double slope(double x) const {
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    return (v_[i] * (6 * t2 - 6 * t) + v_[i + 1] * (6 * t - 6 * t2)) / h +
           d_[i] * (3 * t2 - 4 * t + 1) + d_[i + 1] * (3 * t2 - 2 * t);
  }

  /// Quadratic and cubic coefficients of V = x^2 (A + B x) on the segment
  /// adjacent to the minimum on the given side.
  std::pair<double, double> near_minimum(int side) const {
    const std::size_t j = side > 0 ? min_index_ + 1 : min_index_ - 1;
    const double h = x_[j];  // signed
    const double A = (3.0 * v_[j] - h * d_[j]) / (h * h);
    const double B = (h * d_[j] - 2.0 * v_[j]) / (h * h * h);
    return {A, B};
  }

  /// k from V / x^2 interpolated to x = 0 through the two nearest nodes on
  /// each side (Lagrange form), or from the adjacent segments on short flanks.
  double curvature_k() const {
    double a = 0.0;
    if (min_index_ >= 2 && min_index_ + 2 < x_.size()) {
      const std::size_t idx[4] = {min_index_ - 2, min_index_ - 1, min_index_ + 1, min_index_ + 2};
      for (std::size_t i : idx) {
        double w = v_[i] / (x_[i] * x_[i]);
        for (std::size_t j : idx)
          if (j != i) w *= x_[j] / (x_[j] - x_[i]);
        a += w;
      }
    } else {
      a = 0.5 * (near_minimum(-1).first + near_minimum(+1).first);
    }
    require(a > 0.0, "tabulated: vanishing curvature at the minimum");
    return std::sqrt(a);
  }

  /// Position on the flank of sign(s) with V(x) = s^2.
  double x_of_s(double s) const {
    if (s == 0.0) return 0.0;
    const int side = s > 0 ? 1 : -1;
    const double target = s * s;
    const std::size_t edge = side > 0 ? x_.size() - 1 : 0;
    if (target >= v_[edge]) return x_[edge];

    // Segment adjacent to the minimum: solve x sqrt(A + B x) = s directly.
    const std::size_t near = side > 0 ? min_index_ + 1 : min_index_ - 1;
    if (target <= v_[near]) {
      const auto [A, B] = near_minimum(side);
      double lo = std::min(0.0, x_[near]), hi = std::max(0.0, x_[near]);
      double x = s / std::sqrt(A);
      for (int it = 0; it < 100; ++it) {
        if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
        const double q = std::sqrt(A + B * x);
        const double f = x * q - s;
        if (f == 0.0) break;
        if (f < 0.0) lo = x; else hi = x;
        const double df = (2.0 * A + 3.0 * B * x) / (2.0 * q);
        const double next = x - f / df;
        if (std::abs(next - x) <= 1e-15 * std::abs(x)) { x = next; break; }
        x = next;
      }
      return x;
    }

    // Otherwise locate the bracketing segment on the monotone flank.
    double lo, hi;
    if (side > 0) {
      const auto first = v_.begin() + static_cast<std::ptrdiff_t>(min_index_);
      const auto it = std::lower_bound(first, v_.end(), target);
      const auto j = static_cast<std::size_t>(it - v_.begin());
      lo = x_[j - 1];
      hi = x_[j];
    } else {
      const auto last = v_.begin() + static_cast<std::ptrdiff_t>(min_index_) + 1;
      const auto it = std::partition_point(v_.begin(), last, [target](double v) { return v >= target; });
      const auto j = static_cast<std::size_t>(it - v_.begin());
      lo = x_[j - 1];
      hi = x_[j];
    }
    // V - target changes sign on [lo, hi]; safeguarded Newton.
    double x = 0.5 * (lo + hi);
    double flo = value(lo) - target;
    for (int it = 0; it < 200; ++it) {
      const double f = value(x) - target;
      if (f == 0.0) break;
      if ((f < 0.0) == (flo < 0.0)) { lo = x; flo = f; } else { hi = x; }
      const double df = slope(x);
      double next = df != 0.0 ? x - f / df : 0.5 * (lo + hi);
      if (!(next > std::min(lo, hi) && next < std::max(lo, hi))) next = 0.5 * (lo + hi);
      if (std::abs(next - x) <= 1e-15 * std::abs(x)) { x = next; break; }
      x = next;
    }
    return x;
  }

  /// sigma = ds/dx at the flank point with signed root s.
  double sigma(double s) const {
    const int side = s > 0 ? 1 : -1;
    const std::size_t near = side > 0 ? min_index_ + 1 : min_index_ - 1;
    const double x = x_of_s(s);
    if (s == 0.0 || std::abs(x) <= std::abs(x_[near])) {
      const auto [A, B] = near_minimum(side);
      return (2.0 * A + 3.0 * B * x) / (2.0 * std::sqrt(A + B * x));
    }
    return slope(x) / (2.0 * s);
  }

 private:
  std::size_t segment(double x) const {
    if (!(x >= x_.front() && x <= x_.back()))
      throw PreconditionError("tabulated: position " + std::to_string(x) + " outside the sampled grid");
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = static_cast<std::size_t>(it - x_.begin());
    if (i == 0) i = 1;
    if (i >= x_.size()) i = x_.size() - 1;
    return i - 1;
  }

  /// Three-point slopes limited by the Hyman filter |d| <= 3 min(|delta|), which
  /// keeps each flank monotone and is exact on a parabola through the minimum.
  static std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& v) {
    const std::size_t n = x.size();
    std::vector<double> h(n - 1), delta(n - 1), d(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x[i + 1] - x[i];
      delta[i] = (v[i + 1] - v[i]) / h[i];
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) continue;
      const double centred = (h[i - 1] * delta[i] + h[i] * delta[i - 1]) / (h[i - 1] + h[i]);
      const double limit = 3.0 * std::min(std::abs(delta[i - 1]), std::abs(delta[i]));
      d[i] = std::copysign(std::min(std::abs(centred), limit), delta[i]);
    }
    auto edge = [](double h0, double h1, double m0, double m1) {
      double e = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
      if (e * m0 <= 0.0) return 0.0;
      if (m0 * m1 <= 0.0 && std::abs(e) > std::abs(3.0 * m0)) return 3.0 * m0;
      return e;
    };
    d[0] = edge(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = edge(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    return d;
  }

  std::vector<double> x_;
  std::vector<double> v_;
  std::vector<double> d_;
  std::size_t min_index_ = 0;
  double offset_ = 0.0;
  double x_shift_ = 0.0;
};

/// Wraps tabulated samples as a finite well. The height defaults to the lower
/// of the two end samples; an explicit height may not exceed it.
inline PotentialModel make_tabulated(std::vector<double> grid, std::vector<double> values, double beta,
                                     std::optional<double> height = std::nullopt) {
  require(beta > 0.0 && std::isfinite(beta), "tabulated: beta must be positive");
  auto table = std::make_shared<const TabulatedPotential>(std::move(grid), std::move(values));
  const double ceiling = std::min(table->values().front(), table->values().back());
  double U = ceiling;
  if (height) {
    const double normalized = *height - table->offset();
    require(normalized > 0.0, "tabulated: height must exceed the minimum");
    require(normalized <= ceiling * (1.0 + 1e-9), "tabulated: height exceeds the sampled range");
    U = std::min(normalized, ceiling);
  }

  PotentialModel m;
  m.kind = PotentialKind::tabulated;
  m.beta = beta;
  m.curvature_k = table->curvature_k();
  m.height_U = U;
  m.offset = table->offset();
  m.x_shift = table->x_shift();
  m.x_min = table->x_front();
  m.x_max = table->x_back();
  m.value = [table](double x) { return table->value(x); };
  m.slope = [table](double x) { return table->slope(x); };
  m.x_of_s = [table](double s) { return table->x_of_s(s); };
  m.flank_weight = [table, U](double s) { return (U - s * s) / table->sigma(s); };
  const auto& v = table->values();
  const std::size_t centre = table->min_index();
  for (std::size_t i = centre + 1; i + 1 < v.size(); ++i) m.s_breaks_plus.push_back(std::sqrt(v[i]));
  for (std::size_t i = centre; i-- > 1;) m.s_breaks_minus.push_back(std::sqrt(v[i]));
  return m;
}

/// Reads a two-column (x, V) CSV. A non-numeric first line is treated as a header.
inline std::pair<std::vector<double>, std::vector<double>> read_xy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("tabulated: cannot open grid file '" + path + "'");
  std::vector<double> xs, vs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double x, v;
    if (!(row >> x >> v)) {
      if (line_no == 1) continue;
      throw PreconditionError(path + ":" + std::to_string(line_no) + ": expected two numeric columns");
    }
    xs.push_back(x);
    vs.push_back(v);
  }
  return {std::move(xs), std::move(vs)};
}

}  // namespace wkbref
