#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wkbref/corrections.hpp"
#include "wkbref/error.hpp"
#include "wkbref/extraction.hpp"
#include "wkbref/potentials.hpp"
#include "wkbref/quadrature.hpp"

namespace wkbref {

enum class QuantizationMode { wkb, improved };

/// Evaluates the phase defect delta(eps) for one model and correction source.
///
/// Closed-form corrections use the model's own rational-slope parameters when
/// it has them and otherwise the parameters recovered at the well top. The
/// direct source differentiates W numerically; where that is impossible (too
/// close to either end of the energy range) the value is frozen at the nearest
/// interior energy and the result is flagged.
class PhaseDefect {
 public:
  PhaseDefect(const PotentialModel& model, CorrectionSource source, double energy_scale = 0.0,
              QuadratureOptions opt = default_quadrature())
      : model_(model), source_(source), opt_(opt) {
    scale_ = model.finite() ? model.height_U : energy_scale;
    if (source == CorrectionSource::basic_well) {
      require(model.finite(), "basic_well corrections need a finite well");
    } else if (source == CorrectionSource::closed_form) {
      if (model.pade) {
        params_ = *model.pade;
      } else {
        require(model.finite(),
                "closed_form corrections need rational-slope parameters; use the direct source for this well");
        const ExtractionReport report = extract_at_top(model, opt_);
        params_ = report.reference;
        direct_fallback_ = report.needs_direct_delta1;
      }
      if (params_ && params_->b != 0.0 && params_->g != 0.0) direct_fallback_ = true;
    }
    if (uses_direct()) require(scale_ > 0.0, "direct corrections on an unbounded well need an energy scale");
  }

  CorrectionSource source() const { return source_; }
  const std::optional<PadeParams>& params() const { return params_; }
  bool uses_direct() const { return source_ == CorrectionSource::direct_numeric || direct_fallback_; }

  struct Value {
    double delta1 = 0.0;
    double delta = 0.0;
    bool frozen = false;
  };

  double delta1(double eps, bool* frozen = nullptr) const {
    if (frozen) *frozen = false;
    switch (source_) {
      case CorrectionSource::basic_well:
        return -model_.beta * model_.curvature_k / (8.0 * model_.height_U);
      case CorrectionSource::closed_form:
        if (!direct_fallback_) {
          const double top = params_->c > 0.0 ? 1.0 / params_->c : std::numeric_limits<double>::infinity();
          return delta1_closed(*params_, model_.beta, std::min(eps, top));
        }
        [[fallthrough]];
      case CorrectionSource::direct_numeric:
        return direct(eps, frozen);
    }
    return 0.0;
  }

  Value at(double eps) const {
    Value v;
    v.delta1 = delta1(eps, &v.frozen);
    v.delta = delta_from_delta1(v.delta1);
    return v;
  }

  CorrectionSet corrections(double eps, bool with_gamma) const {
    CorrectionSet set;
    set.eps = eps;
    set.source = source_;
    set.delta1 = delta1(eps);
    set.delta_total = delta_from_delta1(set.delta1);
    set.delta3 = delta3_from_delta1(set.delta1);
    if (with_gamma) {
      if (source_ == CorrectionSource::basic_well) {
        set.gamma = 0.0;
      } else if (!uses_direct()) {
        set.gamma = gamma_closed(*params_, model_.beta, eps);
      } else {
        set.gamma = gamma_diagnostic(model_, eps, opt_);
      }
    }
    return set;
  }

  /// Fraction of the energy scale kept clear at both ends for the direct source.
  static constexpr double kFreezeMargin = 0.02;

 private:
  double direct(double eps, bool* frozen) const {
    const bool inside = eps > 0.0 && eps < model_.height_U;
    if (inside) {
      try {
        return delta1_direct(model_, eps, opt_).value;
      } catch (const NumericalError&) {
      } catch (const PreconditionError&) {
      }
    }
    if (frozen) *frozen = true;
    const double lo = kFreezeMargin * scale_;
    const double hi = (1.0 - kFreezeMargin) * scale_;
    return delta1_direct(model_, std::clamp(eps, lo, hi), opt_).value;
  }

  PotentialModel model_;
  CorrectionSource source_;
  QuadratureOptions opt_;
  double scale_ = 0.0;
  std::optional<PadeParams> params_;
  bool direct_fallback_ = false;
};

struct LevelRecord {
  int n = 0;
  std::optional<double> eps_wkb;
  std::optional<double> eps_improved;
  std::optional<double> eps_oracle;
  std::optional<double> delta_used;
  bool delta_frozen = false;
  double residual = 0.0;

  std::optional<double> abs_err_wkb() const {
    if (eps_wkb && eps_oracle) return std::abs(*eps_wkb - *eps_oracle);
    return std::nullopt;
  }
  std::optional<double> abs_err_improved() const {
    if (eps_improved && eps_oracle) return std::abs(*eps_improved - *eps_oracle);
    return std::nullopt;
  }
};

struct ModeErrors {
  std::optional<double> max_abs;
  std::optional<double> mean_abs;
  std::optional<double> max_rel;
};

struct SpectrumSummary {
  std::vector<LevelRecord> levels;
  int n_levels = 0;
  std::optional<double> phi_at_top;
  std::optional<double> delta_at_top;
  int oracle_count = 0;
  bool count_mismatch = false;
  ModeErrors wkb;
  ModeErrors improved;
};

namespace detail {

/// Bisection down to `bisect_width`, then Illinois-modified regula falsi inside
/// the bracket. f(lo) < 0 < f(hi) is required.
template <class F>
double bracketed_root(F&& f, double lo, double hi, double f_lo, double f_hi, double bisect_width,
                      double residual_tol, double* residual_out, bool* collapsed = nullptr) {
  if (collapsed) *collapsed = false;
  while (hi - lo > bisect_width) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) {
      if (residual_out) *residual_out = 0.0;
      return mid;
    }
    if (fm < 0.0) { lo = mid; f_lo = fm; } else { hi = mid; f_hi = fm; }
  }
  double x = lo, fx = f_lo;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    x = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    fx = f(x);
    if (std::abs(fx) < residual_tol || fx == 0.0) break;
    if (fx < 0.0) {
      lo = x;
      f_lo = fx;
      if (side == -1) f_hi *= 0.5;
      side = -1;
    } else {
      hi = x;
      f_hi = fx;
      if (side == 1) f_lo *= 0.5;
      side = 1;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(hi)) {
      if (collapsed) *collapsed = true;
      break;
    }
  }
  if (residual_out) *residual_out = fx;
  return x;
}

}  // namespace detail

struct SolveOptions {
  /// Upper end of the search range for unbounded wells (required there).
  double eps_max = std::numeric_limits<double>::quiet_NaN();
  double residual_tol = 1e-12;
  QuadratureOptions quad = default_quadrature();
};

/// Solves Phi(eps) = n + 1/2 + delta(eps) with delta re-evaluated at every
/// iterate (delta = 0 in wkb mode).
inline LevelRecord solve_level(const PotentialModel& model, int n, QuantizationMode mode,
                               const PhaseDefect* defect, const SolveOptions& so = {}) {
  require(n >= 0, "solve_level: quantum number must be nonnegative");
  const double top = model.finite() ? model.height_U : so.eps_max;
  require(std::isfinite(top) && top > 0.0, "solve_level: unbounded wells need eps_max");
  require(mode == QuantizationMode::wkb || defect != nullptr, "solve_level: improved mode needs a defect source");

  auto residual = [&](double eps) {
    const double phi = phase_integral(model, eps, so.quad).phi_total;
    double delta = 0.0;
    if (mode == QuantizationMode::improved) {
      delta = defect->at(eps).delta;
    }
    return phi - (n + 0.5 + delta);
  };

  const double lo = 1e-12 * top;
  const double f_lo = residual(lo);
  const double f_hi = residual(top);
  if (!(f_lo < 0.0))
    throw NumericalError("spectrum", "quantization residual is not negative at the well bottom", lo);
  if (!(f_hi > 0.0))
    throw NumericalError("spectrum", "level n=" + std::to_string(n) + " is not bound below the search limit", top);

  double res = 0.0;
  bool collapsed = false;
  const double eps =
      detail::bracketed_root(residual, lo, top, f_lo, f_hi, 1e-6 * top, so.residual_tol, &res, &collapsed);
  // A bracket shrunk to adjacent doubles is a sign change of the residual even
  // when quadrature noise keeps |residual| above the polish tolerance.
  if (!(std::abs(res) < 1e-10) && !(collapsed && std::abs(res) < 1e-6)) {
    char msg[96];
    std::snprintf(msg, sizeof msg, "root polish stalled with residual %.3g", res);
    throw NumericalError("spectrum", msg, eps);
  }

  LevelRecord rec;
  rec.n = n;
  rec.residual = res;
  if (mode == QuantizationMode::wkb) {
    rec.eps_wkb = eps;
  } else {
    const auto v = defect->at(eps);
    rec.eps_improved = eps;
    rec.delta_used = v.delta;
    rec.delta_frozen = v.frozen;
  }
  return rec;
}

inline LevelRecord solve_level(const PotentialModel& model, int n, QuantizationMode mode,
                               CorrectionSource source, const SolveOptions& so = {}) {
  if (mode == QuantizationMode::wkb) return solve_level(model, n, mode, nullptr, so);
  const PhaseDefect defect(model, source, model.finite() ? 0.0 : so.eps_max, so.quad);
  return solve_level(model, n, mode, &defect, so);
}

/// Number of bound levels from Phi(U) and delta just below the top; at least 1.
inline SpectrumSummary count_levels(const PotentialModel& model, const PhaseDefect& defect,
                                    const QuadratureOptions& opt = default_quadrature()) {
  require(model.finite(), "count_levels: the well has no finite top");
  const double U = model.height_U;
  SpectrumSummary summary;
  const double phi_top = phase_integral(model, U, opt).phi_total;
  const double delta_top = defect.at(U).delta;
  summary.phi_at_top = phi_top;
  summary.delta_at_top = delta_top;
  summary.n_levels = std::max(1, static_cast<int>(std::floor(phi_top - delta_top - 0.5)) + 1);
  return summary;
}

inline SpectrumSummary count_levels(const PotentialModel& model,
                                    CorrectionSource source = CorrectionSource::closed_form,
                                    const QuadratureOptions& opt = default_quadrature()) {
  const PhaseDefect defect(model, source, 0.0, opt);
  return count_levels(model, defect, opt);
}

/// State density in its leading approximation, P = dPhi/deps.
inline double state_density(const PotentialModel& model, double eps,
                            const QuadratureOptions& opt = default_quadrature()) {
  return phase_derivative(model, eps, opt).value;
}

namespace detail {

inline ModeErrors mode_errors(const std::vector<LevelRecord>& levels, bool improved) {
  ModeErrors e;
  double sum = 0.0;
  int count = 0;
  for (const auto& rec : levels) {
    const auto err = improved ? rec.abs_err_improved() : rec.abs_err_wkb();
    if (!err) continue;
    const double rel = *err / std::max(std::abs(*rec.eps_oracle), std::numeric_limits<double>::min());
    e.max_abs = std::max(e.max_abs.value_or(0.0), *err);
    e.max_rel = std::max(e.max_rel.value_or(0.0), rel);
    sum += *err;
    ++count;
  }
  if (count > 0) e.mean_abs = sum / count;
  return e;
}

}  // namespace detail

/// Solves every level in both modes and lines them up with the oracle levels.
/// For finite wells the level count comes from count_levels; unbounded wells
/// take the levels whose WKB energy lies below eps_max.
inline SpectrumSummary compare_spectra(const PotentialModel& model, const std::vector<double>& oracle_levels,
                                       CorrectionSource source, const SolveOptions& so = {}) {
  for (std::size_t i = 1; i < oracle_levels.size(); ++i)
    require(oracle_levels[i] > oracle_levels[i - 1], "compare_spectra: oracle levels must ascend");
  for (double e : oracle_levels)
    require(!model.finite() || e < model.height_U, "compare_spectra: oracle level above the well top");

  const PhaseDefect defect(model, source, model.finite() ? 0.0 : so.eps_max, so.quad);
  SpectrumSummary summary;
  int n_levels = 0;
  if (model.finite()) {
    summary = count_levels(model, defect, so.quad);
    n_levels = summary.n_levels;
  } else {
    require(std::isfinite(so.eps_max), "compare_spectra: unbounded wells need eps_max");
    const double phi_max = phase_integral(model, so.eps_max, so.quad).phi_total;
    n_levels = std::max(0, static_cast<int>(std::ceil(phi_max - 0.5)));
    summary.n_levels = n_levels;
  }

  summary.oracle_count = static_cast<int>(oracle_levels.size());
  summary.count_mismatch = !oracle_levels.empty() && summary.oracle_count != n_levels;
  for (int n = 0; n < n_levels; ++n) {
    LevelRecord rec;
    rec.n = n;
    try {
      rec.eps_wkb = solve_level(model, n, QuantizationMode::wkb, nullptr, so).eps_wkb;
    } catch (const NumericalError&) {
      // The WKB level can be missing near the top while the improved one exists.
    }
    const LevelRecord improved = solve_level(model, n, QuantizationMode::improved, &defect, so);
    rec.eps_improved = improved.eps_improved;
    rec.delta_used = improved.delta_used;
    rec.delta_frozen = improved.delta_frozen;
    rec.residual = improved.residual;
    if (static_cast<std::size_t>(n) < oracle_levels.size()) rec.eps_oracle = oracle_levels[static_cast<std::size_t>(n)];
    summary.levels.push_back(rec);
  }
  summary.wkb = detail::mode_errors(summary.levels, false);
  summary.improved = detail::mode_errors(summary.levels, true);
  return summary;
}

}  // namespace wkbref
