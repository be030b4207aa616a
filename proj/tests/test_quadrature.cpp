#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "wkbref/wkbref.hpp"

using namespace wkbref;
using std::numbers::pi;

TEST(TanhSinh, PolynomialAndEndpointSingularities) {
  auto poly = [](double x, double, double) { return x * x; };
  EXPECT_NEAR(tanh_sinh(poly, 0.0, 3.0).value, 9.0, 1e-12);
  // int_0^1 dx / sqrt(1 - x^2) = pi / 2, singular at the upper end.
  auto arcsine = [](double x, double, double dist_hi) { return 1.0 / std::sqrt(dist_hi * (1.0 + x)); };
  EXPECT_NEAR(tanh_sinh(arcsine, 0.0, 1.0).value, pi / 2.0, 1e-12);
  auto log_sing = [](double, double dist_lo, double) { return std::log(dist_lo); };
  EXPECT_NEAR(tanh_sinh(log_sing, 0.0, 1.0).value, -1.0, 1e-12);
}

TEST(TanhSinh, FixedLevelSkipsRefinement) {
  QuadratureOptions opt;
  opt.fixed_level = 3;
  const auto r = tanh_sinh([](double x, double, double) { return std::exp(x); }, 0.0, 1.0, opt);
  EXPECT_EQ(r.level, 3);
  EXPECT_NEAR(r.value, std::exp(1.0) - 1.0, 1e-8);
}

TEST(TanhSinh, NonConvergenceReportsError) {
  QuadratureOptions opt;
  opt.max_level = 5;
  opt.tolerance = 1e-300;
  auto bumpy = [](double x, double, double) { return std::sin(1e4 * x); };
  try {
    tanh_sinh(bumpy, 0.0, 1.0, opt);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.module(), "quadrature");
    EXPECT_NE(std::string(e.what()).find("achieved error"), std::string::npos);
  }
}

TEST(PhaseIntegral, HarmonicLinearInEnergy) {
  const auto m = make_harmonic(1.0, 1.0);
  EXPECT_NEAR(phase_integral(m, 1.0).phi_total, 0.5, 1e-10);
  const auto m2 = make_harmonic(2.0, 0.5);
  EXPECT_NEAR(phase_integral(m2, 3.0).phi_total, 3.0 / (2.0 * 0.5 * 2.0), 1e-10);
}

TEST(PhaseIntegral, Tanh2ClosedForm) {
  const auto m = make_tanh2_well(25.0, 1.0, 1.0);
  EXPECT_NEAR(phase_integral(m, 25.0).phi_total, 5.0, 1e-10);
  for (double eps : {1.0, 9.0, 16.0, 24.0}) {
    EXPECT_NEAR(phase_integral(m, eps).phi_total, 5.0 - std::sqrt(25.0 - eps), 1e-10) << "eps=" << eps;
  }
}

TEST(PhaseIntegral, SymmetricSplitAndSum) {
  const auto m = make_tanh2_well(25.0, 1.0, 1.0);
  const auto s = phase_integral(m, 12.0);
  EXPECT_NEAR(s.phi_plus, s.phi_minus, 1e-12);
  EXPECT_EQ(s.phi_total, s.phi_plus + s.phi_minus);

  const auto a = generate_from_pade({2.0, 0.04, 0.05, 0.01}, 1.0);
  const auto sa = phase_integral(a, 12.0);
  EXPECT_EQ(sa.phi_total, sa.phi_plus + sa.phi_minus);
  EXPECT_GT(sa.phi_plus, sa.phi_minus);
}

TEST(PhaseIntegral, SplitMatchesDirectXIntegration) {
  // Independent check: integrate sqrt(eps - V(x)) over x between the turning points.
  const auto m = generate_from_pade({2.0, 0.04, 0.05, 0.01}, 1.0);
  const double eps = 10.0;
  const auto tp = turning_points(m, eps);
  auto f = [&](double x, double, double) { return std::sqrt(std::max(0.0, eps - m.evaluate(x))); };
  const double plus = tanh_sinh(f, 0.0, tp.x_plus).value / pi;
  const double minus = tanh_sinh(f, tp.x_minus, 0.0).value / pi;
  const auto s = phase_integral(m, eps);
  EXPECT_NEAR(s.phi_plus, plus, 1e-8);
  EXPECT_NEAR(s.phi_minus, minus, 1e-8);
}

TEST(PhaseIntegral, StrictlyIncreasing) {
  for (const auto& m : {make_tanh2_well(25.0, 1.0, 1.0), generate_from_pade({2.0, 0.04, 0.05, 0.01}, 1.0),
                        make_tanh2_well(1.0, 1.0, 1.0, 0.1)}) {
    double prev = 0.0;
    for (int i = 1; i <= 50; ++i) {
      const double phi = phase_integral(m, m.height_U * i / 50.0).phi_total;
      EXPECT_GT(phi, prev);
      prev = phi;
    }
  }
}

TEST(PhaseIntegral, RefinementWithinErrorEstimate) {
  const auto m = generate_from_pade({2.0, 0.04, 0.05, 0.01}, 1.0);
  QuadratureOptions coarse;
  const auto a = phase_integral(m, 17.0, coarse);
  QuadratureOptions fine;
  fine.tolerance = 1e-14;
  const auto b = phase_integral(m, 17.0, fine);
  EXPECT_LE(std::abs(a.phi_total - b.phi_total), std::max(a.error, 1e-12));
}

TEST(PhaseIntegral, RejectsOutOfRange) {
  const auto m = make_tanh2_well(25.0, 1.0, 1.0);
  EXPECT_THROW(phase_integral(m, 0.0), PreconditionError);
  EXPECT_THROW(phase_integral(m, 25.5), PreconditionError);
}

TEST(PhaseDerivative, ClosedForms) {
  EXPECT_NEAR(phase_derivative(make_harmonic(1.0, 1.0), 3.7).value, 0.5, 1e-9);
  const auto m = make_tanh2_well(25.0, 1.0, 1.0);
  EXPECT_NEAR(phase_derivative(m, 16.0).value, 1.0 / 6.0, 1e-9);
  EXPECT_GT(phase_derivative(m, 0.999 * 25.0).value, phase_derivative(m, 0.9 * 25.0).value);
  EXPECT_THROW(phase_derivative(m, 25.0), PreconditionError);
}

TEST(PhaseDerivative, AgreesWithFiniteDifference) {
  const auto m = generate_from_pade({2.0, 0.04, 0.05, 0.01}, 1.0);
  for (double eps : {3.0, 12.0, 20.0}) {
    const double h = 1e-4 * eps;
    const double fd = (phase_integral(m, eps + h).phi_total - phase_integral(m, eps - h).phi_total) / (2.0 * h);
    const double d = phase_derivative(m, eps).value;
    EXPECT_NEAR(d / fd, 1.0, 1e-6) << "eps=" << eps;
  }
}

TEST(MomentIntegrals, ClosedValuesAtTop) {
  const double U = 25.0;
  const auto mi = moment_integrals(1.0 / U, U);
  EXPECT_NEAR(mi.I0 / (pi * U / 2.0), 1.0, 1e-9);
  EXPECT_NEAR(mi.I2 / (pi * U * U / 4.0), 1.0, 1e-9);
  EXPECT_NEAR(mi.J1 / std::pow(U, 1.5), 1.0, 1e-9);
}

TEST(MomentIntegrals, QuarterCircleWithoutWeight) {
  const auto mi = moment_integrals(0.0, 3.0);
  EXPECT_NEAR(mi.I0, pi * 3.0 / 4.0, 1e-12);
  // int_0^r s^2 sqrt(r^2 - s^2) ds = pi r^4 / 16, int_0^r s sqrt(r^2 - s^2) ds = r^3 / 3.
  EXPECT_NEAR(mi.I2, pi * 9.0 / 16.0, 1e-12);
  EXPECT_NEAR(mi.J1, std::pow(3.0, 1.5) / 3.0, 1e-12);
}

TEST(MomentIntegrals, RejectsInteriorPole) {
  EXPECT_THROW(moment_integrals(0.1, 20.0), PreconditionError);
  EXPECT_THROW(moment_integrals(0.1, 0.0), PreconditionError);
}

TEST(Delta1RawIntegral, HarmonicIsLinear) {
  // (2 k^2 x)^2 / sqrt(eps - k^2 x^2) integrates to 2 pi k eps.
  for (double k : {1.0, 2.5}) {
    const auto m = make_harmonic(k, 1.0);
    for (double eps : {0.5, 2.0, 7.0}) EXPECT_NEAR(delta1_raw_integral(m, eps).value, 2.0 * pi * k * eps, 1e-9 * eps);
  }
}

TEST(Delta1RawIntegral, PositiveAndMatchesXSpace) {
  // Independent check in x with x = x_t sin(phi), which removes the inverse
  // square root at each turning point.
  const auto m = generate_from_pade({2.0, 0.04, 0.05, 0.01}, 1.0);
  const double eps = 9.0;
  const auto tp = turning_points(m, eps);
  QuadratureOptions opt;
  opt.fixed_level = 9;
  auto flank = [&](double xt) {
    auto f = [&](double phi, double, double) {
      const double x = xt * std::sin(phi);
      const double gap = eps - m.evaluate(x);
      if (gap <= 0.0) return 0.0;
      const double d = m.slope(x);
      return d * d / std::sqrt(gap) * std::abs(xt) * std::cos(phi);
    };
    return tanh_sinh(f, 0.0, pi / 2.0, opt).value;
  };
  const double direct = flank(tp.x_minus) + flank(tp.x_plus);
  const double w = delta1_raw_integral(m, eps).value;
  EXPECT_GT(w, 0.0);
  EXPECT_NEAR(w / direct, 1.0, 1e-6);
}
