#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "wkbref/wkbref.hpp"

using namespace wkbref;

TEST(Tanh2Well, CurvatureFromHeightAndRange) {
  const auto m = make_tanh2_well(25.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(m.curvature_k, 5.0);
  EXPECT_DOUBLE_EQ(m.height_U, 25.0);
  EXPECT_EQ(m.kind, PotentialKind::tanh2);
}

TEST(Tanh2Well, ApproachesHeightFarOut) {
  const auto m = make_tanh2_well(25.0, 1.0, 1.0);
  EXPECT_NEAR(m.evaluate(20.0), 25.0, 1e-8);
  EXPECT_NEAR(m.evaluate(-20.0), 25.0, 1e-8);
}

TEST(Tanh2Well, SecondDerivativeAtMinimum) {
  for (double U : {4.0, 25.0, 100.0}) {
    const double p = 0.7;
    const auto m = make_tanh2_well(U, p, 1.0);
    const double h = 1e-3;
    const double d2 = (m.evaluate(h) - 2.0 * m.evaluate(0.0) + m.evaluate(-h)) / (h * h);
    EXPECT_NEAR(d2 / (2.0 * p * p * U), 1.0, 1e-4) << "U=" << U;
  }
}

TEST(Tanh2Well, RejectsBadParameters) {
  EXPECT_THROW(make_tanh2_well(-1.0, 1.0, 1.0), PreconditionError);
  EXPECT_THROW(make_tanh2_well(25.0, 0.0, 1.0), PreconditionError);
  EXPECT_THROW(make_tanh2_well(25.0, 1.0, -1.0), PreconditionError);
  EXPECT_THROW(make_tanh2_well(25.0, 1.0, 1.0, -0.6), PreconditionError);
}

TEST(Harmonic, UnboundedWithExactInverse) {
  const auto m = make_harmonic(2.0, 1.0);
  EXPECT_FALSE(m.finite());
  EXPECT_DOUBLE_EQ(m.evaluate(1.5), 9.0);
  EXPECT_DOUBLE_EQ(m.x_of_s(3.0), 1.5);
  EXPECT_THROW(make_harmonic(0.0, 1.0), PreconditionError);
}

TEST(ModelInvariants, SoleMinimumAndMonotoneFlanks) {
  std::vector<PotentialModel> models{make_tanh2_well(25.0, 1.0, 1.0), make_tanh2_well(1.0, 1.0, 1.0, 0.1),
                                     generate_from_pade({2.0, 0.04, 0.05, 0.01}, 1.0),
                                     generate_from_pade({5.0, 0.04, 0.0, 0.02}, 1.0)};
  for (const auto& m : models) {
    EXPECT_NEAR(m.evaluate(0.0), 0.0, 1e-14);
    double prev_r = 0.0, prev_l = 0.0;
    for (int i = 1; i <= 400; ++i) {
      const double x = 0.02 * i;
      const double r = m.evaluate(x), l = m.evaluate(-x);
      EXPECT_GT(r, prev_r);
      EXPECT_GT(l, prev_l);
      EXPECT_LT(r, m.height_U);
      EXPECT_LT(l, m.height_U);
      prev_r = r;
      prev_l = l;
    }
  }
}

TEST(ModelInvariants, CurvatureLimitAtOrigin) {
  std::vector<PotentialModel> models{make_harmonic(1.3, 1.0), make_tanh2_well(25.0, 1.0, 1.0),
                                     generate_from_pade({2.0, 0.04, 0.05, 0.01}, 1.0)};
  for (const auto& m : models) {
    const double x = 1e-4;
    const double ratio = 0.5 * (m.evaluate(x) + m.evaluate(-x)) / (x * x);
    EXPECT_NEAR(ratio / (m.curvature_k * m.curvature_k), 1.0, 1e-6);
  }
}

TEST(PadeParams, DenominatorValidation) {
  EXPECT_NO_THROW(validate({2.0, 0.04, 0.05, 0.01}));
  // 1 + b s vanishes at s = -1/b = -4, inside [-5, 5].
  EXPECT_THROW(validate({2.0, 0.04, 0.25, 0.0}), PreconditionError);
  EXPECT_THROW(generate_from_pade({2.0, 0.04, 0.25, 0.0}, 1.0), PreconditionError);
  EXPECT_THROW(generate_from_pade({2.0, 0.0, 0.0, 0.0}, 1.0), PreconditionError);
  EXPECT_THROW(generate_from_pade({2.0, -0.1, 0.0, 0.0}, 1.0), PreconditionError);
  EXPECT_DOUBLE_EQ(PadeParams({1.0, 0.04, 0.0, 0.0}).height(), 25.0);
}

TEST(GenerateFromPade, BasicParametersReproduceTanh2) {
  const auto m = generate_from_pade({5.0, 0.04, 0.0, 0.0}, 1.0);
  EXPECT_DOUBLE_EQ(m.height_U, 25.0);
  for (double x : {0.5, 1.0, 2.0}) {
    const double t = std::tanh(x);
    EXPECT_NEAR(m.evaluate(x), 25.0 * t * t, 1e-8) << "x=" << x;
    EXPECT_NEAR(m.evaluate(-x), 25.0 * t * t, 1e-8) << "x=" << -x;
  }
}

TEST(GenerateFromPade, InverseIsStrictlyIncreasing) {
  const PadeParams p{2.0, 0.04, 0.05, 0.01};
  const auto m = generate_from_pade(p, 1.0);
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    const double s = -5.0 + 10.0 * (i + 0.5) / 1000.0;
    const double x = m.x_of_s(s);
    EXPECT_GT(x, prev) << "s=" << s;
    prev = x;
  }
}

TEST(GenerateFromPade, SlopeOfSMatchesSigma) {
  const PadeParams p{2.0, 0.04, 0.05, 0.01};
  const auto m = generate_from_pade(p, 1.0);
  for (double x : {-3.0, -1.0, -0.2, 0.3, 1.0, 2.5, 4.0}) {
    const double h = 1e-5;
    const double ds = (s_map(m, x + h) - s_map(m, x - h)) / (2.0 * h);
    EXPECT_NEAR(ds, p.sigma(s_map(m, x)), 1e-6) << "x=" << x;
  }
}

TEST(GenerateFromPade, RoundTripThroughInverse) {
  const auto m = generate_from_pade({2.0, 0.04, 0.05, 0.01}, 1.0);
  for (double s : {-4.9, -3.0, -0.5, 0.1, 2.0, 4.99}) {
    EXPECT_NEAR(s_map(m, m.x_of_s(s)), s, 1e-10 * 5.0) << "s=" << s;
  }
}

TEST(SMap, Tanh2ClosedForm) {
  const auto m = make_tanh2_well(25.0, 1.0, 1.0);
  EXPECT_EQ(s_map(m, 0.0), 0.0);
  for (double x : {-2.0, -0.3, 0.1, 1.0, 3.0}) {
    EXPECT_NEAR(s_map(m, x), 5.0 * std::tanh(x), 1e-12);
    EXPECT_NEAR(s_map(m, -x), -s_map(m, x), 1e-14);
  }
}

TEST(TurningPoints, Harmonic) {
  const auto tp = turning_points(make_harmonic(1.0, 1.0), 4.0);
  EXPECT_NEAR(tp.x_minus, -2.0, 1e-12);
  EXPECT_NEAR(tp.x_plus, 2.0, 1e-12);
}

TEST(TurningPoints, Tanh2) {
  const double t = std::tanh(1.0);
  const auto tp = turning_points(make_tanh2_well(25.0, 1.0, 1.0), 25.0 * t * t);
  EXPECT_NEAR(tp.x_minus, -1.0, 1e-10);
  EXPECT_NEAR(tp.x_plus, 1.0, 1e-10);
}

TEST(TurningPoints, ShrinkToOrigin) {
  const auto m = make_tanh2_well(25.0, 1.0, 1.0);
  const auto tp = turning_points(m, 1e-10);
  EXPECT_LT(std::abs(tp.x_minus), 1e-5);
  EXPECT_LT(std::abs(tp.x_plus), 1e-5);
}

TEST(TurningPoints, PotentialEqualsEnergy) {
  std::vector<PotentialModel> models{make_tanh2_well(25.0, 1.0, 1.0), make_tanh2_well(1.0, 1.0, 1.0, 0.1),
                                     generate_from_pade({2.0, 0.04, 0.05, 0.01}, 1.0)};
  for (const auto& m : models) {
    for (double f : {0.01, 0.3, 0.7, 0.999}) {
      const double eps = f * m.height_U;
      const auto tp = turning_points(m, eps);
      EXPECT_NEAR(m.evaluate(tp.x_plus), eps, 1e-10 * std::max(eps, 1.0));
      EXPECT_NEAR(m.evaluate(tp.x_minus), eps, 1e-10 * std::max(eps, 1.0));
    }
  }
}

TEST(TurningPoints, RejectsOutOfRangeEnergy) {
  const auto m = make_tanh2_well(25.0, 1.0, 1.0);
  EXPECT_THROW(turning_points(m, 25.0), PreconditionError);
  EXPECT_THROW(turning_points(m, 0.0), PreconditionError);
  EXPECT_THROW(turning_points(m, -1.0), PreconditionError);
}

namespace {

std::pair<std::vector<double>, std::vector<double>> sampled_tanh2(double U, double shift_x, double shift_v, int n) {
  std::vector<double> xs, vs;
  for (int i = 0; i < n; ++i) {
    const double x = -8.0 + 16.0 * i / (n - 1);
    const double t = std::tanh(x);
    xs.push_back(x + shift_x);
    vs.push_back(U * t * t + shift_v);
  }
  return {xs, vs};
}

}  // namespace

TEST(Tabulated, MatchesNodesAndNormalizes) {
  auto [xs, vs] = sampled_tanh2(25.0, 1.5, -3.0, 801);
  const auto m = make_tabulated(xs, vs, 1.0);
  EXPECT_NEAR(m.offset, -3.0, 1e-12);
  EXPECT_NEAR(m.x_shift, 1.5, 1e-12);
  EXPECT_EQ(m.evaluate(0.0), 0.0);
  for (std::size_t i = 0; i < xs.size(); i += 37) {
    EXPECT_NEAR(m.raw_value(xs[i] - 1.5), vs[i], 1e-12);
  }
  const double t8 = std::tanh(8.0);
  EXPECT_NEAR(m.height_U, 25.0 * t8 * t8, 1e-12);
}

TEST(Tabulated, InterpolatesSmoothWell) {
  auto [xs, vs] = sampled_tanh2(25.0, 0.0, 0.0, 1601);
  const auto m = make_tabulated(xs, vs, 1.0);
  for (double x : {-2.3, -0.77, 0.013, 0.5, 1.9}) {
    const double t = std::tanh(x);
    EXPECT_NEAR(m.evaluate(x), 25.0 * t * t, 1e-6 * std::max(1.0, 25.0 * t * t)) << "x=" << x;
  }
  EXPECT_NEAR(m.curvature_k, 5.0, 1e-3);
}

TEST(Tabulated, InverseMapRoundTrip) {
  auto [xs, vs] = sampled_tanh2(25.0, 0.0, 0.0, 801);
  const auto m = make_tabulated(xs, vs, 1.0);
  for (double s : {-4.9, -2.0, -0.01, 0.05, 1.0, 4.5}) {
    EXPECT_NEAR(s_map(m, m.x_of_s(s)), s, 1e-9) << "s=" << s;
  }
}

TEST(Tabulated, ShiftInvariance) {
  auto [xa, va] = sampled_tanh2(25.0, 0.0, 0.0, 801);
  auto [xb, vb] = sampled_tanh2(25.0, -4.0, 7.0, 801);
  const auto a = make_tabulated(xa, va, 1.0);
  const auto b = make_tabulated(xb, vb, 1.0);
  for (double x : {-3.0, -0.4, 0.2, 2.2}) EXPECT_NEAR(a.evaluate(x), b.evaluate(x), 1e-9);
  EXPECT_NEAR(phase_integral(a, 12.0).phi_total, phase_integral(b, 12.0).phi_total, 1e-9);
}

TEST(Tabulated, RejectsBadTables) {
  std::vector<double> few(10, 1.0);
  EXPECT_THROW(make_tabulated(few, few, 1.0), PreconditionError);
  auto [xs, vs] = sampled_tanh2(25.0, 0.0, 0.0, 101);
  auto bumpy = vs;
  bumpy[70] = bumpy[72];  // breaks strict monotonicity of the right flank
  EXPECT_THROW(make_tabulated(xs, bumpy, 1.0), PreconditionError);
  auto unsorted = xs;
  std::swap(unsorted[3], unsorted[4]);
  EXPECT_THROW(make_tabulated(unsorted, vs, 1.0), PreconditionError);
  std::vector<double> edge_min(vs.begin() + 50, vs.end());
  std::vector<double> edge_x(xs.begin() + 50, xs.end());
  EXPECT_THROW(make_tabulated(edge_x, edge_min, 1.0), PreconditionError);
  EXPECT_THROW(make_tabulated(xs, vs, 1.0, 40.0), PreconditionError);
}

TEST(Tabulated, OutsideGridThrows) {
  auto [xs, vs] = sampled_tanh2(25.0, 0.0, 0.0, 101);
  const auto m = make_tabulated(xs, vs, 1.0);
  EXPECT_THROW(m.evaluate(9.0), PreconditionError);
}
