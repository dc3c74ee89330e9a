#include <gtest/gtest.h>

#include <cmath>

#include "wavectl/error.hpp"
#include "wavectl/numeric.hpp"
#include "wavectl/rellich.hpp"

using namespace wavectl;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

MultiplierField radial(double x, double y) {
  return make_affine(Matrix::Identity(2, 2), Matrix::Zero(2, 2), v2(x, y));
}

MultiplierField constant_field(double a, double b) {
  return make_custom(
      2, [a, b](const Vector&) { return v2(a, b); }, [](const Vector&) { return Matrix(Matrix::Zero(2, 2)); },
      Box{v2(-1, -1), v2(1, 1)});
}

ScalarFunction2D linear_x() {
  return ScalarFunction2D{[](const Point& p) { return p.x(); }, [](const Point&) { return Point(1, 0); },
                          [](const Point&) { return 0.0; }};
}

const std::vector<double> kLadder{1.0 / 32, 1.0 / 64, 1.0 / 128};

}  // namespace

TEST(Rellich, ConstantFunctionHasNoTerms) {
  const ScalarFunction2D u{[](const Point&) { return 2.0; }, [](const Point&) { return Point(0, 0); },
                           [](const Point&) { return 0.0; }};
  const auto r = rellich_residual(u, radial(0, 0), unit_square(), 1.0 / 32);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.volume_term, 0.0);
  EXPECT_EQ(r.boundary_term, 0.0);
  EXPECT_EQ(r.defect, 0.0);
}

TEST(Rellich, LinearFunctionHandEvaluation) {
  // Edges: right 2 - 1 = 1, top -1, left and bottom 0.
  for (double h : {1.0 / 64, 1.0 / 128}) {
    const auto r = rellich_residual(linear_x(), radial(0, 0), unit_square(), h);
    EXPECT_NEAR(r.lhs, 0.0, 1e-14);
    EXPECT_NEAR(r.volume_term, 0.0, 1e-14);
    EXPECT_NEAR(r.boundary_term, 0.0, 1e-13);
    EXPECT_NEAR(r.defect, 0.0, 1e-13);
    EXPECT_EQ(r.defect, r.lhs - r.volume_term - r.boundary_term);
  }
}

TEST(Rellich, SecondOrderConvergenceOnSquare) {
  const auto u = trig_polynomial({{1.0, kPi, kPi, 0.0, 0.0}});
  const auto m = radial(0.5, 0.5);
  const double d64 = rellich_residual(u, m, unit_square(), 1.0 / 64).defect;
  const double d128 = rellich_residual(u, m, unit_square(), 1.0 / 128).defect;
  EXPECT_NEAR(d128 / d64, 0.25, 0.025);
}

TEST(Rellich, SecondOrderConvergenceOnTriangle) {
  const PolygonDomain tri({{0, 0}, {1, 0}, {0.3, 0.8}});
  const auto u = trig_polynomial({{1.0, 2.0, 1.5, 0.3, 0.1}, {0.5, 1.0, 3.0, 0.0, 0.7}});
  Matrix A1(2, 2), A2(2, 2);
  A1 << 1.5, 0.2, 0.2, 0.8;
  A2 << 0, 0.4, -0.4, 0;
  const auto m = make_affine(A1, A2, v2(0.2, 0.3));
  const double a = rellich_residual(u, m, tri, 1.0 / 64).defect;
  const double b = rellich_residual(u, m, tri, 1.0 / 128).defect;
  EXPECT_GE(std::log2(std::abs(a / b)), 1.8);
}

TEST(Rellich, LinearInTheField) {
  const auto u = trig_polynomial({{1.0, 2.0, 1.0, 0.4, 0.2}});
  const auto m1 = radial(0.2, 0.1);
  const auto m2 = make_rotated(kPi / 5, kPi / 3, v2(0.6, 0.3));
  Matrix S = m1.symmetric_part() + m2.symmetric_part();
  Matrix W = m1.skew_part() + m2.skew_part();
  const Vector c = -(m1.symmetric_part() * m1.origin()) -
                   (m2.symmetric_part() + m2.skew_part()) * m2.origin();
  const Vector x0 = (S + W).fullPivLu().solve(-c);
  const auto sum = make_affine(S, W, x0);
  const double h = 1.0 / 64;
  const double d = rellich_residual(u, sum, unit_square(), h).defect;
  const double d1 = rellich_residual(u, m1, unit_square(), h).defect;
  const double d2 = rellich_residual(u, m2, unit_square(), h).defect;
  EXPECT_NEAR(d, d1 + d2, 1e-10);
}

TEST(Rellich, Preconditions) {
  const auto u = trig_polynomial({{1.0, kPi, kPi, 0.0, 0.0}});
  EXPECT_THROW(rellich_residual(u, radial(0, 0), unit_square(), 0.1), InvalidArgument);
  ScalarFunction2D bad = u;
  bad.gradient = [](const Point&) { return Point(1, 1); };
  EXPECT_THROW(rellich_residual(bad, radial(0, 0), unit_square(), 1.0 / 32), InvalidArgument);
  EXPECT_THROW(validate_scalar_function(bad, unit_square()), InvalidArgument);
}

TEST(Shamir, VanishingFieldAtTip) {
  const auto r = shamir_defect(radial(0, 0), kLadder);
  EXPECT_EQ(r.predicted, 0.0);
  EXPECT_NEAR(r.extrapolated, 0.0, 1e-6);
}

TEST(Shamir, ConstantFieldsMatchPrediction) {
  const auto plus = shamir_defect(constant_field(1, 0), kLadder);
  EXPECT_NEAR(plus.predicted, kPi / 4, 1e-15);
  EXPECT_NEAR(plus.extrapolated, kPi / 4, 0.02 * kPi / 4);
  EXPECT_TRUE(plus.converged);
  const auto minus = shamir_defect(constant_field(-1, 0), kLadder);
  EXPECT_LT(minus.extrapolated, 0.0);
  EXPECT_NEAR(minus.extrapolated, -kPi / 4, 0.02 * kPi / 4);
  for (double a : {0.3, -2.0}) {
    const auto s = shamir_defect(constant_field(a, 0), kLadder);
    EXPECT_EQ(std::signbit(s.extrapolated), std::signbit(a));
  }
}

TEST(Shamir, ReportsAndPreconditions) {
  const auto r = shamir_punctured(constant_field(1, 0), 0.1, 1.0 / 32);
  ASSERT_TRUE(r.rho.has_value());
  EXPECT_EQ(*r.rho, 0.1);
  ASSERT_TRUE(r.predicted_defect.has_value());
  EXPECT_THROW(shamir_defect(constant_field(1, 0.5), kLadder), InvalidArgument);
  const std::vector<double> uneven{1.0 / 32, 1.0 / 48.5};
  EXPECT_THROW(shamir_defect(constant_field(1, 0), uneven), InvalidArgument);
}
