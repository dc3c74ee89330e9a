#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "wavectl/decay.hpp"
#include "wavectl/error.hpp"
#include "wavectl/numeric.hpp"

using namespace wavectl;

namespace {

EnergyTrace synthetic(const std::function<double(double)>& E, double T, int n, double t0 = 0.0) {
  EnergyTrace tr;
  for (int k = 0; k <= n; ++k) {
    const double t = t0 + (T - t0) * k / n;
    tr.rows.push_back(TraceRow{t, E(t), 0.0});
  }
  return tr;
}

struct Series {
  std::vector<double> t, E;
};

Series series(const std::function<double(double)>& E, double T, int n) {
  Series s;
  for (int k = 0; k <= n; ++k) {
    s.t.push_back(T * k / n);
    s.E.push_back(E(s.t.back()));
  }
  return s;
}

}  // namespace

TEST(FitExponential, ExactExponential) {
  const auto f = fit_exponential(synthetic([](double t) { return 3 * std::exp(-2 * t); }, 5, 100), 0, 5);
  EXPECT_NEAR(f.rate_or_exponent, 2.0, 1e-12);
  EXPECT_LT(f.goodness, 1e-12);
  EXPECT_EQ(f.verdict, "consistent");
  EXPECT_EQ(f.samples, 101);
}

TEST(FitExponential, OscillatingEnvelope) {
  const auto f = fit_exponential(
      synthetic([](double t) { return std::exp(-t) * (2 + std::cos(t)); }, 20, 400), 5, 20);
  EXPECT_NEAR(f.rate_or_exponent, 1.0, 0.05);
}

TEST(FitExponential, ConstantTraceIsNotDecaying) {
  const auto f = fit_exponential(synthetic([](double) { return 1.5; }, 10, 50), 0, 10);
  EXPECT_NEAR(f.rate_or_exponent, 0.0, 1e-14);
  EXPECT_EQ(f.verdict, "not decaying");
}

TEST(FitExponential, WindowChecks) {
  const auto tr = synthetic([](double t) { return std::exp(-t); }, 10, 100);
  EXPECT_THROW(fit_exponential(tr, 0, 0.5), InvalidArgument);
  const auto trunc = fit_exponential(synthetic([](double t) { return std::exp(-10 * t); }, 10, 1000), 0, 10);
  EXPECT_TRUE(trunc.truncated);
  EXPECT_NEAR(trunc.rate_or_exponent, 10.0, 1e-9);
}

TEST(FitPower, ExactPower) {
  const auto f = fit_power(synthetic([](double t) { return 5 / t; }, 100, 200, 1), 1, 100);
  EXPECT_NEAR(f.rate_or_exponent, -1.0, 1e-12);
  EXPECT_EQ(f.verdict, "decaying");
  EXPECT_THROW(fit_power(synthetic([](double t) { return 5 / (1 + t); }, 100, 200), 0, 100), InvalidArgument);
}

TEST(FitPower, TheoreticalExponentForCubicFeedback) {
  const auto f = fit_power(synthetic([](double t) { return 2 / t; }, 100, 200, 1), 1, 100, 3.0);
  EXPECT_DOUBLE_EQ(f.theoretical_exponent, -1.0);
  EXPECT_EQ(f.verdict, "consistent");
}

TEST(FitPower, DominantTermOnLateWindow) {
  const auto tr = synthetic([](double t) { return 1 / (t * t) + 1 / t; }, 1000, 900, 100);
  const auto f = fit_power(tr, 100, 1000);
  EXPECT_NEAR(f.rate_or_exponent, -1.0, 0.01);
}

TEST(FitPower, RecoversExponentTightly) {
  const auto f = fit_power(synthetic([](double t) { return 7 * std::pow(t, -0.37); }, 50, 100, 1), 1, 50);
  EXPECT_NEAR(f.rate_or_exponent, -0.37, 0.37e-10);
}

TEST(Komornik, ExponentialEqualityCase) {
  const double C = 2.5, E0 = 3.0;
  const auto s = series([&](double t) { return E0 * std::exp(-t / C); }, 60, 60000);
  const auto k = komornik_verify(s.t, s.E, 0.0);
  EXPECT_NEAR(k.C_best, C, 1e-6 * C);
  EXPECT_NEAR(k.T, C, 1e-6 * C);
  EXPECT_TRUE(k.conclusion_holds);
  EXPECT_LE(k.worst_ratio, 1.0);
  EXPECT_EQ(k.tail_model, "exponential");
  for (std::size_t i = 0; i < s.t.size(); i += 997) {
    if (s.t[i] >= k.T) EXPECT_LE(s.E[i], komornik_bound(E0, k.C_best, 0.0, s.t[i]) * (1 + 1e-12));
  }
}

TEST(Komornik, InverseSquareCase) {
  const double E0 = 2.0;
  const auto s = series([&](double t) { return E0 / ((1 + t) * (1 + t)); }, 100, 400000);
  const auto k = komornik_verify(s.t, s.E, 1.0);
  // Tail integral E0^2 / (3 (1 + t)^3) over E(t) = E0 / (3 (1 + t)), largest at t = 0.
  EXPECT_NEAR(k.C_best, E0 / 3, 1e-6 * E0 / 3);
  EXPECT_NEAR(k.t_at_sup, 0.0, 1e-12);
  EXPECT_NEAR(k.T, E0 * E0 / 3, 1e-6 * E0 * E0 / 3);
  EXPECT_TRUE(k.conclusion_holds);
}

TEST(Komornik, ZeroAndInvalidInput) {
  const std::vector<double> t{0, 1, 2}, zero{0, 0, 0}, up{1, 2, 3};
  const auto k = komornik_verify(t, zero, 0.0);
  EXPECT_EQ(k.C_best, 0.0);
  EXPECT_TRUE(k.conclusion_holds);
  EXPECT_THROW(komornik_verify(t, up, 0.0), InvalidArgument);
  EXPECT_THROW(komornik_verify(t, zero, -1.0), InvalidArgument);
}

TEST(Constants, DirichletPoincareConstant) {
  const Lattice lat(64);
  const auto r = estimate_constants(all_dirichlet_layout(lat));
  const double exact = 1 / (2 * kPi * kPi);
  EXPECT_NEAR(r.C_P, exact, 0.02 * exact);
  EXPECT_GT(r.C_Tr, 0.0);
  EXPECT_EQ(r.h, lat.h());
}

TEST(Constants, MonotoneInDirichletSet) {
  const Lattice lat(16);
  const auto D = BoundaryLabel::dirichlet, N = BoundaryLabel::neumann;
  const auto one = estimate_constants(layout_from_edge_labels(lat, {D, N, N, N}, nullptr));
  const auto two = estimate_constants(layout_from_edge_labels(lat, {D, N, N, D}, nullptr));
  EXPECT_LT(two.C_P, one.C_P);
  EXPECT_GT(one.C_Tr, 0.0);
  EXPECT_THROW(estimate_constants(layout_from_edge_labels(lat, {N, N, N, N}, nullptr)), InvalidArgument);
}

TEST(Constants, MeshConsistency) {
  std::vector<double> cp;
  for (int n : {8, 16, 32}) cp.push_back(estimate_constants(all_dirichlet_layout(Lattice(n))).C_P);
  // Successive differences shrink by the second-order factor 4 (up to O(h^2)).
  const double ratio = (std::abs(cp[0] - cp[1]) / cp[1]) / (std::abs(cp[1] - cp[2]) / cp[2]);
  EXPECT_GE(ratio, 3.5);
  EXPECT_LE(ratio, 4.5);
}

TEST(SpeedBound, DegenerateCubicTerm) {
  const auto grid = logspace(-3, 3, 601);
  const auto s = speed_bound(0.8, 1, 1, 1, 0, 0, grid);
  EXPECT_NEAR(s.lambda_star, 1.0, 1e-12);
  EXPECT_NEAR(s.theta_star, 0.4, 1e-12);
  EXPECT_NEAR(s.lambda_grid_star, 1.0, 1e-9);
  EXPECT_TRUE(s.in_bracket);
  EXPECT_LT(s.theta.front(), 1e-2 * s.theta_star);
  EXPECT_LT(s.theta.back(), 1e-2 * s.theta_star);
}

TEST(SpeedBound, UpperEndpointAttained) {
  const auto grid = logspace(-3, 3, 601);
  const auto s = speed_bound(1, 1, 4, 1, 0, 0, grid);
  EXPECT_NEAR(s.lambda_star, 2.0, 1e-12);
  EXPECT_NEAR(s.bracket_upper, 2.0, 1e-15);
  EXPECT_TRUE(s.in_bracket);
}

TEST(SpeedBound, StationaryPointAndBrackets) {
  const auto grid = linspace(0.01, 1.0, 100);
  const auto s = speed_bound(1, 1.3, 0.7, 1.1, 0.05, 4.0, grid);
  const double Q = 1.3 * 1.3 * 1.05 * 4.0;
  const double l = s.lambda_star;
  EXPECT_NEAR(0.5 * 1.1 * Q * l * l * l + 1.1 * l * l - 0.7, 0.0, 1e-12);
  const double eps = 1e-4;
  EXPECT_GE(s.theta_star, speed_theta(1, 1.3, 0.7, 1.1, 0.05, 4.0, l - eps));
  EXPECT_GE(s.theta_star, speed_theta(1, 1.3, 0.7, 1.1, 0.05, 4.0, l + eps));
  EXPECT_TRUE(s.in_corrected_bracket);
  EXPECT_THROW(speed_bound(1, 1, 0, 1, 0, 0, grid), InvalidArgument);
}
