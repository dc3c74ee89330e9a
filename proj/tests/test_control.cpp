#include <gtest/gtest.h>

#include <cmath>

#include "wavectl/control.hpp"
#include "wavectl/error.hpp"

using namespace wavectl;

namespace {

MultiplierField near_corner_field() {
  Vector x0(2);
  x0 << -0.1, -0.1;
  return make_affine(Matrix::Identity(2, 2), Matrix::Zero(2, 2), x0);
}

const double kT0 = 2 * 1.1 * std::sqrt(2.0);

Eigen::VectorXd zeros(const ControlProblem& P) { return Eigen::VectorXd::Zero(P.interior_size()); }

}  // namespace

TEST(ControlProblem, ThresholdTime) {
  const ControlProblem P(near_corner_field(), 1.0 / 16, 1.0);
  EXPECT_NEAR(P.m_sup(), 1.1 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(P.c_m(), 1.0, 1e-12);
  EXPECT_NEAR(P.T0(), kT0, 1e-10);
  EXPECT_NEAR(P.T0(), 3.11127, 1e-5);
  EXPECT_NEAR(P.sup_m_dot_nu_neumann(), 1.1, 1e-12);
  EXPECT_EQ(P.interior_size(), 15 * 15);
  // Right and top edges without corners.
  EXPECT_EQ(P.controls().size(), 30u);
  EXPECT_LE(P.dt(), 0.4 * P.h() * (1 + 1e-12));
  EXPECT_NEAR(P.steps() * P.dt(), 1.0, 1e-12);
  for (const auto& c : P.controls()) EXPECT_TRUE(c.edge == 1 || c.edge == 2);
}

TEST(Adjoint, StandingModeConservation) {
  const ControlProblem P(near_corner_field(), 1.0 / 128, 2.0);
  const auto rec = adjoint_simulate(P, mode_data(P, 1, 1), zeros(P));
  EXPECT_LE(rec.drift, 1e-3);
  EXPECT_EQ(rec.times.size(), static_cast<std::size_t>(P.steps() + 1));
  EXPECT_EQ(rec.normal_trace.size(), rec.times.size());
}

TEST(Adjoint, ZeroDataZeroTrace) {
  const ControlProblem P(near_corner_field(), 1.0 / 32, 1.0);
  const auto rec = adjoint_simulate(P, zeros(P), zeros(P));
  EXPECT_EQ(rec.drift, 0.0);
  EXPECT_EQ(rec.E0, 0.0);
  EXPECT_EQ(boundary_flux(P, rec), 0.0);
}

TEST(Adjoint, VelocityDataEnergy) {
  const ControlProblem P(near_corner_field(), 1.0 / 128, 2.0);
  const Eigen::VectorXd phi1 = mode_data(P, 1, 1);
  const auto rec = adjoint_simulate(P, zeros(P), phi1);
  EXPECT_NEAR(rec.E0, 0.5 * P.h() * P.h() * phi1.squaredNorm(), 1e-14);
  EXPECT_LE(rec.drift, 1e-3);
}

TEST(Adjoint, RejectsWrongSize) {
  const ControlProblem P(near_corner_field(), 1.0 / 16, 1.0);
  EXPECT_THROW(adjoint_simulate(P, Eigen::VectorXd::Zero(3), zeros(P)), InvalidArgument);
}

TEST(Observability, FirstModeVerifiedAtTwiceThreshold) {
  const ControlProblem P(near_corner_field(), 1.0 / 64, 2 * kT0);
  const auto r = observability_quotient(P, mode_data(P, 1, 1), zeros(P));
  EXPECT_EQ(r.verdict, "verified");
  EXPECT_LE(r.quotient, 1.05 * r.bound);
  EXPECT_GE(r.quotient, 0.0);
  EXPECT_NEAR(r.bound, 1.1 / (2 * (2 * kT0 - 2 * 1.1 * std::sqrt(2.0))), 1e-10);
}

TEST(Observability, BelowThresholdIsInapplicable) {
  const ControlProblem P(near_corner_field(), 1.0 / 32, kT0 / 2);
  const auto r = observability_quotient(P, mode_data(P, 1, 1), zeros(P));
  EXPECT_EQ(r.verdict, "inapplicable");
  EXPECT_TRUE(std::isinf(r.bound));
}

TEST(Observability, LowFrequencyDataAboveOnePointFiveThreshold) {
  const ControlProblem P(near_corner_field(), 1.0 / 32, 1.5 * kT0);
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto r = observability_quotient(P, low_frequency_data(P, s), low_frequency_data(P, 50 + s));
    EXPECT_EQ(r.verdict, "verified") << "seed " << s;
  }
}

TEST(HUM, ZeroDataGivesZero) {
  const ControlProblem P(near_corner_field(), 1.0 / 16, 3 * kT0);
  const auto a = hum_apply(P, zeros(P), zeros(P));
  EXPECT_EQ(a.xi0.norm(), 0.0);
  EXPECT_EQ(a.xi1.norm(), 0.0);
  const auto r = hum_solve(P, zeros(P), zeros(P));
  EXPECT_EQ(r.reduction_factor, 0.0);
  EXPECT_TRUE(r.converged);
  for (const auto& v : r.control) EXPECT_EQ(v.norm(), 0.0);
}

TEST(HUM, OperatorSymmetricAndPositive) {
  const ControlProblem P(near_corner_field(), 1.0 / 32, 3 * kT0);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Eigen::VectorXd e0 = low_frequency_data(P, 4 * s), e1 = low_frequency_data(P, 4 * s + 1);
    const Eigen::VectorXd f0 = low_frequency_data(P, 4 * s + 2), f1 = low_frequency_data(P, 4 * s + 3);
    const auto le = hum_apply(P, e0, e1);
    const auto lf = hum_apply(P, f0, f1);
    const double ab = hum_pairing(P, le.xi0, le.xi1, f0, f1);
    const double ba = hum_pairing(P, lf.xi0, lf.xi1, e0, e1);
    EXPECT_LE(std::abs(ab - ba), 1e-8 * std::abs(ab));
    const double self = hum_pairing(P, le.xi0, le.xi1, e0, e1);
    EXPECT_GT(self, 0.0);
    EXPECT_NEAR(self, le.observed_energy, 1e-10 * self);
  }
}

TEST(HUM, FirstModeIsControlled) {
  const ControlProblem P(near_corner_field(), 1.0 / 32, 3 * kT0);
  const auto r = hum_solve(P, mode_data(P, 1, 1), zeros(P), 1e-6, 500);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.cg_residual, 1e-6);
  EXPECT_LE(r.reduction_factor, 0.02);
  for (std::size_t k = 1; k < r.residual_history.size(); ++k) {
    EXPECT_LE(r.residual_history[k], r.residual_history[k - 1] * (1 + 1e-12));
  }
  const FinalNorms again = verify_control(P, mode_data(P, 1, 1), zeros(P), r.control);
  EXPECT_EQ(again.l2_u, r.final_state.l2_u);
  EXPECT_EQ(again.hm1_ut, r.final_state.hm1_ut);
  EXPECT_EQ(r.control.size(), static_cast<std::size_t>(P.steps() + 1));
}

TEST(HUM, LongerHorizonControlsBetterAtFixedBudget) {
  const ControlProblem P2(near_corner_field(), 1.0 / 32, 2 * kT0);
  const ControlProblem P3(near_corner_field(), 1.0 / 32, 3 * kT0);
  const auto r2 = hum_solve(P2, mode_data(P2, 1, 1), zeros(P2), 1e-12, 20);
  const auto r3 = hum_solve(P3, mode_data(P3, 1, 1), zeros(P3), 1e-12, 20);
  EXPECT_LT(r3.reduction_factor, r2.reduction_factor);
}

TEST(HUM, BelowThresholdRejected) {
  const ControlProblem P(near_corner_field(), 1.0 / 16, kT0 / 2);
  EXPECT_THROW(hum_solve(P, mode_data(P, 1, 1), zeros(P)), Inapplicable);
}

TEST(VerifyControl, Examples) {
  const ControlProblem P(near_corner_field(), 1.0 / 16, 2.0);
  const auto nc = static_cast<Eigen::Index>(P.controls().size());
  std::vector<Eigen::VectorXd> zero(P.steps() + 1, Eigen::VectorXd::Zero(nc));
  const auto z = verify_control(P, zeros(P), zeros(P), zero);
  EXPECT_EQ(z.l2_u, 0.0);
  EXPECT_EQ(z.hm1_ut, 0.0);
  std::vector<Eigen::VectorXd> rnd(P.steps() + 1);
  for (std::size_t k = 0; k < rnd.size(); ++k) rnd[k] = Eigen::VectorXd::Constant(nc, std::sin(0.3 * k));
  EXPECT_GT(verify_control(P, zeros(P), zeros(P), rnd).combined(), 0.0);
  zero.pop_back();
  EXPECT_THROW(verify_control(P, zeros(P), zeros(P), zero), InvalidArgument);
}
