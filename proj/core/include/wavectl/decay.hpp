#pragma once

#include <span>
#include <string>
#include <vector>

#include "wavectl/lattice.hpp"
#include "wavectl/wavesim.hpp"

namespace wavectl {

enum class DecayModel { exponential, power };
std::string to_string(DecayModel m);

struct DecayFit {
  DecayModel model = DecayModel::exponential;
  double t1 = 0.0;
  double t2 = 0.0;
  double rate_or_exponent = 0.0;  // exponential: rate = -slope; power: exponent = slope
  double intercept = 0.0;
  double goodness = 0.0;          // max |residual| of the transformed fit
  int samples = 0;
  bool truncated = false;         // stopped at E <= 1e-14 E(0)
  std::string verdict;
  double theoretical_exponent = 0.0;  // power fits with p set
};

DecayFit fit_exponential(const EnergyTrace& trace, double t1, double t2);
// `p` > 1 sets the comparison exponent -2/(p-1); pass 0 to skip.
DecayFit fit_power(const EnergyTrace& trace, double t1, double t2, double p = 0.0);

struct KomornikResult {
  double C_best = 0.0;
  double t_at_sup = 0.0;
  double T = 0.0;
  double alpha = 0.0;
  bool conclusion_holds = true;
  double worst_ratio = 0.0;  // max over t >= T of E(t)/bound(t)
  double tail_estimate = 0.0;
  std::string tail_model;     // "exponential", "power" or "none"
};

// E sampled on increasing times, non-increasing within 1e-12 relative.
KomornikResult komornik_verify(std::span<const double> t, std::span<const double> E, double alpha);
double komornik_bound(double E0, double C, double alpha, double t);

struct ConstantsReport {
  double C_P = 0.0;
  double C_Tr = 0.0;
  double h = 0.0;
  int poincare_iterations = 0;
  int trace_iterations = 0;
  double poincare_residual = 0.0;
  double trace_residual = 0.0;
};

ConstantsReport estimate_constants(const BoundaryLayout& layout);

struct SpeedBound {
  std::vector<double> lambda;
  std::vector<double> theta;
  double lambda_grid_star = 0.0;  // argmax on the grid
  double lambda_star = 0.0;       // stationary point of the denominator
  double theta_star = 0.0;
  double bracket_lower = 0.0;
  double bracket_upper = 0.0;
  bool in_bracket = false;
  double corrected_lower = 0.0;
  bool in_corrected_bracket = false;
};

double speed_theta(double c_m, double a0, double k_minus, double k_plus, double C_P, double C_Tr,
                   double lambda);

SpeedBound speed_bound(double c_m, double a0, double k_minus, double k_plus, double C_P,
                       double C_Tr, std::span<const double> lambda_grid);

}  // namespace wavectl
