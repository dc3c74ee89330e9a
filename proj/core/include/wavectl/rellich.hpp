#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "wavectl/fields.hpp"
#include "wavectl/geometry.hpp"

namespace wavectl {

struct ScalarFunction2D {
  std::function<double(const Point&)> value;
  std::function<Point(const Point&)> gradient;
  std::function<double(const Point&)> laplacian;
};

// Sum of terms a * sin(wx x + px) * sin(wy y + py).
struct TrigTerm {
  double amplitude = 1.0;
  double wx = 0.0;
  double wy = 0.0;
  double phase_x = 0.0;
  double phase_y = 0.0;
};
ScalarFunction2D trig_polynomial(std::vector<TrigTerm> terms);

struct RellichReport {
  double lhs = 0.0;
  double volume_term = 0.0;
  double boundary_term = 0.0;
  double defect = 0.0;
  double h = 0.0;
  std::optional<double> rho;
  std::optional<double> predicted_defect;
};

// Throws InvalidArgument if the gradient or Laplacian callables disagree with
// finite differences of `value` at 20 seeded random points inside `domain`.
void validate_scalar_function(const ScalarFunction2D& u, const PolygonDomain& domain);

RellichReport rellich_residual(const ScalarFunction2D& u, const MultiplierField& field,
                               const PolygonDomain& domain, double h);

// Defect on the punctured half disk {rho < r < 1, 0 < theta < pi} for the
// mixed singular function r^{1/2} sin(theta/2), Dirichlet on {x > 0},
// Neumann on {x < 0}.
RellichReport shamir_punctured(const MultiplierField& field, double rho, double h);

struct ShamirResult {
  double extrapolated = 0.0;
  double predicted = 0.0;
  double relative_gap = 0.0;
  double m_dot_tau = 0.0;
  bool converged = false;
  std::vector<double> rho_extrapolants;  // h -> 0 value for each rho
  std::vector<RellichReport> ladder;
};

inline const std::vector<double> kShamirRhos{0.1, 0.05, 0.025};

ShamirResult shamir_defect(const MultiplierField& field, std::span<const double> h_ladder,
                           std::span<const double> rhos = kShamirRhos);

}  // namespace wavectl
