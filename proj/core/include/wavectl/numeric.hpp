#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace wavectl {

inline constexpr double kPi = 3.14159265358979323846;

// Pairwise (cascade) summation; order-independent of thread layout.
double pairwise_sum(std::span<const double> values);

std::vector<double> linspace(double a, double b, std::size_t n);
std::vector<double> logspace(double log10_a, double log10_b, std::size_t n);

// Shortest round-trip decimal representation.
std::string format_double(double x);

// Ordinary least squares y = intercept + slope*x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace wavectl
