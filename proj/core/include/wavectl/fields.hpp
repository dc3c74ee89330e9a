#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wavectl/error.hpp"

namespace wavectl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class FieldFamily { affine, rotated2d, perturbed, custom };

std::string to_string(FieldFamily f);

// Axis-aligned box [lo, hi].
struct Box {
  Vector lo;
  Vector hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double diameter() const { return (hi - lo).norm(); }
  bool contains(const Vector& x, double tol = 1e-12) const;

  static Box unit(int n);
};

// Smooth perturbation F with its Jacobian. `spec` is a JSON description used
// for serialization; empty for programmatic perturbations.
struct Perturbation {
  std::function<Vector(const Vector&)> value;
  std::function<Matrix(const Vector&)> jacobian;
  std::string spec;
};

struct FieldEvaluation {
  Vector m;
  Matrix grad;
  bool approximate = false;
};

// m(x) = L (x - x0) + F(x), where L = S + W with S symmetric and W skew.
// Either part may be absent (custom fields have no linear part).
class MultiplierField {
 public:
  MultiplierField() = default;

  int dim() const { return dim_; }
  FieldFamily family() const { return family_; }
  const Box& bounds() const { return bounds_; }

  Vector value(const Vector& x) const;
  Matrix gradient(const Vector& x) const;
  Matrix symmetric_gradient(const Vector& x) const;
  double divergence(const Vector& x) const;
  FieldEvaluation evaluate(const Vector& x) const;

  bool gradient_is_approximate() const;
  bool has_constant_gradient() const;

  // Family parameters (meaningful for the family that set them).
  const Matrix& symmetric_part() const { return sym_; }
  const Matrix& skew_part() const { return skew_; }
  const Vector& origin() const { return x0_; }
  double theta1() const { return theta1_; }
  double theta2() const { return theta2_; }
  double d() const { return d_; }
  double scale_factor() const { return scale_; }
  const Perturbation& perturbation() const { return pert_; }

  friend MultiplierField make_affine(const Matrix&, const Matrix&, const Vector&);
  friend MultiplierField make_rotated(double, double, const Vector&);
  friend MultiplierField make_perturbed(double, const Matrix&, const Vector&,
                                        Perturbation, const Box&, double);
  friend MultiplierField make_custom(int, std::function<Vector(const Vector&)>,
                                     std::function<Matrix(const Vector&)>, Box);
  friend MultiplierField scale(const MultiplierField&, double);

 private:
  int dim_ = 0;
  FieldFamily family_ = FieldFamily::custom;
  bool linear_ = false;
  Matrix sym_;
  Matrix skew_;
  Vector x0_;
  Perturbation pert_;
  double scale_ = 1.0;
  double theta1_ = 0.0;
  double theta2_ = 0.0;
  double d_ = 0.0;
  Box bounds_;
};

MultiplierField make_affine(const Matrix& A1, const Matrix& A2, const Vector& x0);
MultiplierField make_rotated(double theta1, double theta2, const Vector& x0);

// Accepted only if the sampled sup of ||(grad F)^s||_2 over `box` (grid spacing
// `resolution`) is below d/n.
MultiplierField make_perturbed(double d, const Matrix& A, const Vector& x0,
                               Perturbation F, const Box& box, double resolution);

// Custom field; if `jacobian` is empty, central differences are used.
MultiplierField make_custom(int dim, std::function<Vector(const Vector&)> value,
                            std::function<Matrix(const Vector&)> jacobian, Box bounds);

MultiplierField scale(const MultiplierField& field, double lambda);

FieldEvaluation evaluate(const MultiplierField& field, const Vector& x);

double lambda_min(const MultiplierField& field, const Vector& x);

// Smallest eigenvalue of a symmetric matrix.
double symmetric_lambda_min(const Matrix& S);

struct ConeReport {
  double essinf_div = 0.0;
  double esssup_div_minus_2lambda = 0.0;
  double c_m = 0.0;
  double a0 = 0.0;
  bool satisfied = false;
  Vector witness_inf_div;
  Vector witness_sup_div_minus_2lambda;
  double resolution = 0.0;
  long long samples = 0;
  bool approximate = false;
};

ConeReport cone_check(const MultiplierField& field, const Box& box, double resolution);

// Thrown by make_perturbed; carries the offending sample.
class PerturbationTooLarge : public InvalidArgument {
 public:
  PerturbationTooLarge(const std::string& what, Vector witness, double norm)
      : InvalidArgument(what), witness_(std::move(witness)), norm_(norm) {}
  const Vector& witness() const { return witness_; }
  double norm() const { return norm_; }

 private:
  Vector witness_;
  double norm_;
};

// Uniform sample grid helper shared by cone_check and make_perturbed.
struct SampleGrid {
  Box box;
  double spacing;
  std::vector<int> intervals;  // per axis

  SampleGrid(const Box& b, double resolution);
  long long count() const;
  Vector point(long long flat) const;
};

}  // namespace wavectl
