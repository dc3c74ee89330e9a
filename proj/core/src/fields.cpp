#include "wavectl/fields.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "wavectl/error.hpp"

namespace wavectl {

namespace {

constexpr double kSkewTol = 1e-12;
constexpr double kPivotTol = 1e-12;

void require_square(const Matrix& A, int n, const char* what) {
  if (A.rows() != n || A.cols() != n) {
    std::ostringstream os;
    os << what << ": expected " << n << "x" << n << " matrix, got " << A.rows() << "x"
       << A.cols();
    throw InvalidArgument(os.str());
  }
}

void require_skew(const Matrix& A, const char* what) {
  if (((A + A.transpose()).array().abs() > kSkewTol).any()) {
    throw InvalidArgument(std::string(what) + ": matrix is not skew-symmetric");
  }
}

Box infinite_box(int n) {
  const double inf = std::numeric_limits<double>::infinity();
  return Box{Vector::Constant(n, -inf), Vector::Constant(n, inf)};
}

double fd_step(const Box& b) {
  const double diam = b.diameter();
  return 1e-6 * (std::isfinite(diam) && diam > 0.0 ? diam : 1.0);
}

}  // namespace

std::string to_string(FieldFamily f) {
  switch (f) {
    case FieldFamily::affine:
      return "affine";
    case FieldFamily::rotated2d:
      return "rotated2d";
    case FieldFamily::perturbed:
      return "perturbed";
    case FieldFamily::custom:
      return "custom";
  }
  return "custom";
}

bool Box::contains(const Vector& x, double tol) const {
  if (x.size() != lo.size()) return false;
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] < lo[i] - tol || x[i] > hi[i] + tol) return false;
  }
  return true;
}

Box Box::unit(int n) { return Box{Vector::Zero(n), Vector::Ones(n)}; }

SampleGrid::SampleGrid(const Box& b, double resolution) : box(b), spacing(resolution) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw InvalidArgument("sample grid: resolution must be positive and finite");
  }
  if (b.lo.size() != b.hi.size() || b.lo.size() == 0) {
    throw InvalidArgument("sample grid: malformed box");
  }
  for (int i = 0; i < b.dim(); ++i) {
    const double side = b.hi[i] - b.lo[i];
    if (!(side > 0.0) || !std::isfinite(side)) {
      throw InvalidArgument("sample grid: box sides must be positive and finite");
    }
    const double k = std::round(side / resolution);
    if (std::abs(k * resolution - side) > 1e-9 * side) {
      throw InvalidArgument("sample grid: resolution does not divide the box");
    }
    if (k + 1 < 8) {
      throw InvalidArgument("sample grid: fewer than 8 samples per axis");
    }
    intervals.push_back(static_cast<int>(k));
  }
}

long long SampleGrid::count() const {
  long long c = 1;
  for (int k : intervals) c *= (k + 1);
  return c;
}

Vector SampleGrid::point(long long flat) const {
  Vector x(box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    const long long per = intervals[i] + 1;
    const long long idx = flat % per;
    flat /= per;
    x[i] = idx == intervals[i] ? box.hi[i] : box.lo[i] + static_cast<double>(idx) * spacing;
  }
  return x;
}

Vector MultiplierField::value(const Vector& x) const {
  Vector r = Vector::Zero(dim_);
  if (linear_) r = sym_ * (x - x0_) + skew_ * (x - x0_);
  if (pert_.value) r += pert_.value(x);
  return scale_ * r;
}

Matrix MultiplierField::gradient(const Vector& x) const {
  Matrix g = Matrix::Zero(dim_, dim_);
  if (linear_) g = sym_ + skew_;
  if (pert_.value) {
    if (pert_.jacobian) {
      g += pert_.jacobian(x);
    } else {
      const double eps = fd_step(bounds_);
      for (int j = 0; j < dim_; ++j) {
        Vector xp = x, xm = x;
        xp[j] += eps;
        xm[j] -= eps;
        g.col(j) += (pert_.value(xp) - pert_.value(xm)) / (2.0 * eps);
      }
    }
  }
  return scale_ * g;
}

Matrix MultiplierField::symmetric_gradient(const Vector& x) const {
  if (!pert_.value) return scale_ * sym_;
  Matrix g = gradient(x);
  Matrix s = 0.5 * (g + g.transpose());
  return s;
}

double MultiplierField::divergence(const Vector& x) const {
  return symmetric_gradient(x).trace();
}

FieldEvaluation MultiplierField::evaluate(const Vector& x) const {
  return FieldEvaluation{value(x), gradient(x), gradient_is_approximate()};
}

bool MultiplierField::gradient_is_approximate() const {
  return pert_.value && !pert_.jacobian;
}

bool MultiplierField::has_constant_gradient() const { return !pert_.value; }

MultiplierField make_affine(const Matrix& A1, const Matrix& A2, const Vector& x0) {
  const int n = static_cast<int>(x0.size());
  if (n < 2) throw InvalidArgument("make_affine: dimension must be at least 2");
  require_square(A1, n, "make_affine A1");
  require_square(A2, n, "make_affine A2");
  if (((A1 - A1.transpose()).array().abs() > kSkewTol).any()) {
    throw InvalidArgument("make_affine: A1 is not symmetric");
  }
  require_skew(A2, "make_affine A2");
  Matrix S = 0.5 * (A1 + A1.transpose());
  Eigen::LDLT<Matrix> ldlt(S);
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= kPivotTol * scale) {
    throw InvalidArgument("make_affine: A1 is not positive definite");
  }
  MultiplierField f;
  f.dim_ = n;
  f.family_ = FieldFamily::affine;
  f.linear_ = true;
  f.sym_ = S;
  f.skew_ = 0.5 * (A2 - A2.transpose());
  f.x0_ = x0;
  f.bounds_ = infinite_box(n);
  return f;
}

MultiplierField make_rotated(double theta1, double theta2, const Vector& x0) {
  const double half_pi = 0.5 * 3.14159265358979323846;
  for (double t : {theta1, theta2}) {
    if (!(t > 0.0 && t < half_pi)) {
      throw InvalidArgument("make_rotated: angles must lie in the open interval (0, pi/2)");
    }
  }
  if (x0.size() != 2) throw InvalidArgument("make_rotated: x0 must be 2-dimensional");
  MultiplierField f;
  f.dim_ = 2;
  f.family_ = FieldFamily::rotated2d;
  f.linear_ = true;
  f.sym_ = Matrix::Zero(2, 2);
  f.sym_(0, 0) = 1.0 / std::tan(theta1);
  f.sym_(1, 1) = 1.0 / std::tan(theta2);
  f.skew_ = Matrix::Zero(2, 2);
  f.skew_(0, 1) = -1.0;
  f.skew_(1, 0) = 1.0;
  f.x0_ = x0;
  f.theta1_ = theta1;
  f.theta2_ = theta2;
  f.bounds_ = infinite_box(2);
  return f;
}

MultiplierField make_perturbed(double d, const Matrix& A, const Vector& x0, Perturbation F,
                               const Box& box, double resolution) {
  const int n = static_cast<int>(x0.size());
  if (n < 2) throw InvalidArgument("make_perturbed: dimension must be at least 2");
  if (!(d > 0.0)) throw InvalidArgument("make_perturbed: d must be positive");
  require_square(A, n, "make_perturbed A");
  require_skew(A, "make_perturbed A");
  if (!F.value || !F.jacobian) {
    throw InvalidArgument("make_perturbed: perturbation needs value and jacobian");
  }
  if (box.dim() != n) throw InvalidArgument("make_perturbed: box dimension mismatch");
  SampleGrid grid(box, resolution);
  const double limit = d / static_cast<double>(n);
  for (long long k = 0; k < grid.count(); ++k) {
    const Vector x = grid.point(k);
    const Matrix J = F.jacobian(x);
    const Matrix Js = 0.5 * (J + J.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(Js, Eigen::EigenvaluesOnly);
    const double norm = es.eigenvalues().cwiseAbs().maxCoeff();
    if (norm >= limit) {
      std::ostringstream os;
      os << "make_perturbed: sampled ||(grad F)^s||_2 = " << norm << " >= d/n = " << limit
         << " at x = (";
      for (int i = 0; i < n; ++i) os << (i ? ", " : "") << x[i];
      os << ")";
      throw PerturbationTooLarge(os.str(), x, norm);
    }
  }
  MultiplierField f;
  f.dim_ = n;
  f.family_ = FieldFamily::perturbed;
  f.linear_ = true;
  f.sym_ = d * Matrix::Identity(n, n);
  f.skew_ = 0.5 * (A - A.transpose());
  f.x0_ = x0;
  f.pert_ = std::move(F);
  f.d_ = d;
  f.bounds_ = box;
  return f;
}

MultiplierField make_custom(int dim, std::function<Vector(const Vector&)> value,
                            std::function<Matrix(const Vector&)> jacobian, Box bounds) {
  if (dim < 2) throw InvalidArgument("make_custom: dimension must be at least 2");
  if (!value) throw InvalidArgument("make_custom: value callable required");
  if (bounds.dim() != dim) throw InvalidArgument("make_custom: bounds dimension mismatch");
  MultiplierField f;
  f.dim_ = dim;
  f.family_ = FieldFamily::custom;
  f.linear_ = false;
  f.sym_ = Matrix::Zero(dim, dim);
  f.skew_ = Matrix::Zero(dim, dim);
  f.x0_ = Vector::Zero(dim);
  f.pert_ = Perturbation{std::move(value), std::move(jacobian), {}};
  f.bounds_ = std::move(bounds);
  return f;
}

MultiplierField scale(const MultiplierField& field, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("scale: lambda must be positive and finite");
  }
  MultiplierField f = field;
  f.scale_ *= lambda;
  return f;
}

FieldEvaluation evaluate(const MultiplierField& field, const Vector& x) {
  if (x.size() != field.dim()) throw InvalidArgument("evaluate: point dimension mismatch");
  return field.evaluate(x);
}

double symmetric_lambda_min(const Matrix& S) {
  if (S.rows() == 2) {
    const double a = S(0, 0), b = 0.5 * (S(0, 1) + S(1, 0)), c = S(1, 1);
    return 0.5 * (a + c) - std::hypot(0.5 * (a - c), b);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

double lambda_min(const MultiplierField& field, const Vector& x) {
  return symmetric_lambda_min(field.symmetric_gradient(x));
}

ConeReport cone_check(const MultiplierField& field, const Box& box, double resolution) {
  if (box.dim() != field.dim()) throw InvalidArgument("cone_check: box dimension mismatch");
  SampleGrid grid(box, resolution);
  ConeReport r;
  r.resolution = resolution;
  r.samples = grid.count();
  r.approximate = field.gradient_is_approximate();
  r.essinf_div = std::numeric_limits<double>::infinity();
  r.esssup_div_minus_2lambda = -std::numeric_limits<double>::infinity();
  for (long long k = 0; k < grid.count(); ++k) {
    const Vector x = grid.point(k);
    const Matrix S = field.symmetric_gradient(x);
    const double div = S.trace();
    const double lam = symmetric_lambda_min(S);
    const double gap = div - 2.0 * lam;
    if (div < r.essinf_div) {
      r.essinf_div = div;
      r.witness_inf_div = x;
    }
    if (gap > r.esssup_div_minus_2lambda) {
      r.esssup_div_minus_2lambda = gap;
      r.witness_sup_div_minus_2lambda = x;
    }
  }
  r.c_m = 0.5 * (r.essinf_div - r.esssup_div_minus_2lambda);
  r.a0 = 0.5 * (r.essinf_div + r.esssup_div_minus_2lambda);
  r.satisfied = r.c_m > 0.0;
  return r;
}

}  // namespace wavectl
