#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "wavectl/fields.hpp"
#include "wavectl/geometry.hpp"
#include "wavectl/lattice.hpp"

namespace wavectl {

enum class NormalStencil { two_point, three_point };
std::string to_string(NormalStencil s);

// Neumann-labelled boundary node with an interior neighbour along -nu.
struct ControlNode {
  int node = 0;
  int edge = 0;
  double s = 0.0;        // arc-length position along the edge
  int inner = -1;        // interior index at distance h
  int inner2 = -1;       // interior index at distance 2h, -1 if on the boundary
};

// All-Dirichlet adjoint / Dirichlet-controlled wave problems on the unit
// square, with controls on the Neumann part of the partition of `field`.
class ControlProblem {
 public:
  ControlProblem(const MultiplierField& field, double h, double T, double dt = 0.0,
                 int samples_per_edge = 256);

  const Lattice& lattice() const { return lattice_; }
  const BoundaryLayout& layout() const { return layout_; }
  const std::vector<ControlNode>& controls() const { return controls_; }
  double h() const { return lattice_.h(); }
  double T() const { return T_; }
  double dt() const { return dt_; }
  int steps() const { return steps_; }
  double c_m() const { return c_m_; }
  double a0() const { return a0_; }
  double m_sup() const { return m_sup_; }
  double sup_m_dot_nu_neumann() const { return sup_mnu_; }
  double T0() const { return T0_; }
  int interior_size() const { return ni_; }

  Eigen::VectorXd restrict(const std::vector<double>& nodes) const;
  std::vector<double> extend(const Eigen::VectorXd& interior) const;
  Eigen::VectorXd apply_A(const Eigen::VectorXd& u) const { return A_ * u; }
  Eigen::VectorXd solve_A(const Eigen::VectorXd& u) const { return chol_->solve(u); }
  double l2(const Eigen::VectorXd& u) const;
  double hm1(const Eigen::VectorXd& u) const;

  // Outward normal derivative at the control nodes.
  Eigen::VectorXd normal_derivative(const Eigen::VectorXd& phi, NormalStencil s) const;
  // (C v): control values injected into the adjacent interior nodes, scaled 1/h^2.
  Eigen::VectorXd inject(const Eigen::VectorXd& v) const;

 private:
  Lattice lattice_;
  BoundaryLayout layout_;
  std::vector<ControlNode> controls_;
  Eigen::SparseMatrix<double> A_;
  std::shared_ptr<const Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> chol_;
  int ni_ = 0;
  double T_ = 0.0, dt_ = 0.0;
  int steps_ = 0;
  double c_m_ = 0.0, a0_ = 0.0, m_sup_ = 0.0, sup_mnu_ = 0.0, T0_ = 0.0;
};

struct AdjointRecord {
  std::vector<double> times;               // levels 0..N
  std::vector<Eigen::VectorXd> normal_trace;  // per level, per control node
  std::vector<double> energy;              // scheme energy per level
  double E0 = 0.0;
  double drift = 0.0;
  NormalStencil stencil = NormalStencil::three_point;
};

AdjointRecord adjoint_simulate(const ControlProblem& P, const Eigen::VectorXd& phi0,
                               const Eigen::VectorXd& phi1,
                               NormalStencil stencil = NormalStencil::three_point);

// Time-trapezoid, arc-length weighted integral of |d_nu phi|^2.
double boundary_flux(const ControlProblem& P, const AdjointRecord& rec);

struct ObservabilityReport {
  double E0 = 0.0;
  double flux = 0.0;
  double quotient = 0.0;
  double bound = 0.0;
  double T = 0.0;
  double T0 = 0.0;
  double c_m = 0.0;
  double m_sup = 0.0;
  double sup_m_dot_nu = 0.0;
  double conservation_drift = 0.0;
  double h = 0.0;
  std::string verdict;  // "verified", "violated", "inapplicable"
  std::string stencil;
};

ObservabilityReport observability_quotient(const ControlProblem& P, const Eigen::VectorXd& phi0,
                                           const Eigen::VectorXd& phi1);

struct HUMApplication {
  Eigen::VectorXd xi0;
  Eigen::VectorXd xi1;
  std::vector<Eigen::VectorXd> control;  // per level 0..N, per control node
  double observed_energy = 0.0;          // dt sum_n sum_j h |v|^2
};

HUMApplication hum_apply(const ControlProblem& P, const Eigen::VectorXd& e0,
                         const Eigen::VectorXd& e1);

// h^2 (a0.b0 + a1.b1)
double hum_pairing(const ControlProblem& P, const Eigen::VectorXd& a0, const Eigen::VectorXd& a1,
                   const Eigen::VectorXd& b0, const Eigen::VectorXd& b1);

struct FinalNorms {
  double l2_u = 0.0;
  double hm1_ut = 0.0;
  double combined() const;
};

struct HUMResult {
  std::vector<Eigen::VectorXd> control;
  std::vector<double> times;
  int cg_iterations = 0;
  double cg_residual = 0.0;
  std::vector<double> residual_history;
  bool converged = false;
  FinalNorms initial;
  FinalNorms final_state;
  double reduction_factor = 0.0;
  Eigen::VectorXd e0, e1;
};

HUMResult hum_solve(const ControlProblem& P, const Eigen::VectorXd& u0, const Eigen::VectorXd& u1,
                    double tol = 1e-6, int max_iter = 500);

FinalNorms verify_control(const ControlProblem& P, const Eigen::VectorXd& u0,
                          const Eigen::VectorXd& u1, const std::vector<Eigen::VectorXd>& v);

// Sum of sin(k pi x) sin(l pi y), 1 <= k, l <= kmax, Gaussian coefficients
// scaled by 1/(k^2 + l^2), on interior nodes.
Eigen::VectorXd low_frequency_data(const ControlProblem& P, std::uint64_t seed, int kmax = 4);
Eigen::VectorXd mode_data(const ControlProblem& P, int kx, int ky, double amplitude = 1.0);

}  // namespace wavectl
