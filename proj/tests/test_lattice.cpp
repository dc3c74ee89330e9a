#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "wavectl/error.hpp"
#include "wavectl/lattice.hpp"
#include "wavectl/numeric.hpp"

using namespace wavectl;

namespace {

MultiplierField corner_field() {
  Vector x0(2);
  x0 << -1, -1;
  return make_affine(Matrix::Identity(2, 2), Matrix::Zero(2, 2), x0);
}

}  // namespace

TEST(Lattice, Indexing) {
  const Lattice lat = Lattice::from_spacing(0.25);
  EXPECT_EQ(lat.n(), 4);
  EXPECT_EQ(lat.nodes(), 25);
  EXPECT_EQ(lat.index(2, 3), 17);
  EXPECT_EQ(lat.i_of(17), 2);
  EXPECT_EQ(lat.j_of(17), 3);
  EXPECT_TRUE(lat.point(17).isApprox(Point(0.5, 0.75)));
  EXPECT_TRUE(lat.on_boundary(lat.index(0, 2)));
  EXPECT_FALSE(lat.on_boundary(lat.index(1, 2)));
  EXPECT_THROW(Lattice::from_spacing(0.3), InvalidArgument);
  EXPECT_EQ(boundary_nodes(lat).size(), 16u);
}

TEST(Lattice, SnapCornerField) {
  const Lattice lat(8);
  const auto f = corner_field();
  const auto L = snap_partition(lat, partition(f, unit_square(), 64), f);
  EXPECT_EQ(L.kind[lat.index(8, 8)], NodeKind::neumann);
  EXPECT_EQ(L.kind[lat.index(8, 0)], NodeKind::dirichlet);
  EXPECT_EQ(L.kind[lat.index(0, 8)], NodeKind::dirichlet);
  EXPECT_EQ(L.kind[lat.index(8, 3)], NodeKind::neumann);
  EXPECT_EQ(L.kind[lat.index(3, 0)], NodeKind::dirichlet);
  EXPECT_EQ(L.kind[lat.index(3, 3)], NodeKind::interior);
  EXPECT_EQ(L.count(NodeKind::neumann), 15);
  const double h = lat.h();
  // Right edge node at y: m.nu = x + 1 = 2.
  EXPECT_NEAR(L.damping[lat.index(8, 3)], 2.0 * h, 1e-15);
  // Top-right corner: two half edges with m.nu = 2 each.
  EXPECT_NEAR(L.damping[lat.index(8, 8)], 2.0 * h, 1e-15);
  EXPECT_NEAR(L.mass[lat.index(8, 8)], 0.25 * h * h, 1e-18);
  EXPECT_NEAR(L.mass[lat.index(8, 3)], 0.5 * h * h, 1e-18);
  EXPECT_NEAR(L.mass[lat.index(3, 3)], h * h, 1e-18);
}

TEST(Lattice, StiffnessMatrixMatchesMatrixFree) {
  const Lattice lat(6);
  const auto K = stiffness_matrix(lat);
  Eigen::MatrixXd D(K);
  EXPECT_LT((D - D.transpose()).norm(), 1e-14);
  std::vector<double> u(lat.nodes()), out(lat.nodes());
  for (int k = 0; k < lat.nodes(); ++k) u[k] = std::sin(1.0 + 0.37 * k);
  apply_stiffness(lat, u, out);
  const Eigen::VectorXd Ku = K * Eigen::Map<const Eigen::VectorXd>(u.data(), lat.nodes());
  for (int k = 0; k < lat.nodes(); ++k) EXPECT_NEAR(out[k], Ku[k], 1e-12);
  // Constants are in the kernel of the Neumann stiffness.
  std::vector<double> one(lat.nodes(), 1.0);
  apply_stiffness(lat, one, out);
  for (double x : out) EXPECT_NEAR(x, 0.0, 1e-13);
}

TEST(Lattice, DirichletLaplacianLowestEigenvalue) {
  const Lattice lat(16);
  Eigen::MatrixXd A(dirichlet_laplacian(lat));
  EXPECT_EQ(A.rows(), interior_count(lat));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  const double h = lat.h();
  const double exact = 8.0 / (h * h) * std::pow(std::sin(kPi * h / 2), 2);
  EXPECT_NEAR(es.eigenvalues()[0], exact, 1e-9 * exact);
}

TEST(Lattice, EdgeLabelLayout) {
  const Lattice lat(4);
  const auto L = layout_from_edge_labels(
      lat, {BoundaryLabel::dirichlet, BoundaryLabel::neumann, BoundaryLabel::neumann, BoundaryLabel::neumann},
      nullptr);
  EXPECT_EQ(L.kind[lat.index(2, 0)], NodeKind::dirichlet);
  EXPECT_EQ(L.kind[lat.index(4, 2)], NodeKind::neumann);
  EXPECT_EQ(L.kind[lat.index(4, 4)], NodeKind::neumann);
  EXPECT_EQ(all_dirichlet_layout(lat).count(NodeKind::neumann), 0);
}
