#pragma once

#include <Eigen/Sparse>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wavectl/fields.hpp"
#include "wavectl/geometry.hpp"

namespace wavectl {

// (n+1) x (n+1) node lattice over the unit square, node (i, j) at (i h, j h).
class Lattice {
 public:
  explicit Lattice(int n);
  static Lattice from_spacing(double h);

  int n() const { return n_; }
  double h() const { return h_; }
  int side() const { return n_ + 1; }
  int nodes() const { return (n_ + 1) * (n_ + 1); }
  int index(int i, int j) const { return j * (n_ + 1) + i; }
  int i_of(int k) const { return k % (n_ + 1); }
  int j_of(int k) const { return k / (n_ + 1); }
  Point point(int k) const { return Point(i_of(k) * h_, j_of(k) * h_); }
  bool on_boundary(int k) const;

  std::vector<double> sample(const std::function<double(const Point&)>& f) const;

  bool operator==(const Lattice& o) const { return n_ == o.n_; }

 private:
  int n_;
  double h_;
};

enum class NodeKind : std::uint8_t { interior, neumann, dirichlet };

// Position of a boundary node on the unit-square edge numbering of
// unit_square(): 0 bottom, 1 right, 2 top, 3 left.
struct BoundaryNode {
  int node = 0;
  int edge = 0;
  double t = 0.0;
  bool corner = false;
};

struct BoundaryLayout {
  Lattice lattice{2};
  std::vector<NodeKind> kind;
  std::vector<double> mass;     // lumped: h^2 {1, 1/2, 1/4}
  std::vector<double> damping;  // sum over adjacent boundary half-edges of (h/2) (m.nu)^+
  std::vector<BoundaryNode> boundary;  // counter-clockwise from (0, 0)

  int count(NodeKind k) const;
  bool is_free(int node) const { return kind[node] != NodeKind::dirichlet; }
};

// Boundary nodes in counter-clockwise order with their edge positions.
std::vector<BoundaryNode> boundary_nodes(const Lattice& lat);

// Snap a partition of the unit square onto the lattice. Nodes at interface
// points, and corners between different labels, become Dirichlet.
BoundaryLayout snap_partition(const Lattice& lat, const BoundaryPartition& p,
                              const MultiplierField& field);

// Whole edges labelled; corner nodes are Neumann only if both edges are.
// Damping weights use `field` when given, otherwise stay zero.
BoundaryLayout layout_from_edge_labels(const Lattice& lat, const std::array<BoundaryLabel, 4>& labels,
                                       const MultiplierField* field = nullptr);

BoundaryLayout all_dirichlet_layout(const Lattice& lat);

// (K u)_i = sum_j w_ij (u_i - u_j): lattice edges weighted 1, or 1/2 when the
// edge lies on the boundary. <K u, u> approximates the Dirichlet integral.
void apply_stiffness(const Lattice& lat, std::span<const double> u, std::span<double> out);
Eigen::SparseMatrix<double> stiffness_matrix(const Lattice& lat);

// Interior-node numbering for all-Dirichlet problems.
int interior_count(const Lattice& lat);
int interior_index(const Lattice& lat, int i, int j);

// Five-point Dirichlet Laplacian (4u - sum of neighbours)/h^2 on interior nodes.
Eigen::SparseMatrix<double> dirichlet_laplacian(const Lattice& lat);

}  // namespace wavectl
