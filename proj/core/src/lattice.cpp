#include "wavectl/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "wavectl/error.hpp"

namespace wavectl {

Lattice::Lattice(int n) : n_(n), h_(1.0 / n) {
  if (n < 2) throw InvalidArgument("lattice: need at least 2 cells per side");
}

Lattice Lattice::from_spacing(double h) {
  if (!(h > 0.0) || h > 0.5) throw InvalidArgument("lattice: h must lie in (0, 1/2]");
  const double n = std::round(1.0 / h);
  if (std::abs(n * h - 1.0) > 1e-9) throw InvalidArgument("lattice: 1/h must be an integer");
  return Lattice(static_cast<int>(n));
}

bool Lattice::on_boundary(int k) const {
  const int i = i_of(k), j = j_of(k);
  return i == 0 || j == 0 || i == n_ || j == n_;
}

std::vector<double> Lattice::sample(const std::function<double(const Point&)>& f) const {
  std::vector<double> out(nodes());
  for (int k = 0; k < nodes(); ++k) out[k] = f(point(k));
  return out;
}

int BoundaryLayout::count(NodeKind k) const {
  return static_cast<int>(std::count(kind.begin(), kind.end(), k));
}

std::vector<BoundaryNode> boundary_nodes(const Lattice& lat) {
  const int n = lat.n();
  std::vector<BoundaryNode> out;
  for (int i = 0; i < n; ++i) out.push_back({lat.index(i, 0), 0, double(i) / n, i == 0});
  for (int j = 0; j < n; ++j) out.push_back({lat.index(n, j), 1, double(j) / n, j == 0});
  for (int i = n; i > 0; --i) out.push_back({lat.index(i, n), 2, double(n - i) / n, i == n});
  for (int j = n; j > 0; --j) out.push_back({lat.index(0, j), 3, double(n - j) / n, j == n});
  return out;
}

namespace {

const Point kNormals[4] = {Point(0, -1), Point(1, 0), Point(0, 1), Point(-1, 0)};

BoundaryLayout base_layout(const Lattice& lat) {
  BoundaryLayout L;
  L.lattice = lat;
  const int n = lat.n();
  const double h2 = lat.h() * lat.h();
  L.kind.assign(lat.nodes(), NodeKind::interior);
  L.mass.assign(lat.nodes(), h2);
  L.damping.assign(lat.nodes(), 0.0);
  for (int k = 0; k < lat.nodes(); ++k) {
    const int i = lat.i_of(k), j = lat.j_of(k);
    const bool bx = (i == 0 || i == n), by = (j == 0 || j == n);
    if (bx && by) {
      L.mass[k] = 0.25 * h2;
    } else if (bx || by) {
      L.mass[k] = 0.5 * h2;
    }
  }
  L.boundary = boundary_nodes(lat);
  return L;
}

// Edges of the unit square meeting at a boundary node (one or two).
std::vector<int> node_edges(const BoundaryNode& b) {
  if (!b.corner) return {b.edge};
  return {(b.edge + 3) % 4, b.edge};
}

void fill_damping(BoundaryLayout& L, const MultiplierField& field) {
  const double h = L.lattice.h();
  for (const auto& b : L.boundary) {
    if (L.kind[b.node] != NodeKind::neumann) continue;
    const Vector m = field.value(Vector(L.lattice.point(b.node)));
    double w = 0.0;
    for (int e : node_edges(b)) {
      const double mn = m[0] * kNormals[e].x() + m[1] * kNormals[e].y();
      // A corner touches one half-edge per side; an edge node touches two.
      w += (b.corner ? 0.5 * h : h) * std::max(0.0, mn);
    }
    L.damping[b.node] = w;
  }
}

}  // namespace

BoundaryLayout snap_partition(const Lattice& lat, const BoundaryPartition& p,
                              const MultiplierField& field) {
  if (p.edges.size() != 4) throw InvalidArgument("snap_partition: partition is not of a square");
  const PolygonDomain sq = unit_square();
  for (int e = 0; e < 4; ++e) {
    if ((p.edges[e].a - sq.edges()[e].a).norm() > 1e-14 ||
        (p.edges[e].b - sq.edges()[e].b).norm() > 1e-14) {
      throw InvalidArgument("snap_partition: partition must be of unit_square()");
    }
  }
  BoundaryLayout L = base_layout(lat);
  constexpr double tol = 1e-12;
  auto label_open = [&p](int edge, double t, bool& found) {
    for (const auto& s : p.segments) {
      if (s.edge == edge && t > s.t_start + tol && t < s.t_end - tol) {
        found = true;
        return s.label;
      }
    }
    found = false;
    return BoundaryLabel::dirichlet;
  };
  for (const auto& b : L.boundary) {
    bool neumann = false;
    if (b.corner) {
      // Label of the segment touching the vertex on each adjacent edge.
      const int ein = (b.edge + 3) % 4;
      BoundaryLabel lin = BoundaryLabel::dirichlet, lout = BoundaryLabel::dirichlet;
      for (const auto& s : p.segments) {
        if (s.edge == ein && s.t_end == 1.0) lin = s.label;
        if (s.edge == b.edge && s.t_start == 0.0) lout = s.label;
      }
      neumann = lin == BoundaryLabel::neumann && lout == BoundaryLabel::neumann;
    } else {
      bool found = false;
      neumann = label_open(b.edge, b.t, found) == BoundaryLabel::neumann && found;
    }
    L.kind[b.node] = neumann ? NodeKind::neumann : NodeKind::dirichlet;
  }
  fill_damping(L, field);
  return L;
}

BoundaryLayout layout_from_edge_labels(const Lattice& lat, const std::array<BoundaryLabel, 4>& labels,
                                       const MultiplierField* field) {
  BoundaryLayout L = base_layout(lat);
  for (const auto& b : L.boundary) {
    bool neumann = true;
    for (int e : node_edges(b)) neumann = neumann && labels[e] == BoundaryLabel::neumann;
    L.kind[b.node] = neumann ? NodeKind::neumann : NodeKind::dirichlet;
  }
  if (field) fill_damping(L, *field);
  return L;
}

BoundaryLayout all_dirichlet_layout(const Lattice& lat) {
  return layout_from_edge_labels(lat, {BoundaryLabel::dirichlet, BoundaryLabel::dirichlet,
                                       BoundaryLabel::dirichlet, BoundaryLabel::dirichlet});
}

void apply_stiffness(const Lattice& lat, std::span<const double> u, std::span<double> out) {
  const int n = lat.n(), s = lat.side();
  std::fill(out.begin(), out.end(), 0.0);
  for (int j = 0; j <= n; ++j) {
    const double w = (j == 0 || j == n) ? 0.5 : 1.0;
    const int row = j * s;
    for (int i = 0; i < n; ++i) {
      const double f = w * (u[row + i] - u[row + i + 1]);
      out[row + i] += f;
      out[row + i + 1] -= f;
    }
  }
  for (int j = 0; j < n; ++j) {
    const int row = j * s;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      const double f = w * (u[row + i] - u[row + s + i]);
      out[row + i] += f;
      out[row + s + i] -= f;
    }
  }
}

Eigen::SparseMatrix<double> stiffness_matrix(const Lattice& lat) {
  const int n = lat.n();
  std::vector<Eigen::Triplet<double>> trip;
  auto add_edge = [&trip](int a, int b, double w) {
    trip.emplace_back(a, a, w);
    trip.emplace_back(b, b, w);
    trip.emplace_back(a, b, -w);
    trip.emplace_back(b, a, -w);
  };
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i < n; ++i) {
      add_edge(lat.index(i, j), lat.index(i + 1, j), (j == 0 || j == n) ? 0.5 : 1.0);
    }
  }
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= n; ++i) {
      add_edge(lat.index(i, j), lat.index(i, j + 1), (i == 0 || i == n) ? 0.5 : 1.0);
    }
  }
  Eigen::SparseMatrix<double> K(lat.nodes(), lat.nodes());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

int interior_count(const Lattice& lat) { return (lat.n() - 1) * (lat.n() - 1); }

int interior_index(const Lattice& lat, int i, int j) { return (j - 1) * (lat.n() - 1) + (i - 1); }

Eigen::SparseMatrix<double> dirichlet_laplacian(const Lattice& lat) {
  const int n = lat.n();
  const double ih2 = 1.0 / (lat.h() * lat.h());
  std::vector<Eigen::Triplet<double>> trip;
  for (int j = 1; j < n; ++j) {
    for (int i = 1; i < n; ++i) {
      const int r = interior_index(lat, i, j);
      trip.emplace_back(r, r, 4.0 * ih2);
      if (i > 1) trip.emplace_back(r, interior_index(lat, i - 1, j), -ih2);
      if (i < n - 1) trip.emplace_back(r, interior_index(lat, i + 1, j), -ih2);
      if (j > 1) trip.emplace_back(r, interior_index(lat, i, j - 1), -ih2);
      if (j < n - 1) trip.emplace_back(r, interior_index(lat, i, j + 1), -ih2);
    }
  }
  Eigen::SparseMatrix<double> A(interior_count(lat), interior_count(lat));
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

}  // namespace wavectl
