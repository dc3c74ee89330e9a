#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "wavectl/fields.hpp"

namespace wavectl {

using Point = Eigen::Vector2d;

struct Edge {
  Point a;
  Point b;
  Point normal;     // unit outward
  Point direction;  // unit, from a to b
  double length = 0.0;

  Point at(double t) const { return a + t * (b - a); }
};

Edge make_edge(const Point& a, const Point& b);

// Simple counter-clockwise polygon.
class PolygonDomain {
 public:
  explicit PolygonDomain(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int size() const { return static_cast<int>(vertices_.size()); }

  double area() const;
  double perimeter() const;
  Point centroid() const;
  Box bounding_box() const;
  bool contains(const Point& p) const;
  // Interior angle at vertex i, in (0, 2pi).
  double interior_angle(int i) const;
  bool is_unit_square() const;

 private:
  std::vector<Point> vertices_;
  std::vector<Edge> edges_;
};

PolygonDomain unit_square();

enum class BoundaryLabel { neumann, dirichlet };
enum class InterfaceType { edge_interior, corner };

std::string to_string(BoundaryLabel l);
std::string to_string(InterfaceType t);

struct Segment {
  int edge = 0;
  double t_start = 0.0;
  double t_end = 1.0;
  BoundaryLabel label = BoundaryLabel::dirichlet;
};

struct InterfacePoint {
  Point x;
  InterfaceType type = InterfaceType::edge_interior;
  int edge = 0;      // edge holding the point (corner: the Neumann-side edge)
  int vertex = -1;   // corner interfaces only
  double t = 0.0;    // parameter along `edge`
  Point tangent;     // unit, pointing outward of the Neumann part
  double angle = 0.0;
  double m_dot_tau = 0.0;
  double m_dot_nu = 0.0;
};

struct BoundaryPartition {
  std::vector<Edge> edges;
  std::vector<Segment> segments;
  std::vector<InterfacePoint> interfaces;
  double dirichlet_length = 0.0;
  double neumann_length = 0.0;
  double tolerance = 0.0;
  double m_sup = 0.0;
  int samples_per_edge = 0;
  std::vector<std::string> warnings;

  // Label at parameter t along edge e (interior points of segments).
  BoundaryLabel label_at(int edge, double t) const;
};

BoundaryPartition partition(const MultiplierField& field, const PolygonDomain& domain,
                            int samples_per_edge);

struct RReport {
  bool dirichlet_measure_positive = false;
  bool interface_finite = true;
  std::vector<bool> interface_m_dot_nu_zero;
  bool satisfied() const;
};

RReport check_R(const BoundaryPartition& p);

struct S2Entry {
  int index = 0;
  bool satisfied = false;
  bool angle_in_range = true;
  std::string reason;
};

struct S2Report {
  std::vector<S2Entry> entries;
  bool satisfied = true;
  int violations() const;
};

S2Report check_S2(const BoundaryPartition& p);

enum class BeltTag { no_interface, b_minus, b_plus };
std::string to_string(BeltTag t);

BeltTag belt_classify(const Edge& edge, double theta, const Point& x0);
BeltTag belt_classify(const Edge& edge, double theta_normal, double theta_tangent,
                      const Point& x0);

// Belt angles that reproduce the rotated2d field on an axis-aligned edge:
// horizontal edges rotate the normal by theta2 and the tangent by theta1,
// vertical edges the other way round.
struct BeltAngles {
  double normal;
  double tangent;
};
BeltAngles rotated_belt_angles(double theta1, double theta2, const Edge& edge);

enum class RotationCase { c1, c2, c3 };
std::string to_string(RotationCase c);
RotationCase case_classify(double theta1, double theta2);

struct QuadratureNode {
  Point x;
  int edge = 0;
  double weight = 0.0;
  double m_dot_nu = 0.0;
};

struct BoundaryQuadrature {
  std::vector<QuadratureNode> arc;   // d sigma over the whole boundary
  std::vector<QuadratureNode> flux;  // d sigma_m = m.nu d sigma over Neumann segments
  double total_length() const;
  double signed_flux() const;   // integral of m.nu over the whole boundary
  double neumann_flux() const;  // sum of flux weights
};

BoundaryQuadrature boundary_quadrature(const BoundaryPartition& p, const MultiplierField& field,
                                       int samples);

// max |m| over the polygon's vertices and an interior sample grid.
double sup_norm(const MultiplierField& field, const PolygonDomain& domain, int grid = 64);

}  // namespace wavectl
