#include "wavectl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wavectl/error.hpp"
#include "wavectl/numeric.hpp"

namespace wavectl {

namespace {

constexpr int kMaxBisection = 60;
constexpr double kAngleTol = 1e-12;

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

Point rotate(const Point& v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Point(c * v.x() - s * v.y(), s * v.x() + c * v.y());
}

int orientation(const Point& a, const Point& b, const Point& c) {
  const double v = cross(b - a, c - a);
  const double scale = std::max({(b - a).norm(), (c - a).norm(), 1.0});
  if (std::abs(v) <= 1e-14 * scale * scale) return 0;
  return v > 0 ? 1 : -1;
}

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x(), b.x()) - 1e-14 <= p.x() && p.x() <= std::max(a.x(), b.x()) + 1e-14 &&
         std::min(a.y(), b.y()) - 1e-14 <= p.y() && p.y() <= std::max(a.y(), b.y()) + 1e-14;
}

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const int o1 = orientation(p1, p2, q1), o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1), o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

double m_dot_nu(const MultiplierField& f, const Edge& e, double t) {
  const Point x = e.at(t);
  const Vector m = f.value(Vector(x));
  return m[0] * e.normal.x() + m[1] * e.normal.y();
}

int sign_of(double v, double tol) { return v > tol ? 1 : (v < -tol ? -1 : 0); }

}  // namespace

Edge make_edge(const Point& a, const Point& b) {
  Edge e;
  e.a = a;
  e.b = b;
  e.length = (b - a).norm();
  if (!(e.length > 0.0)) throw InvalidArgument("degenerate edge: endpoints coincide");
  e.direction = (b - a) / e.length;
  e.normal = Point(e.direction.y(), -e.direction.x());
  return e;
}

PolygonDomain::PolygonDomain(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  const int n = size();
  if (n < 3) throw InvalidArgument("polygon: at least 3 vertices required");
  for (const auto& v : vertices_) {
    if (!v.allFinite()) throw InvalidArgument("polygon: non-finite vertex");
  }
  for (int i = 0; i < n; ++i) edges_.push_back(make_edge(vertices_[i], vertices_[(i + 1) % n]));
  if (!(area() > 0.0)) {
    throw InvalidArgument("polygon: vertices must be ordered counter-clockwise");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        const Point& shared = (j == i + 1) ? edges_[i].b : edges_[i].a;
        const Point& ei_far = (j == i + 1) ? edges_[i].a : edges_[i].b;
        const Point& ej_far = (j == i + 1) ? edges_[j].b : edges_[j].a;
        if (orientation(ei_far, shared, ej_far) == 0 &&
            (ei_far - shared).dot(ej_far - shared) > 0.0) {
          throw InvalidArgument("polygon: overlapping adjacent edges");
        }
        continue;
      }
      if (segments_intersect(edges_[i].a, edges_[i].b, edges_[j].a, edges_[j].b)) {
        throw InvalidArgument("polygon: edges intersect (polygon is not simple)");
      }
    }
  }
}

double PolygonDomain::area() const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += cross(vertices_[i], vertices_[(i + 1) % size()]);
  return 0.5 * s;
}

double PolygonDomain::perimeter() const {
  double s = 0.0;
  for (const auto& e : edges_) s += e.length;
  return s;
}

Point PolygonDomain::centroid() const {
  Point c(0.0, 0.0);
  for (int i = 0; i < size(); ++i) {
    const Point& p = vertices_[i];
    const Point& q = vertices_[(i + 1) % size()];
    c += (p + q) * cross(p, q);
  }
  return c / (6.0 * area());
}

Box PolygonDomain::bounding_box() const {
  Vector lo = Vector::Constant(2, std::numeric_limits<double>::infinity());
  Vector hi = -lo;
  for (const auto& v : vertices_) {
    for (int k = 0; k < 2; ++k) {
      lo[k] = std::min(lo[k], v[k]);
      hi[k] = std::max(hi[k], v[k]);
    }
  }
  return Box{lo, hi};
}

bool PolygonDomain::contains(const Point& p) const {
  bool inside = false;
  const int n = size();
  for (int i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = vertices_[i];
    const Point& b = vertices_[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

double PolygonDomain::interior_angle(int i) const {
  const int n = size();
  const Point& din = edges_[(i - 1 + n) % n].direction;
  const Point& dout = edges_[i].direction;
  const double turn = std::atan2(cross(din, dout), din.dot(dout));
  return kPi - turn;
}

bool PolygonDomain::is_unit_square() const {
  if (size() != 4) return false;
  const Point ref[4] = {Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)};
  for (int shift = 0; shift < 4; ++shift) {
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i) ok = (vertices_[(i + shift) % 4] - ref[i]).norm() <= 1e-14;
    if (ok) return true;
  }
  return false;
}

PolygonDomain unit_square() {
  return PolygonDomain({Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)});
}

std::string to_string(BoundaryLabel l) { return l == BoundaryLabel::neumann ? "N" : "D"; }

std::string to_string(InterfaceType t) {
  return t == InterfaceType::corner ? "corner" : "edge-interior";
}

BoundaryLabel BoundaryPartition::label_at(int edge, double t) const {
  for (const auto& s : segments) {
    if (s.edge == edge && t >= s.t_start && t <= s.t_end) return s.label;
  }
  throw InvalidArgument("label_at: parameter outside partition");
}

BoundaryPartition partition(const MultiplierField& field, const PolygonDomain& domain,
                            int samples_per_edge) {
  if (field.dim() != 2) throw InvalidArgument("partition: field must be 2-dimensional");
  if (samples_per_edge < 16) throw InvalidArgument("partition: samples_per_edge must be >= 16");
  BoundaryPartition p;
  p.edges = domain.edges();
  p.samples_per_edge = samples_per_edge;
  const int ne = static_cast<int>(p.edges.size());
  const auto ts = linspace(0.0, 1.0, static_cast<std::size_t>(samples_per_edge));

  std::vector<std::vector<double>> vals(ne);
  double msup = 0.0;
  for (int e = 0; e < ne; ++e) {
    for (double t : ts) {
      const Vector m = field.value(Vector(p.edges[e].at(t)));
      msup = std::max(msup, m.cwiseAbs().maxCoeff());
      vals[e].push_back(m[0] * p.edges[e].normal.x() + m[1] * p.edges[e].normal.y());
    }
  }
  p.m_sup = msup;
  p.tolerance = 1e-12 * msup;
  const double tol = p.tolerance;

  std::vector<int> first_interface(ne, 0);
  for (int e = 0; e < ne; ++e) {
    const Edge& edge = p.edges[e];
    std::vector<double> roots;
    int last_sign = 0;
    std::size_t last_idx = 0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const int s = sign_of(vals[e][k], tol);
      if (s == 0) continue;
      if (last_sign != 0 && s != last_sign) {
        double lo = ts[last_idx], hi = ts[k];
        double flo = vals[e][last_idx];
        double mid = 0.5 * (lo + hi);
        for (int it = 0; it < kMaxBisection; ++it) {
          mid = 0.5 * (lo + hi);
          const double fm = m_dot_nu(field, edge, mid);
          if (std::abs(fm) < tol) break;
          if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        roots.push_back(mid);
      }
      last_sign = s;
      last_idx = k;
    }

    std::vector<double> breaks{0.0};
    breaks.insert(breaks.end(), roots.begin(), roots.end());
    breaks.push_back(1.0);
    std::vector<BoundaryLabel> labels;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
      int sign = 0;
      for (std::size_t k = 0; k < ts.size(); ++k) {
        if (ts[k] > breaks[s] && ts[k] < breaks[s + 1]) {
          const int sk = sign_of(vals[e][k], tol);
          if (sk != 0) {
            sign = sk;
            break;
          }
        }
      }
      if (sign == 0) sign = sign_of(m_dot_nu(field, edge, 0.5 * (breaks[s] + breaks[s + 1])), tol);
      const BoundaryLabel lab = sign > 0 ? BoundaryLabel::neumann : BoundaryLabel::dirichlet;
      labels.push_back(lab);
      p.segments.push_back(Segment{e, breaks[s], breaks[s + 1], lab});
      const double len = (breaks[s + 1] - breaks[s]) * edge.length;
      (lab == BoundaryLabel::neumann ? p.neumann_length : p.dirichlet_length) += len;
    }

    first_interface[e] = static_cast<int>(p.interfaces.size());
    for (std::size_t r = 0; r < roots.size(); ++r) {
      InterfacePoint ip;
      ip.type = InterfaceType::edge_interior;
      ip.edge = e;
      ip.t = roots[r];
      ip.x = edge.at(roots[r]);
      ip.angle = kPi;
      ip.tangent = labels[r] == BoundaryLabel::neumann ? edge.direction : Point(-edge.direction);
      const Vector m = field.value(Vector(ip.x));
      ip.m_dot_tau = m[0] * ip.tangent.x() + m[1] * ip.tangent.y();
      ip.m_dot_nu = m[0] * edge.normal.x() + m[1] * edge.normal.y();
      p.interfaces.push_back(ip);
    }
    if (roots.size() > 1) {
      std::ostringstream os;
      os << "edge " << e << ": m.nu changes sign " << roots.size() << " times";
      p.warnings.push_back(os.str());
    }
  }

  for (int v = 0; v < ne; ++v) {
    const int ein = (v - 1 + ne) % ne;
    BoundaryLabel lin = BoundaryLabel::dirichlet, lout = BoundaryLabel::dirichlet;
    for (const auto& s : p.segments) {
      if (s.edge == ein && s.t_end == 1.0) lin = s.label;
      if (s.edge == v && s.t_start == 0.0) lout = s.label;
    }
    if (lin == lout) continue;
    InterfacePoint ip;
    ip.type = InterfaceType::corner;
    ip.vertex = v;
    ip.x = domain.vertices()[v];
    ip.angle = domain.interior_angle(v);
    const Vector m = field.value(Vector(ip.x));
    if (lin == BoundaryLabel::neumann) {
      ip.edge = ein;
      ip.t = 1.0;
      ip.tangent = p.edges[ein].direction;
    } else {
      ip.edge = v;
      ip.t = 0.0;
      ip.tangent = -p.edges[v].direction;
    }
    const Point& nu = p.edges[ip.edge].normal;
    ip.m_dot_tau = m[0] * ip.tangent.x() + m[1] * ip.tangent.y();
    ip.m_dot_nu = m[0] * nu.x() + m[1] * nu.y();
    p.interfaces.push_back(ip);
  }
  return p;
}

bool RReport::satisfied() const {
  if (!dirichlet_measure_positive || !interface_finite) return false;
  return std::all_of(interface_m_dot_nu_zero.begin(), interface_m_dot_nu_zero.end(),
                     [](bool b) { return b; });
}

RReport check_R(const BoundaryPartition& p) {
  RReport r;
  r.dirichlet_measure_positive = p.dirichlet_length > 0.0;
  std::vector<int> per_edge(p.edges.size(), 0);
  for (const auto& ip : p.interfaces) {
    if (ip.type == InterfaceType::edge_interior) {
      ++per_edge[ip.edge];
      r.interface_m_dot_nu_zero.push_back(std::abs(ip.m_dot_nu) <= p.tolerance);
    } else {
      r.interface_m_dot_nu_zero.push_back(true);
    }
  }
  for (int c : per_edge) {
    if (2 * c >= p.samples_per_edge) r.interface_finite = false;
  }
  return r;
}

int S2Report::violations() const {
  return static_cast<int>(std::count_if(entries.begin(), entries.end(),
                                        [](const S2Entry& e) { return !e.satisfied; }));
}

S2Report check_S2(const BoundaryPartition& p) {
  S2Report r;
  for (std::size_t i = 0; i < p.interfaces.size(); ++i) {
    const auto& ip = p.interfaces[i];
    S2Entry e;
    e.index = static_cast<int>(i);
    e.angle_in_range = ip.angle >= -kAngleTol && ip.angle <= kPi + kAngleTol;
    if (!e.angle_in_range) {
      e.satisfied = false;
      e.reason = "corner angle outside [0, pi]";
    } else if (ip.angle < kPi - kAngleTol) {
      e.satisfied = true;
      e.reason = "angle < pi";
    } else if (ip.m_dot_tau <= p.tolerance) {
      e.satisfied = true;
      e.reason = "flat interface with m.tau <= 0";
    } else {
      e.satisfied = false;
      e.reason = "flat interface with m.tau > 0";
    }
    r.satisfied = r.satisfied && e.satisfied;
    r.entries.push_back(e);
  }
  return r;
}

std::string to_string(BeltTag t) {
  switch (t) {
    case BeltTag::no_interface:
      return "no-interface";
    case BeltTag::b_minus:
      return "B_minus";
    case BeltTag::b_plus:
      return "B_plus";
  }
  return "no-interface";
}

BeltTag belt_classify(const Edge& edge, double theta, const Point& x0) {
  return belt_classify(edge, theta, theta, x0);
}

BeltTag belt_classify(const Edge& edge, double theta_normal, double theta_tangent,
                      const Point& x0) {
  if (!((edge.b - edge.a).norm() > 0.0)) throw InvalidArgument("belt_classify: degenerate edge");
  for (double t : {theta_normal, theta_tangent}) {
    if (!(t > 0.0 && t < 0.5 * kPi)) {
      throw InvalidArgument("belt_classify: angle must lie in (0, pi/2)");
    }
  }
  const Point nu_t = rotate(edge.normal, -theta_normal);
  const double pa = edge.a.dot(nu_t), pb = edge.b.dot(nu_t), p0 = x0.dot(nu_t);
  if (!(p0 > std::min(pa, pb) && p0 < std::max(pa, pb))) return BeltTag::no_interface;
  // Interface where (x - x0).nu_theta = 0; Neumann side where it is positive.
  const double t1 = (p0 - pa) / (pb - pa);
  const Point x1 = edge.at(t1);
  const Point tau = (pb > pa) ? Point(-edge.direction) : edge.direction;
  const Point tau_t = rotate(tau, -theta_tangent);
  return (x1 - x0).dot(tau_t) > 0.0 ? BeltTag::b_plus : BeltTag::b_minus;
}

BeltAngles rotated_belt_angles(double theta1, double theta2, const Edge& edge) {
  if (std::abs(edge.direction.y()) <= 1e-14) return BeltAngles{theta2, theta1};
  if (std::abs(edge.direction.x()) <= 1e-14) return BeltAngles{theta1, theta2};
  throw InvalidArgument("rotated_belt_angles: edge is not axis-aligned");
}

std::string to_string(RotationCase c) {
  switch (c) {
    case RotationCase::c1:
      return "C1";
    case RotationCase::c2:
      return "C2";
    case RotationCase::c3:
      return "C3";
  }
  return "C1";
}

RotationCase case_classify(double theta1, double theta2) {
  if (!(theta1 > 0.0 && theta2 < 0.5 * kPi)) {
    throw InvalidArgument("case_classify: angles must lie in (0, pi/2)");
  }
  if (theta1 > theta2) throw InvalidArgument("case_classify: require theta1 <= theta2");
  const double q = 0.25 * kPi;
  if (theta2 < q) return RotationCase::c1;
  if (theta1 < q) return RotationCase::c2;
  return RotationCase::c3;
}

double BoundaryQuadrature::total_length() const {
  std::vector<double> w;
  for (const auto& n : arc) w.push_back(n.weight);
  return pairwise_sum(w);
}

double BoundaryQuadrature::signed_flux() const {
  std::vector<double> w;
  for (const auto& n : arc) w.push_back(n.weight * n.m_dot_nu);
  return pairwise_sum(w);
}

double BoundaryQuadrature::neumann_flux() const {
  std::vector<double> w;
  for (const auto& n : flux) w.push_back(n.weight);
  return pairwise_sum(w);
}

BoundaryQuadrature boundary_quadrature(const BoundaryPartition& p, const MultiplierField& field,
                                       int samples) {
  if (samples < 2) throw InvalidArgument("boundary_quadrature: samples must be >= 2");
  BoundaryQuadrature q;
  for (const auto& s : p.segments) {
    const Edge& e = p.edges[s.edge];
    const double len = (s.t_end - s.t_start) * e.length;
    if (len <= 0.0) continue;
    const double w = len / (samples - 1);
    const auto ts = linspace(s.t_start, s.t_end, static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) {
      QuadratureNode n;
      n.x = e.at(ts[k]);
      n.edge = s.edge;
      n.weight = (k == 0 || k == samples - 1) ? 0.5 * w : w;
      const Vector m = field.value(Vector(n.x));
      n.m_dot_nu = m[0] * e.normal.x() + m[1] * e.normal.y();
      q.arc.push_back(n);
      if (s.label == BoundaryLabel::neumann) {
        QuadratureNode f = n;
        f.weight = n.weight * n.m_dot_nu;
        q.flux.push_back(f);
      }
    }
  }
  return q;
}

double sup_norm(const MultiplierField& field, const PolygonDomain& domain, int grid) {
  double best = 0.0;
  for (const auto& v : domain.vertices()) best = std::max(best, field.value(Vector(v)).norm());
  const Box b = domain.bounding_box();
  for (int i = 0; i <= grid; ++i) {
    for (int j = 0; j <= grid; ++j) {
      const Point x(b.lo[0] + (b.hi[0] - b.lo[0]) * i / grid,
                    b.lo[1] + (b.hi[1] - b.lo[1]) * j / grid);
      if (domain.contains(x)) best = std::max(best, field.value(Vector(x)).norm());
    }
  }
  return best;
}

}  // namespace wavectl
