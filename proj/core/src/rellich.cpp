#include "wavectl/rellich.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "wavectl/error.hpp"
#include "wavectl/numeric.hpp"

namespace wavectl {

namespace {

constexpr std::uint64_t kValidationSeed = 0x5eed2024ULL;

// Sutherland-Hodgman clip of `poly` against the rectangle [x0,x1]x[y0,y1].
std::vector<Point> clip_to_cell(const std::vector<Point>& poly, double x0, double x1, double y0,
                                double y1) {
  std::vector<Point> out = poly;
  auto clip = [&out](auto inside, auto intersect) {
    std::vector<Point> in = std::move(out);
    out.clear();
    if (in.empty()) return;
    Point prev = in.back();
    bool prev_in = inside(prev);
    for (const Point& cur : in) {
      const bool cur_in = inside(cur);
      if (cur_in) {
        if (!prev_in) out.push_back(intersect(prev, cur));
        out.push_back(cur);
      } else if (prev_in) {
        out.push_back(intersect(prev, cur));
      }
      prev = cur;
      prev_in = cur_in;
    }
  };
  auto at_x = [](double x) {
    return [x](const Point& a, const Point& b) {
      const double t = (x - a.x()) / (b.x() - a.x());
      return Point(x, a.y() + t * (b.y() - a.y()));
    };
  };
  auto at_y = [](double y) {
    return [y](const Point& a, const Point& b) {
      const double t = (y - a.y()) / (b.y() - a.y());
      return Point(a.x() + t * (b.x() - a.x()), y);
    };
  };
  clip([x0](const Point& p) { return p.x() >= x0; }, at_x(x0));
  clip([x1](const Point& p) { return p.x() <= x1; }, at_x(x1));
  clip([y0](const Point& p) { return p.y() >= y0; }, at_y(y0));
  clip([y1](const Point& p) { return p.y() <= y1; }, at_y(y1));
  return out;
}

double signed_area(const std::vector<Point>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point& a = p[i];
    const Point& b = p[(i + 1) % p.size()];
    s += a.x() * b.y() - a.y() * b.x();
  }
  return 0.5 * s;
}

struct Integrands {
  std::vector<double> lhs, volume, boundary;
};

void add_volume_sample(const ScalarFunction2D& u, const MultiplierField& field, const Point& x,
                       double w, Integrands& acc) {
  const Vector xv(x);
  const Vector m = field.value(xv);
  const Matrix S = field.symmetric_gradient(xv);
  const Point g = u.gradient(x);
  const Eigen::Vector2d gv(g.x(), g.y());
  const double grad2 = gv.squaredNorm();
  const double lap = u.laplacian(x);
  acc.lhs.push_back(w * 2.0 * lap * (m[0] * g.x() + m[1] * g.y()));
  acc.volume.push_back(w * (S.trace() * grad2 - 2.0 * gv.dot(S.topLeftCorner<2, 2>() * gv)));
}

double boundary_integrand(const Point& g, const Vector& m, const Point& nu) {
  const double dnu = g.dot(nu);
  const double mg = m[0] * g.x() + m[1] * g.y();
  const double mn = m[0] * nu.x() + m[1] * nu.y();
  return 2.0 * dnu * mg - mn * g.squaredNorm();
}

}  // namespace

ScalarFunction2D trig_polynomial(std::vector<TrigTerm> terms) {
  auto shared = std::make_shared<const std::vector<TrigTerm>>(std::move(terms));
  ScalarFunction2D f;
  f.value = [shared](const Point& p) {
    double s = 0.0;
    for (const auto& t : *shared) {
      s += t.amplitude * std::sin(t.wx * p.x() + t.phase_x) * std::sin(t.wy * p.y() + t.phase_y);
    }
    return s;
  };
  f.gradient = [shared](const Point& p) {
    Point g(0.0, 0.0);
    for (const auto& t : *shared) {
      const double sx = std::sin(t.wx * p.x() + t.phase_x), cx = std::cos(t.wx * p.x() + t.phase_x);
      const double sy = std::sin(t.wy * p.y() + t.phase_y), cy = std::cos(t.wy * p.y() + t.phase_y);
      g.x() += t.amplitude * t.wx * cx * sy;
      g.y() += t.amplitude * t.wy * sx * cy;
    }
    return g;
  };
  f.laplacian = [shared](const Point& p) {
    double s = 0.0;
    for (const auto& t : *shared) {
      s -= t.amplitude * (t.wx * t.wx + t.wy * t.wy) * std::sin(t.wx * p.x() + t.phase_x) *
           std::sin(t.wy * p.y() + t.phase_y);
    }
    return s;
  };
  return f;
}

void validate_scalar_function(const ScalarFunction2D& u, const PolygonDomain& domain) {
  if (!u.value || !u.gradient || !u.laplacian) {
    throw InvalidArgument("rellich: u needs value, gradient and laplacian callables");
  }
  const Box b = domain.bounding_box();
  const double diam = b.diameter();
  const double d = 1e-3 * diam;
  std::mt19937_64 rng(kValidationSeed);
  std::uniform_real_distribution<double> ux(b.lo[0], b.hi[0]), uy(b.lo[1], b.hi[1]);
  std::vector<Point> pts;
  while (pts.size() < 20) {
    const Point p(ux(rng), uy(rng));
    if (domain.contains(p)) pts.push_back(p);
  }
  std::vector<double> grad_err, lap_err;
  double grad_scale = 0.0, lap_scale = 0.0;
  for (const Point& p : pts) {
    const Point ex(d, 0.0), ey(0.0, d);
    const double f0 = u.value(p);
    const double fxp = u.value(p + ex), fxm = u.value(p - ex);
    const double fyp = u.value(p + ey), fym = u.value(p - ey);
    const Point fd_grad((fxp - fxm) / (2 * d), (fyp - fym) / (2 * d));
    const double fd_lap = (fxp + fxm + fyp + fym - 4.0 * f0) / (d * d);
    const Point g = u.gradient(p);
    const double l = u.laplacian(p);
    grad_err.push_back((g - fd_grad).norm());
    lap_err.push_back(std::abs(l - fd_lap));
    grad_scale = std::max(grad_scale, g.norm());
    lap_scale = std::max(lap_scale, std::abs(l));
  }
  const double gmax = *std::max_element(grad_err.begin(), grad_err.end());
  const double lmax = *std::max_element(lap_err.begin(), lap_err.end());
  if (gmax > 1e-4 * grad_scale + 1e-8) {
    throw InvalidArgument("rellich: gradient callable disagrees with finite differences");
  }
  if (lmax > 1e-4 * lap_scale + 1e-6 * (grad_scale / diam + 1.0)) {
    throw InvalidArgument("rellich: laplacian callable disagrees with finite differences");
  }
}

RellichReport rellich_residual(const ScalarFunction2D& u, const MultiplierField& field,
                               const PolygonDomain& domain, double h) {
  if (field.dim() != 2) throw InvalidArgument("rellich: field must be 2-dimensional");
  const Box b = domain.bounding_box();
  if (!(h > 0.0) || h > b.diameter() / 16.0) {
    throw InvalidArgument("rellich: h must be positive and at most diameter/16");
  }
  validate_scalar_function(u, domain);

  const int nx = static_cast<int>(std::ceil((b.hi[0] - b.lo[0]) / h - 1e-9));
  const int ny = static_cast<int>(std::ceil((b.hi[1] - b.lo[1]) / h - 1e-9));
  const double hx = (b.hi[0] - b.lo[0]) / nx, hy = (b.hi[1] - b.lo[1]) / ny;
  const double cell = hx * hy;
  Integrands acc;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x0 = b.lo[0] + i * hx, x1 = x0 + hx;
      const double y0 = b.lo[1] + j * hy, y1 = y0 + hy;
      const auto clipped = clip_to_cell(domain.vertices(), x0, x1, y0, y1);
      if (clipped.size() < 3) continue;
      const double a = signed_area(clipped);
      if (std::abs(a - cell) <= 1e-12 * cell) {
        add_volume_sample(u, field, Point(0.5 * (x0 + x1), 0.5 * (y0 + y1)), cell, acc);
        continue;
      }
      if (std::abs(a) <= 1e-14 * cell) continue;
      // Cut cell: signed fan triangulation with the edge-midpoint rule.
      const Point& c = clipped[0];
      for (std::size_t k = 1; k + 1 < clipped.size(); ++k) {
        const Point& p = clipped[k];
        const Point& q = clipped[k + 1];
        const double ta = 0.5 * ((p - c).x() * (q - c).y() - (p - c).y() * (q - c).x());
        if (ta == 0.0) continue;
        add_volume_sample(u, field, 0.5 * (c + p), ta / 3.0, acc);
        add_volume_sample(u, field, 0.5 * (p + q), ta / 3.0, acc);
        add_volume_sample(u, field, 0.5 * (q + c), ta / 3.0, acc);
      }
    }
  }
  for (const Edge& e : domain.edges()) {
    const int n = std::max(1, static_cast<int>(std::ceil(e.length / h - 1e-9)));
    const double w = e.length / n;
    for (int k = 0; k <= n; ++k) {
      const Point x = e.at(static_cast<double>(k) / n);
      const double wk = (k == 0 || k == n) ? 0.5 * w : w;
      acc.boundary.push_back(wk * boundary_integrand(u.gradient(x), field.value(Vector(x)),
                                                     e.normal));
    }
  }
  RellichReport r;
  r.h = h;
  r.lhs = pairwise_sum(acc.lhs);
  r.volume_term = pairwise_sum(acc.volume);
  r.boundary_term = pairwise_sum(acc.boundary);
  r.defect = r.lhs - r.volume_term - r.boundary_term;
  return r;
}

namespace {

// grad of r^{1/2} sin(theta/2) at polar (r, theta).
Point shamir_gradient(double r, double theta) {
  const double a = 0.5 / std::sqrt(r);
  const double ur = a * std::sin(0.5 * theta);
  const double ut = a * std::cos(0.5 * theta);
  const double c = std::cos(theta), s = std::sin(theta);
  return Point(ur * c - ut * s, ur * s + ut * c);
}

void require_flat_interface(const MultiplierField& field) {
  if (field.dim() != 2) throw InvalidArgument("shamir: field must be 2-dimensional");
  const Vector m = field.value(Vector::Zero(2));
  if (std::abs(m[1]) > 1e-12 * std::max(1.0, m.norm())) {
    throw InvalidArgument("shamir: m.nu must vanish at the interface point");
  }
}

// Radial integrals use s = log r, midpoint rule with ns cells; angular
// integrals use the midpoint rule with nt cells.
RellichReport shamir_counts(const MultiplierField& field, double rho, int ns, int nt, double h) {
  const double ls = std::log(1.0 / rho);
  const double ds = ls / ns, dt = kPi / nt;
  const Point down(0.0, -1.0);
  std::vector<double> volume, boundary;
  volume.reserve(static_cast<std::size_t>(ns) * nt);
  for (int k = 0; k < ns; ++k) {
    const double r = rho * std::exp((k + 0.5) * ds);
    const double w = ds * r * r * dt;
    for (int j = 0; j < nt; ++j) {
      const double th = (j + 0.5) * dt;
      const Vector x = (Vector(2) << r * std::cos(th), r * std::sin(th)).finished();
      const Matrix S = field.symmetric_gradient(x);
      const Point g = shamir_gradient(r, th);
      const Eigen::Vector2d gv(g.x(), g.y());
      volume.push_back(w * (S.trace() * gv.squaredNorm() -
                            2.0 * gv.dot(S.topLeftCorner<2, 2>() * gv)));
    }
  }
  for (int j = 0; j < nt; ++j) {
    const double th = (j + 0.5) * dt;
    const Point nu(std::cos(th), std::sin(th));
    boundary.push_back(dt * boundary_integrand(shamir_gradient(1.0, th),
                                               field.value(Vector(nu)), nu));
  }
  for (int k = 0; k < ns; ++k) {
    const double r = rho * std::exp((k + 0.5) * ds);
    const double w = ds * r;
    const Point right(r, 0.0), left(-r, 0.0);
    boundary.push_back(w * boundary_integrand(shamir_gradient(r, 0.0),
                                              field.value(Vector(right)), down));
    boundary.push_back(w * boundary_integrand(shamir_gradient(r, kPi),
                                              field.value(Vector(left)), down));
  }
  RellichReport rep;
  rep.h = h;
  rep.rho = rho;
  rep.lhs = 0.0;  // u is harmonic
  rep.volume_term = pairwise_sum(volume);
  rep.boundary_term = pairwise_sum(boundary);
  rep.defect = rep.lhs - rep.volume_term - rep.boundary_term;
  const Vector m0 = field.value(Vector::Zero(2));
  rep.predicted_defect = 0.25 * kPi * m0[0];
  return rep;
}

int cells(double length, double h) {
  return std::max(1, static_cast<int>(std::ceil(length / h - 1e-9)));
}

}  // namespace

RellichReport shamir_punctured(const MultiplierField& field, double rho, double h) {
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidArgument("shamir: rho must lie in (0, 1)");
  if (!(h > 0.0)) throw InvalidArgument("shamir: h must be positive");
  require_flat_interface(field);
  return shamir_counts(field, rho, cells(std::log(1.0 / rho), h), cells(kPi, h), h);
}

ShamirResult shamir_defect(const MultiplierField& field, std::span<const double> h_ladder,
                           std::span<const double> rhos) {
  require_flat_interface(field);
  if (h_ladder.empty()) throw InvalidArgument("shamir: empty h ladder");
  if (rhos.empty()) throw InvalidArgument("shamir: empty rho list");
  std::vector<int> factor;
  for (std::size_t i = 0; i < h_ladder.size(); ++i) {
    if (!(h_ladder[i] > 0.0)) throw InvalidArgument("shamir: h must be positive");
    if (i > 0 && !(h_ladder[i] < h_ladder[i - 1])) {
      throw InvalidArgument("shamir: h ladder must be strictly decreasing");
    }
    const double q = h_ladder[0] / h_ladder[i];
    if (std::abs(q - std::round(q)) > 1e-9 * q) {
      throw InvalidArgument("shamir: h ladder entries must be h0/k for integers k");
    }
    factor.push_back(static_cast<int>(std::round(q)));
  }
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    if (!(rhos[i] > 0.0 && rhos[i] < 1.0)) throw InvalidArgument("shamir: rho must lie in (0, 1)");
    if (i > 0 && !(rhos[i] < rhos[i - 1])) {
      throw InvalidArgument("shamir: rho list must be strictly decreasing");
    }
  }

  ShamirResult res;
  const Vector m0 = field.value(Vector::Zero(2));
  res.m_dot_tau = m0[0];
  res.predicted = 0.25 * kPi * res.m_dot_tau;
  const int nt0 = cells(kPi, h_ladder[0]);
  for (double rho : rhos) {
    const int ns0 = cells(std::log(1.0 / rho), h_ladder[0]);
    std::vector<double> d;
    for (std::size_t i = 0; i < h_ladder.size(); ++i) {
      res.ladder.push_back(shamir_counts(field, rho, ns0 * factor[i], nt0 * factor[i], h_ladder[i]));
      d.push_back(res.ladder.back().defect);
    }
    double value = d.back();
    if (d.size() >= 2) {
      const double q = static_cast<double>(factor.back()) / factor[factor.size() - 2];
      value = (q * q * d.back() - d[d.size() - 2]) / (q * q - 1.0);
    }
    res.rho_extrapolants.push_back(value);
  }
  std::vector<double> level;
  for (std::size_t i = 0; i + 1 < rhos.size(); ++i) {
    const double q = rhos[i] / rhos[i + 1];
    level.push_back((q * res.rho_extrapolants[i + 1] - res.rho_extrapolants[i]) / (q - 1.0));
  }
  if (level.empty()) level.push_back(res.rho_extrapolants.back());
  res.extrapolated = level.back();
  res.converged = true;
  if (level.size() >= 2) {
    const double a = level[level.size() - 2], b = level.back();
    res.converged = std::abs(a - b) <= 0.05 * std::max(std::abs(a), std::abs(b)) + 1e-8;
  }
  res.relative_gap = res.predicted != 0.0
                         ? std::abs(res.extrapolated - res.predicted) / std::abs(res.predicted)
                         : std::abs(res.extrapolated);
  return res;
}

}  // namespace wavectl
