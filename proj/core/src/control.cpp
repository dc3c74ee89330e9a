#include "wavectl/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "wavectl/error.hpp"
#include "wavectl/numeric.hpp"

namespace wavectl {

std::string to_string(NormalStencil s) {
  return s == NormalStencil::two_point ? "two-point" : "three-point";
}

ControlProblem::ControlProblem(const MultiplierField& field, double h, double T, double dt,
                               int samples_per_edge)
    : lattice_(Lattice::from_spacing(h)), T_(T) {
  if (field.dim() != 2) throw InvalidArgument("control: field must be 2-dimensional");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidArgument("control: T must be positive");
  const PolygonDomain sq = unit_square();
  const BoundaryPartition part = partition(field, sq, samples_per_edge);
  layout_ = snap_partition(lattice_, part, field);
  const int n = lattice_.n();
  for (const auto& b : layout_.boundary) {
    if (b.corner || layout_.kind[b.node] != NodeKind::neumann) continue;
    const int i = lattice_.i_of(b.node), j = lattice_.j_of(b.node);
    int di = 0, dj = 0;
    switch (b.edge) {
      case 0: dj = 1; break;
      case 1: di = -1; break;
      case 2: dj = -1; break;
      default: di = 1; break;
    }
    ControlNode c;
    c.node = b.node;
    c.edge = b.edge;
    c.s = b.t;
    c.inner = interior_index(lattice_, i + di, j + dj);
    const int i2 = i + 2 * di, j2 = j + 2 * dj;
    if (i2 >= 1 && i2 <= n - 1 && j2 >= 1 && j2 <= n - 1) c.inner2 = interior_index(lattice_, i2, j2);
    controls_.push_back(c);
  }
  A_ = dirichlet_laplacian(lattice_);
  ni_ = interior_count(lattice_);
  auto chol = std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>(A_);
  chol_ = chol;
  if (chol->info() != Eigen::Success) throw NumericalFailure("control: Cholesky of A failed");

  const double dt_req = dt > 0.0 ? dt : 0.4 * lattice_.h();
  if (dt_req > 0.4 * lattice_.h() * (1.0 + 1e-12)) {
    throw InvalidArgument("control: dt exceeds the CFL limit 0.4 h");
  }
  steps_ = static_cast<int>(std::ceil(T / dt_req - 1e-9));
  dt_ = T / steps_;

  const ConeReport cone = cone_check(field, Box::unit(2), 1.0 / 16);
  c_m_ = cone.c_m;
  a0_ = cone.a0;
  m_sup_ = sup_norm(field, sq);
  T0_ = c_m_ > 0.0 ? 2.0 * m_sup_ / c_m_ : std::numeric_limits<double>::infinity();
  const BoundaryQuadrature q = boundary_quadrature(part, field, 65);
  for (const auto& node : q.flux) sup_mnu_ = std::max(sup_mnu_, std::abs(node.m_dot_nu));
}

Eigen::VectorXd ControlProblem::restrict(const std::vector<double>& nodes) const {
  if (static_cast<int>(nodes.size()) != lattice_.nodes()) {
    throw InvalidArgument("control: lattice function size mismatch");
  }
  Eigen::VectorXd out(ni_);
  const int n = lattice_.n();
  for (int j = 1; j < n; ++j) {
    for (int i = 1; i < n; ++i) out[interior_index(lattice_, i, j)] = nodes[lattice_.index(i, j)];
  }
  return out;
}

std::vector<double> ControlProblem::extend(const Eigen::VectorXd& u) const {
  std::vector<double> out(lattice_.nodes(), 0.0);
  const int n = lattice_.n();
  for (int j = 1; j < n; ++j) {
    for (int i = 1; i < n; ++i) out[lattice_.index(i, j)] = u[interior_index(lattice_, i, j)];
  }
  return out;
}

double ControlProblem::l2(const Eigen::VectorXd& u) const { return h() * u.norm(); }

double ControlProblem::hm1(const Eigen::VectorXd& u) const {
  return h() * std::sqrt(std::max(0.0, u.dot(solve_A(u))));
}

Eigen::VectorXd ControlProblem::normal_derivative(const Eigen::VectorXd& phi,
                                                  NormalStencil s) const {
  Eigen::VectorXd d(static_cast<Eigen::Index>(controls_.size()));
  const double h = lattice_.h();
  for (std::size_t k = 0; k < controls_.size(); ++k) {
    const auto& c = controls_[k];
    const double p1 = phi[c.inner];
    if (s == NormalStencil::two_point) {
      d[k] = -p1 / h;
    } else {
      const double p2 = c.inner2 >= 0 ? phi[c.inner2] : 0.0;
      d[k] = (-4.0 * p1 + p2) / (2.0 * h);
    }
  }
  return d;
}

Eigen::VectorXd ControlProblem::inject(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ni_);
  const double ih2 = 1.0 / (h() * h());
  for (std::size_t k = 0; k < controls_.size(); ++k) out[controls_[k].inner] += v[k] * ih2;
  return out;
}

namespace {

void check_interior(const ControlProblem& P, const Eigen::VectorXd& u, const char* what) {
  if (u.size() != P.interior_size()) {
    throw InvalidArgument(std::string("control: ") + what + " has the wrong size");
  }
  if (!u.allFinite()) throw InvalidArgument(std::string("control: ") + what + " is not finite");
}

void nan_guard(const Eigen::VectorXd& u, int level) {
  if (!u.allFinite()) {
    std::ostringstream os;
    os << "control: non-finite state at time level " << level;
    throw NumericalFailure(os.str());
  }
}

double half_energy(const ControlProblem& P, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double h2 = P.h() * P.h();
  const double dt = P.dt();
  return 0.5 * h2 * (((a - b) / dt).squaredNorm() + a.dot(P.apply_A(b)));
}

}  // namespace

AdjointRecord adjoint_simulate(const ControlProblem& P, const Eigen::VectorXd& phi0,
                               const Eigen::VectorXd& phi1, NormalStencil stencil) {
  check_interior(P, phi0, "phi0");
  check_interior(P, phi1, "phi1");
  const double dt = P.dt(), dt2 = dt * dt;
  const int N = P.steps();
  AdjointRecord rec;
  rec.stencil = stencil;
  const Eigen::VectorXd a0 = P.apply_A(phi0);
  rec.E0 = 0.5 * P.h() * P.h() * (phi1.squaredNorm() + phi0.dot(a0));
  Eigen::VectorXd prev = phi0 - dt * phi1 - 0.5 * dt2 * a0;
  Eigen::VectorXd cur = phi0;
  Eigen::VectorXd next = phi0 + dt * phi1 - 0.5 * dt2 * a0;
  double e_prev = half_energy(P, cur, prev);
  for (int n = 0; n <= N; ++n) {
    if (n > 0) {
      next = 2.0 * cur - prev - dt2 * P.apply_A(cur);
      nan_guard(next, n + 1);
    }
    const double e_next = half_energy(P, next, cur);
    rec.times.push_back(n * dt);
    rec.normal_trace.push_back(P.normal_derivative(cur, stencil));
    rec.energy.push_back(0.5 * (e_prev + e_next));
    e_prev = e_next;
    prev = std::move(cur);
    cur = std::move(next);
  }
  rec.drift = 0.0;
  if (rec.E0 > 0.0) {
    for (double e : rec.energy) rec.drift = std::max(rec.drift, std::abs(e - rec.E0) / rec.E0);
  }
  return rec;
}

double boundary_flux(const ControlProblem& P, const AdjointRecord& rec) {
  std::vector<double> terms;
  const std::size_t L = rec.normal_trace.size();
  for (std::size_t n = 0; n < L; ++n) {
    const double w = (n == 0 || n + 1 == L) ? 0.5 : 1.0;
    terms.push_back(w * P.dt() * P.h() * rec.normal_trace[n].squaredNorm());
  }
  return pairwise_sum(terms);
}

ObservabilityReport observability_quotient(const ControlProblem& P, const Eigen::VectorXd& phi0,
                                           const Eigen::VectorXd& phi1) {
  const AdjointRecord rec = adjoint_simulate(P, phi0, phi1, NormalStencil::three_point);
  ObservabilityReport r;
  r.E0 = rec.E0;
  r.flux = boundary_flux(P, rec);
  r.quotient = r.flux > 0.0 ? r.E0 / r.flux : (r.E0 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  r.T = P.T();
  r.T0 = P.T0();
  r.c_m = P.c_m();
  r.m_sup = P.m_sup();
  r.sup_m_dot_nu = P.sup_m_dot_nu_neumann();
  r.conservation_drift = rec.drift;
  r.h = P.h();
  r.stencil = to_string(rec.stencil);
  if (!(P.T() > P.T0())) {
    r.bound = std::numeric_limits<double>::infinity();
    r.verdict = "inapplicable";
    return r;
  }
  r.bound = r.sup_m_dot_nu / (2.0 * (r.c_m * r.T - 2.0 * r.m_sup));
  r.verdict = r.quotient <= r.bound * 1.05 ? "verified" : "violated";
  return r;
}

HUMApplication hum_apply(const ControlProblem& P, const Eigen::VectorXd& e0,
                         const Eigen::VectorXd& e1) {
  check_interior(P, e0, "e0");
  check_interior(P, e1, "e1");
  const double dt = P.dt(), dt2 = dt * dt;
  const int N = P.steps();
  HUMApplication out;
  out.control.reserve(N + 1);
  Eigen::VectorXd prev = e0;
  Eigen::VectorXd cur = e0 + dt * e1 - 0.5 * dt2 * P.apply_A(e0);
  out.control.push_back(P.normal_derivative(prev, NormalStencil::two_point));
  out.control.push_back(P.normal_derivative(cur, NormalStencil::two_point));
  for (int k = 1; k < N; ++k) {
    Eigen::VectorXd next = 2.0 * cur - prev - dt2 * P.apply_A(cur);
    nan_guard(next, k + 1);
    prev = std::move(cur);
    cur = std::move(next);
    out.control.push_back(P.normal_derivative(cur, NormalStencil::two_point));
  }
  std::vector<double> obs;
  for (int k = 1; k < N; ++k) obs.push_back(dt * P.h() * out.control[k].squaredNorm());
  out.observed_energy = pairwise_sum(obs);

  // Backward sweep from psi^N = psi^{N-1} = 0 with the control injected.
  Eigen::VectorXd after = Eigen::VectorXd::Zero(P.interior_size());
  Eigen::VectorXd now = Eigen::VectorXd::Zero(P.interior_size());
  for (int k = N - 1; k >= 1; --k) {
    Eigen::VectorXd before = 2.0 * now - after - dt2 * P.apply_A(now) + dt2 * P.inject(out.control[k]);
    nan_guard(before, k - 1);
    after = std::move(now);
    now = std::move(before);
  }
  out.xi0 = (after - now) / dt + 0.5 * dt * P.apply_A(now);
  out.xi1 = -now;
  return out;
}

double hum_pairing(const ControlProblem& P, const Eigen::VectorXd& a0, const Eigen::VectorXd& a1,
                   const Eigen::VectorXd& b0, const Eigen::VectorXd& b1) {
  return P.h() * P.h() * (a0.dot(b0) + a1.dot(b1));
}

double FinalNorms::combined() const { return std::hypot(l2_u, hm1_ut); }

FinalNorms verify_control(const ControlProblem& P, const Eigen::VectorXd& u0,
                          const Eigen::VectorXd& u1, const std::vector<Eigen::VectorXd>& v) {
  check_interior(P, u0, "u0");
  check_interior(P, u1, "u1");
  const int N = P.steps();
  const auto nc = static_cast<Eigen::Index>(P.controls().size());
  if (static_cast<int>(v.size()) != N + 1) {
    std::ostringstream os;
    os << "verify_control: control has " << v.size() << " time levels, solver expects " << N + 1;
    throw InvalidArgument(os.str());
  }
  for (const auto& vk : v) {
    if (vk.size() != nc) throw InvalidArgument("verify_control: control node count mismatch");
  }
  const double dt = P.dt(), dt2 = dt * dt;
  Eigen::VectorXd prev = u0;
  Eigen::VectorXd cur = u0 + dt * u1 - 0.5 * dt2 * P.apply_A(u0);
  for (int k = 1; k < N; ++k) {
    Eigen::VectorXd next = 2.0 * cur - prev - dt2 * P.apply_A(cur) + dt2 * P.inject(v[k]);
    nan_guard(next, k + 1);
    prev = std::move(cur);
    cur = std::move(next);
  }
  const Eigen::VectorXd vel = (cur - prev) / dt - 0.5 * dt * P.apply_A(cur);
  return FinalNorms{P.l2(cur), P.hm1(vel)};
}

HUMResult hum_solve(const ControlProblem& P, const Eigen::VectorXd& u0, const Eigen::VectorXd& u1,
                    double tol, int max_iter) {
  check_interior(P, u0, "u0");
  check_interior(P, u1, "u1");
  if (!(P.T() > P.T0())) {
    std::ostringstream os;
    os << "hum_solve: control time T = " << P.T() << " does not exceed T0 = " << P.T0();
    throw Inapplicable(os.str());
  }
  if (!(tol > 0.0)) throw InvalidArgument("hum_solve: tol must be positive");
  if (max_iter < 1) throw InvalidArgument("hum_solve: max_iter must be >= 1");
  HUMResult res;
  for (int n = 0; n <= P.steps(); ++n) res.times.push_back(n * P.dt());
  res.initial = FinalNorms{P.l2(u0), P.hm1(u1)};
  const auto nc = static_cast<Eigen::Index>(P.controls().size());
  const Eigen::Index ni = P.interior_size();
  if (res.initial.combined() == 0.0) {
    res.control.assign(P.steps() + 1, Eigen::VectorXd::Zero(nc));
    res.converged = true;
    res.final_state = FinalNorms{0.0, 0.0};
    res.reduction_factor = 0.0;
    res.e0 = res.e1 = Eigen::VectorXd::Zero(ni);
    return res;
  }

  using Pair = std::pair<Eigen::VectorXd, Eigen::VectorXd>;
  auto apply = [&P](const Pair& e) {
    HUMApplication a = hum_apply(P, e.first, e.second);
    return Pair{std::move(a.xi0), std::move(a.xi1)};
  };
  auto prec = [&P](const Pair& r) { return Pair{P.solve_A(r.first), r.second}; };
  auto dot = [](const Pair& a, const Pair& b) { return a.first.dot(b.first) + a.second.dot(b.second); };
  auto axpy = [](const Pair& x, double a, const Pair& y) {
    return Pair{x.first + a * y.first, x.second + a * y.second};
  };

  // Preconditioned conjugate residual on Lambda e = (u1, -u0).
  Pair x{Eigen::VectorXd::Zero(ni), Eigen::VectorXd::Zero(ni)};
  Pair r{u1, -u0};
  Pair z = prec(r);
  Pair Az = apply(z);
  Pair p = z, Ap = Az;
  const double rn0 = std::sqrt(dot(r, z));
  double zAz = dot(z, Az);
  res.residual_history.push_back(1.0);
  for (int it = 1; it <= max_iter; ++it) {
    const Pair MAp = prec(Ap);
    const double ApMAp = dot(Ap, MAp);
    if (!(zAz > 0.0) || !(ApMAp > 0.0)) {
      std::ostringstream os;
      os << "hum_solve: breakdown (non-positive pairing) at iteration " << it;
      throw NumericalFailure(os.str());
    }
    const double alpha = zAz / ApMAp;
    x = axpy(x, alpha, p);
    r = axpy(r, -alpha, Ap);
    z = axpy(z, -alpha, MAp);
    Pair Azn = apply(z);
    const double zAz_new = dot(z, Azn);
    const double beta = zAz_new / zAz;
    zAz = zAz_new;
    p = axpy(z, beta, p);
    Ap = axpy(Azn, beta, Ap);
    Az = std::move(Azn);
    const double rel = std::sqrt(std::abs(dot(r, z))) / rn0;
    res.residual_history.push_back(rel);
    res.cg_iterations = it;
    res.cg_residual = rel;
    if (rel <= tol) {
      res.converged = true;
      break;
    }
  }
  res.e0 = x.first;
  res.e1 = x.second;
  res.control = hum_apply(P, x.first, x.second).control;
  res.final_state = verify_control(P, u0, u1, res.control);
  res.reduction_factor = res.final_state.combined() / res.initial.combined();
  return res;
}

Eigen::VectorXd mode_data(const ControlProblem& P, int kx, int ky, double amplitude) {
  const Lattice& lat = P.lattice();
  return P.restrict(lat.sample([=](const Point& x) {
    return amplitude * std::sin(kx * kPi * x.x()) * std::sin(ky * kPi * x.y());
  }));
}

Eigen::VectorXd low_frequency_data(const ControlProblem& P, std::uint64_t seed, int kmax) {
  if (kmax < 1) throw InvalidArgument("low_frequency_data: kmax must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(P.interior_size());
  for (int k = 1; k <= kmax; ++k) {
    for (int l = 1; l <= kmax; ++l) {
      const double a = nd(rng) / (k * k + l * l);
      out += mode_data(P, k, l, a);
    }
  }
  return out;
}

}  // namespace wavectl
