#include "wavectl/wavesim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wavectl/error.hpp"
#include "wavectl/numeric.hpp"

namespace wavectl {

std::string to_string(FeedbackKind k) {
  switch (k) {
    case FeedbackKind::none:
      return "none";
    case FeedbackKind::linear:
      return "linear";
    case FeedbackKind::power:
      return "power";
    case FeedbackKind::custom:
      return "custom";
  }
  return "custom";
}

FeedbackLaw make_linear_feedback(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("feedback: linear requires alpha > 0");
  }
  FeedbackLaw f;
  f.kind = FeedbackKind::linear;
  f.alpha = alpha;
  f.p = 1.0;
  f.k_minus = f.k_plus = alpha;
  f.g = [alpha](double s) { return alpha * s; };
  return f;
}

FeedbackLaw make_power_feedback(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidArgument("feedback: power requires p >= 1");
  FeedbackLaw f;
  f.kind = FeedbackKind::power;
  f.p = p;
  f.k_minus = f.k_plus = 1.0;
  f.g = [p](double s) {
    const double a = std::abs(s);
    if (a > 1.0) return s;
    return std::copysign(std::pow(a, p), s);
  };
  return f;
}

FeedbackLaw make_zero_feedback() {
  FeedbackLaw f;
  f.kind = FeedbackKind::none;
  f.g = [](double) { return 0.0; };
  return f;
}

FeedbackLaw make_custom_feedback(std::function<double(double)> g, double k_minus, double k_plus,
                                 double p) {
  if (!g) throw InvalidArgument("feedback: custom law needs a callable");
  FeedbackLaw f;
  f.kind = FeedbackKind::custom;
  f.g = std::move(g);
  f.k_minus = k_minus;
  f.k_plus = k_plus;
  f.p = p;
  return f;
}

FeedbackLaw make_feedback(const FeedbackSpec& spec) {
  switch (spec.kind) {
    case FeedbackKind::linear:
      return make_linear_feedback(spec.alpha);
    case FeedbackKind::power:
      return make_power_feedback(spec.p);
    case FeedbackKind::none:
      return make_zero_feedback();
    case FeedbackKind::custom:
      break;
  }
  throw InvalidArgument("feedback: custom laws cannot be built from a spec");
}

namespace {

constexpr std::size_t kMaxViolationsPerCheck = 16;

std::vector<double> sample_lattice(int samples) {
  if (samples < 2) throw InvalidArgument("validate_feedback: samples must be >= 2");
  const auto pos = logspace(-6.0, 3.0, static_cast<std::size_t>(samples));
  std::vector<double> s;
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) s.push_back(-*it);
  s.push_back(0.0);
  s.insert(s.end(), pos.begin(), pos.end());
  return s;
}

void add_violation(FeedbackValidation& r, FeedbackViolation v) {
  const auto n = std::count_if(r.violations.begin(), r.violations.end(),
                               [&v](const FeedbackViolation& w) { return w.check == v.check; });
  if (static_cast<std::size_t>(n) < kMaxViolationsPerCheck) r.violations.push_back(std::move(v));
}

}  // namespace

FeedbackValidation validate_feedback(const FeedbackLaw& g, int samples) {
  FeedbackValidation r;
  const auto s = sample_lattice(samples);
  r.samples = static_cast<int>(s.size());
  std::vector<double> gs(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) gs[k] = g(s[k]);
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    if (gs[k + 1] < gs[k] - 1e-12 * std::max(1.0, std::abs(gs[k]))) {
      r.monotone = false;
      add_violation(r, {"monotone", s[k + 1], gs[k + 1], gs[k], std::nullopt});
    }
  }
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double a = std::abs(s[k]), ga = std::abs(gs[k]);
    const double upper = g.k_plus * a;
    if (ga > upper * (1.0 + 1e-12) + 1e-300) {
      r.upper_bound = false;
      add_violation(r, {"upper", s[k], gs[k], upper, std::nullopt});
    }
    const double lower = g.k_minus * std::min(a, std::pow(a, g.p));
    if (ga < lower * (1.0 - 1e-12)) {
      r.lower_bound = false;
      add_violation(r, {"lower", s[k], gs[k], lower, std::nullopt});
    }
  }
  return r;
}

FeedbackValidation validate_general_feedback(const std::function<double(const Point&, double)>& g,
                                             double c, double p,
                                             const std::vector<BoundarySample>& points,
                                             int samples) {
  if (!g) throw InvalidArgument("validate_general_feedback: callable required");
  if (!(c > 1.0)) throw InvalidArgument("validate_general_feedback: c must exceed 1");
  if (!(p >= 1.0)) throw InvalidArgument("validate_general_feedback: p must be >= 1");
  FeedbackValidation r;
  const auto s = sample_lattice(samples);
  for (const auto& bp : points) {
    const double mn = std::max(0.0, bp.m_dot_nu);
    double prev = g(bp.x, s.front());
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double gv = g(bp.x, s[k]);
      ++r.samples;
      if (k > 0 && gv < prev - 1e-12 * std::max(1.0, std::abs(prev))) {
        r.monotone = false;
        add_violation(r, {"monotone", s[k], gv, prev, bp.x});
      }
      prev = gv;
      const double a = std::abs(s[k]);
      if (a == 0.0) continue;
      const double base = a <= 1.0 ? std::pow(mn, 1.0 / p) * std::pow(a, 0.5 + 1.0 / p) : mn * a;
      if (std::abs(gv) > c * base * (1.0 + 1e-12)) {
        r.upper_bound = false;
        add_violation(r, {"upper", s[k], gv, c * base, bp.x});
      }
      if (std::abs(gv) < base / c * (1.0 - 1e-12)) {
        r.lower_bound = false;
        add_violation(r, {"lower", s[k], gv, base / c, bp.x});
      }
    }
  }
  return r;
}

double solve_boundary_closure(const FeedbackLaw& g, double c1, double c2) {
  if (g.kind == FeedbackKind::none || c1 == 0.0) return c2;
  if (g.kind == FeedbackKind::linear) return c2 / (1.0 + c1 * g.alpha);
  auto f = [&](double s) { return s + c1 * g(s) - c2; };
  double lo = std::min(0.0, c2) - std::abs(c2);
  double hi = std::max(0.0, c2) + std::abs(c2);
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  for (int k = 0; k < 200 && !(flo < 0.0 && fhi > 0.0); ++k) {
    const double w = std::max(hi - lo, 1.0);
    if (flo >= 0.0) {
      lo -= w;
      flo = f(lo);
    }
    if (fhi <= 0.0) {
      hi += w;
      fhi = f(hi);
    }
  }
  if (!(flo < 0.0 && fhi > 0.0)) {
    throw NumericalFailure("boundary closure: root not bracketed (feedback not monotone?)");
  }
  // Illinois false position; falls back to bisection when stalled.
  int side = 0;
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    s = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(s > lo && s < hi)) s = 0.5 * (lo + hi);
    const double fs = f(s);
    const double scale = std::max({std::abs(c2), std::abs(s), 1e-300});
    if (fs == 0.0 || std::abs(fs) <= 1e-15 * scale || hi - lo <= 4e-16 * scale) return s;
    if (fs > 0.0) {
      hi = s;
      fhi = fs;
      if (side == -1) flo *= 0.5;
      side = -1;
    } else {
      lo = s;
      flo = fs;
      if (side == 1) fhi *= 0.5;
      side = 1;
    }
  }
  return s;
}

WaveSolver::WaveSolver(BoundaryLayout layout, FeedbackLaw g)
    : layout_(std::move(layout)), g_(std::move(g)) {
  if (!g_.g) throw InvalidArgument("wavesim: feedback law has no callable");
  for (int k = 0; k < layout_.lattice.nodes(); ++k) {
    if (layout_.kind[k] == NodeKind::neumann) neumann_nodes_.push_back(k);
  }
  scratch_.resize(layout_.lattice.nodes());
}

double WaveSolver::two_level_energy(const std::vector<double>& a, const std::vector<double>& b,
                                    double dt) const {
  apply_stiffness(layout_.lattice, a, scratch_);
  double kin = 0.0, pot = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (layout_.kind[k] == NodeKind::dirichlet) continue;
    const double d = (a[k] - b[k]) / dt;
    kin += layout_.mass[k] * d * d;
    pot += scratch_[k] * b[k];
  }
  return 0.5 * (kin + pot);
}

WaveState WaveSolver::initial_state(const std::vector<double>& u0, const std::vector<double>& u1,
                                    double dt) const {
  const Lattice& lat = layout_.lattice;
  const auto n = static_cast<std::size_t>(lat.nodes());
  if (u0.size() != n || u1.size() != n) throw InvalidArgument("wavesim: initial data size mismatch");
  const double h = lat.h();
  if (!(dt > 0.0) || dt > kCflFactor * h * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "wavesim: dt = " << dt << " violates 0 < dt <= 0.4 h = " << kCflFactor * h;
    throw InvalidArgument(os.str());
  }
  double umax = 0.0;
  for (double v : u0) {
    if (!std::isfinite(v)) throw InvalidArgument("wavesim: non-finite initial data");
    umax = std::max(umax, std::abs(v));
  }
  for (double v : u1) {
    if (!std::isfinite(v)) throw InvalidArgument("wavesim: non-finite initial data");
  }
  WaveState s;
  s.h = h;
  s.dt = dt;
  s.u = u0;
  std::vector<double> v1 = u1;
  for (std::size_t k = 0; k < n; ++k) {
    if (layout_.kind[k] != NodeKind::dirichlet) continue;
    if (std::abs(u0[k]) > 1e-12 * std::max(1.0, umax)) {
      std::ostringstream os;
      os << "wavesim: u0 does not vanish at Dirichlet node " << k;
      throw InvalidArgument(os.str());
    }
    s.u[k] = 0.0;
    v1[k] = 0.0;
  }
  apply_stiffness(lat, s.u, scratch_);
  s.u_prev.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (layout_.kind[k] == NodeKind::dirichlet) {
      s.u_prev[k] = 0.0;
      continue;
    }
    const double acc = (-scratch_[k] - layout_.damping[k] * g_(v1[k])) / layout_.mass[k];
    s.u_prev[k] = s.u[k] - dt * v1[k] + 0.5 * dt * dt * acc;
  }
  s.v.resize(n);
  for (std::size_t k = 0; k < n; ++k) s.v[k] = (s.u[k] - s.u_prev[k]) / dt;
  return s;
}

WaveState WaveSolver::step(const WaveState& s, StepInfo* info) const {
  const Lattice& lat = layout_.lattice;
  const auto n = static_cast<std::size_t>(lat.nodes());
  if (s.u.size() != n || s.u_prev.size() != n) throw InvalidArgument("wavesim: state size mismatch");
  const double dt = s.dt, dt2 = dt * dt;
  std::vector<double> ku(n);
  apply_stiffness(lat, s.u, ku);
  WaveState next;
  next.h = s.h;
  next.dt = dt;
  next.level = s.level + 1;
  next.t = static_cast<double>(next.level) * dt;
  next.u.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    next.u[k] = layout_.kind[k] == NodeKind::dirichlet
                    ? 0.0
                    : 2.0 * s.u[k] - s.u_prev[k] - dt2 * ku[k] / layout_.mass[k];
  }
  double diss = 0.0;
  for (int k : neumann_nodes_) {
    const double mk = layout_.mass[k];
    const double R = (2.0 * mk / dt2) * (s.u[k] - s.u_prev[k]) - ku[k];
    const double c1 = layout_.damping[k] * dt / (2.0 * mk);
    const double c2 = R * dt / (2.0 * mk);
    const double v = solve_boundary_closure(g_, c1, c2);
    next.u[k] = s.u_prev[k] + 2.0 * dt * v;
    diss += layout_.damping[k] * g_(v) * v;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(next.u[k])) {
      std::ostringstream os;
      os << "wavesim: non-finite value at node " << k << " (i=" << lat.i_of(static_cast<int>(k))
         << ", j=" << lat.j_of(static_cast<int>(k)) << ")";
      throw NumericalFailure(os.str());
    }
  }
  next.u_prev = s.u;
  next.v.resize(n);
  for (std::size_t k = 0; k < n; ++k) next.v[k] = (next.u[k] - s.u[k]) / dt;
  if (info) {
    info->dissipation_rate = diss;
    info->energy_half = two_level_energy(next.u, s.u, dt);
  }
  return next;
}

WaveState step(const WaveState& state, const BoundaryLayout& layout, const FeedbackLaw& g,
               double dt) {
  WaveSolver solver(layout, g);
  WaveState s = state;
  s.dt = dt;
  if (!(dt > 0.0) || dt > kCflFactor * layout.lattice.h() * (1.0 + 1e-12)) {
    throw InvalidArgument("wavesim: dt violates 0 < dt <= 0.4 h");
  }
  return solver.step(s);
}

SimulationResult simulate(const SimulationConfig& cfg) {
  if (!cfg.domain.is_unit_square()) throw InvalidArgument("wavesim: domain must be the unit square");
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) throw InvalidArgument("wavesim: T must be positive");
  if (cfg.output_stride < 1) throw InvalidArgument("wavesim: output_stride must be >= 1");
  const Lattice lat = Lattice::from_spacing(cfg.h);
  BoundaryLayout layout;
  if (cfg.layout) {
    if (!(cfg.layout->lattice == lat)) throw InvalidArgument("wavesim: layout lattice mismatch");
    layout = *cfg.layout;
  } else {
    if (cfg.field.dim() != 2) throw InvalidArgument("wavesim: field must be 2-dimensional");
    layout = snap_partition(lat, partition(cfg.field, cfg.domain, cfg.samples_per_edge), cfg.field);
  }
  const double dt_req = cfg.dt > 0.0 ? cfg.dt : kCflFactor * lat.h();
  if (dt_req > kCflFactor * lat.h() * (1.0 + 1e-12)) {
    throw InvalidArgument("wavesim: dt exceeds the CFL limit 0.4 h");
  }
  const long long steps = static_cast<long long>(std::ceil(cfg.T / dt_req - 1e-9));
  const double dt = cfg.T / static_cast<double>(steps);

  std::vector<double> u0 = cfg.u0_nodes ? *cfg.u0_nodes
                                        : (cfg.u0 ? lat.sample(cfg.u0)
                                                  : std::vector<double>(lat.nodes(), 0.0));
  std::vector<double> u1 = cfg.u1_nodes ? *cfg.u1_nodes
                                        : (cfg.u1 ? lat.sample(cfg.u1)
                                                  : std::vector<double>(lat.nodes(), 0.0));

  WaveSolver solver(layout, cfg.feedback);
  SimulationResult res;
  res.trace.h = lat.h();
  res.trace.dt = dt;
  res.trace.field_spec = cfg.field_spec;
  res.trace.feedback_spec = cfg.feedback_spec;
  std::vector<double> snaps = cfg.snapshot_times;
  std::sort(snaps.begin(), snaps.end());
  std::size_t next_snap = 0;

  WaveState state = solver.initial_state(u0, u1, dt);
  double e_prev = solver.two_level_energy(state.u, state.u_prev, dt);
  for (long long n = 0;; ++n) {
    StepInfo info;
    WaveState next;
    try {
      next = solver.step(state, &info);
    } catch (const NumericalFailure& e) {
      std::ostringstream os;
      os << e.what() << " at t = " << state.t;
      throw NumericalFailure(os.str());
    }
    const double E = 0.5 * (e_prev + info.energy_half);
    if (n % cfg.output_stride == 0 || n == steps) {
      res.trace.rows.push_back(TraceRow{state.t, E, info.dissipation_rate});
    }
    while (next_snap < snaps.size() && state.t >= snaps[next_snap] - 0.5 * dt) {
      res.snapshots.push_back(Snapshot{state.t, state.u});
      ++next_snap;
    }
    if (n == steps) break;
    e_prev = info.energy_half;
    state = std::move(next);
  }
  res.final_state = std::move(state);
  res.layout = std::move(layout);
  return res;
}

double dissipation_check(const EnergyTrace& trace) {
  if (trace.rows.size() < 2) return 0.0;
  const double e0 = trace.rows.front().E;
  if (!(e0 > 0.0)) return 0.0;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < trace.rows.size(); ++k) {
    const auto& a = trace.rows[k];
    const auto& b = trace.rows[k + 1];
    const double dissipated = 0.5 * (a.dissipation_rate + b.dissipation_rate) * (b.t - a.t);
    worst = std::max(worst, (b.E - a.E + dissipated) / e0);
  }
  return worst;
}

}  // namespace wavectl
