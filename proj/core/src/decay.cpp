#include "wavectl/decay.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wavectl/error.hpp"
#include "wavectl/numeric.hpp"

namespace wavectl {

std::string to_string(DecayModel m) {
  return m == DecayModel::exponential ? "exponential" : "power";
}

namespace {

struct Window {
  std::vector<double> t;
  std::vector<double> E;
  bool truncated = false;
};

Window select_window(const EnergyTrace& trace, double t1, double t2) {
  if (!(t2 > t1)) throw InvalidArgument("fit: window must satisfy t1 < t2");
  if (trace.rows.empty()) throw InvalidArgument("fit: empty trace");
  if (t1 < trace.rows.front().t) throw InvalidArgument("fit: window starts before the trace");
  const double e0 = trace.rows.front().E;
  Window w;
  for (const auto& r : trace.rows) {
    if (r.t < t1 || r.t > t2) continue;
    if (r.E <= 1e-14 * e0) {
      w.truncated = true;
      break;
    }
    w.t.push_back(r.t);
    w.E.push_back(r.E);
  }
  if (w.t.size() < 10) {
    std::ostringstream os;
    os << "fit: window [" << t1 << ", " << t2 << "] holds " << w.t.size()
       << " usable samples, need at least 10";
    throw InvalidArgument(os.str());
  }
  return w;
}

}  // namespace

DecayFit fit_exponential(const EnergyTrace& trace, double t1, double t2) {
  const Window w = select_window(trace, t1, t2);
  std::vector<double> y(w.E.size());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = std::log(w.E[k]);
  const LineFit lf = fit_line(w.t, y);
  DecayFit f;
  f.model = DecayModel::exponential;
  f.t1 = t1;
  f.t2 = t2;
  f.rate_or_exponent = -lf.slope;
  f.intercept = lf.intercept;
  f.goodness = lf.max_abs_residual;
  f.samples = static_cast<int>(w.t.size());
  f.truncated = w.truncated;
  if (!(f.rate_or_exponent * (w.t.back() - w.t.front()) > 1e-12)) {
    f.verdict = "not decaying";
    return f;
  }
  const double e0 = trace.rows.front().E;
  const double C = 1.0 / f.rate_or_exponent;
  bool dominated = true;
  for (std::size_t k = 0; k < w.t.size(); ++k) {
    if (w.E[k] > e0 * std::exp(1.0 - w.t[k] / C) * (1.0 + 1e-12)) dominated = false;
  }
  f.verdict = dominated ? "consistent" : "inconsistent";
  return f;
}

DecayFit fit_power(const EnergyTrace& trace, double t1, double t2, double p) {
  if (!(t1 > 0.0)) throw InvalidArgument("fit_power: window start must be positive");
  const Window w = select_window(trace, t1, t2);
  std::vector<double> x(w.t.size()), y(w.E.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    x[k] = std::log(w.t[k]);
    y[k] = std::log(w.E[k]);
  }
  const LineFit lf = fit_line(x, y);
  DecayFit f;
  f.model = DecayModel::power;
  f.t1 = t1;
  f.t2 = t2;
  f.rate_or_exponent = lf.slope;
  f.intercept = lf.intercept;
  f.goodness = lf.max_abs_residual;
  f.samples = static_cast<int>(w.t.size());
  f.truncated = w.truncated;
  if (p > 1.0) {
    f.theoretical_exponent = -2.0 / (p - 1.0);
    const double rel = std::abs(f.rate_or_exponent - f.theoretical_exponent) /
                       std::abs(f.theoretical_exponent);
    f.verdict = rel <= 0.3 ? "consistent" : "inconsistent";
  } else {
    f.verdict = f.rate_or_exponent < 0.0 ? "decaying" : "not decaying";
  }
  return f;
}

double komornik_bound(double E0, double C, double alpha, double t) {
  const double T = C * std::pow(E0, alpha);
  if (alpha == 0.0) return E0 * std::exp(1.0 - t / T);
  return E0 * std::pow((T + alpha * T) / (T + alpha * t), 1.0 / alpha);
}

KomornikResult komornik_verify(std::span<const double> t, std::span<const double> E, double alpha) {
  if (t.size() != E.size() || t.size() < 2) {
    throw InvalidArgument("komornik: need at least two paired samples");
  }
  if (!(alpha >= 0.0)) throw InvalidArgument("komornik: alpha must be >= 0");
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!std::isfinite(E[k]) || E[k] < 0.0) throw InvalidArgument("komornik: E must be >= 0");
    if (k > 0 && !(t[k] > t[k - 1])) throw InvalidArgument("komornik: times must increase");
    if (k > 0 && E[k] > E[k - 1] + 1e-12 * E[k - 1]) {
      std::ostringstream os;
      os << "komornik: E is not non-increasing at t = " << t[k];
      throw InvalidArgument(os.str());
    }
  }
  KomornikResult r;
  r.alpha = alpha;
  const std::size_t n = t.size();
  if (E[0] == 0.0) {
    r.tail_model = "none";
    return r;
  }
  std::vector<double> F(n);
  for (std::size_t k = 0; k < n; ++k) F[k] = std::pow(E[k], alpha + 1.0);

  // Tail beyond the last sample, from the better of two local fits.
  r.tail_model = "none";
  if (F.back() > 0.0) {
    const std::size_t m = std::max<std::size_t>(10, n / 10);
    const std::size_t start = n > m ? n - m : 0;
    std::vector<double> tt, lt, lf;
    for (std::size_t k = start; k < n; ++k) {
      if (F[k] <= 0.0) continue;
      tt.push_back(t[k]);
      lt.push_back(std::log(t[k]));
      lf.push_back(std::log(F[k]));
    }
    double best_res = std::numeric_limits<double>::infinity();
    if (tt.size() >= 2) {
      const LineFit e = fit_line(tt, lf);
      if (e.slope < 0.0) {
        best_res = e.max_abs_residual;
        r.tail_estimate = F.back() / (-e.slope);
        r.tail_model = "exponential";
      }
      if (t[start] > 0.0) {
        const LineFit p = fit_line(lt, lf);
        if (p.slope < -1.0 && p.max_abs_residual < best_res) {
          r.tail_estimate = F.back() * t.back() / (-p.slope - 1.0);
          r.tail_model = "power";
        }
      }
    }
    if (r.tail_model == "none") {
      r.C_best = std::numeric_limits<double>::infinity();
      r.conclusion_holds = false;
      return r;
    }
  }

  std::vector<double> tail(n, 0.0);
  tail[n - 1] = r.tail_estimate;
  for (std::size_t k = n - 1; k-- > 0;) {
    tail[k] = tail[k + 1] + 0.5 * (F[k] + F[k + 1]) * (t[k + 1] - t[k]);
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (E[k] <= 0.0) break;
    const double ratio = tail[k] / E[k];
    if (ratio > r.C_best) {
      r.C_best = ratio;
      r.t_at_sup = t[k];
    }
  }
  r.T = r.C_best * std::pow(E[0], alpha);
  r.worst_ratio = 0.0;
  if (r.C_best > 0.0) {
    for (std::size_t k = 0; k < n; ++k) {
      if (t[k] < r.T) continue;
      const double b = komornik_bound(E[0], r.C_best, alpha, t[k]);
      r.worst_ratio = std::max(r.worst_ratio, E[k] / b);
    }
  }
  r.conclusion_holds = r.worst_ratio <= 1.0 + 1e-12;
  return r;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

SpMat restrict_matrix(const SpMat& K, const std::vector<int>& map, int n) {
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < K.outerSize(); ++c) {
    for (SpMat::InnerIterator it(K, c); it; ++it) {
      const int r = map[it.row()], cc = map[it.col()];
      if (r >= 0 && cc >= 0) trip.emplace_back(r, cc, it.value());
    }
  }
  SpMat out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace

ConstantsReport estimate_constants(const BoundaryLayout& layout) {
  const Lattice& lat = layout.lattice;
  const int N = lat.nodes();
  if (layout.count(NodeKind::dirichlet) == 0) {
    throw InvalidArgument("estimate_constants: Dirichlet part is empty on the lattice");
  }
  ConstantsReport rep;
  rep.h = lat.h();
  const SpMat K = stiffness_matrix(lat);
  constexpr int kMaxIter = 10000;

  // Smallest eigenvalue of K u = mu M u on the free nodes.
  std::vector<int> map(N, -1);
  int nf = 0;
  for (int k = 0; k < N; ++k) {
    if (layout.is_free(k)) map[k] = nf++;
  }
  const SpMat Kf = restrict_matrix(K, map, nf);
  Eigen::VectorXd Mf(nf);
  for (int k = 0; k < N; ++k) {
    if (map[k] >= 0) Mf[map[k]] = layout.mass[k];
  }
  Eigen::SimplicialLDLT<SpMat> ldlt(Kf);
  if (ldlt.info() != Eigen::Success) throw NumericalFailure("estimate_constants: factorization failed");
  Eigen::VectorXd x = Eigen::VectorXd::Ones(nf);
  double mu = 0.0;
  bool converged = false;
  for (int it = 1; it <= kMaxIter; ++it) {
    Eigen::VectorXd y = ldlt.solve(Mf.cwiseProduct(x));
    y /= std::sqrt(y.dot(Mf.cwiseProduct(y)));
    const double mu_new = y.dot(Kf * y);
    x = std::move(y);
    rep.poincare_iterations = it;
    rep.poincare_residual = std::abs(mu_new - mu) / mu_new;
    if (it > 1 && rep.poincare_residual <= 1e-8) {
      converged = true;
      mu = mu_new;
      break;
    }
    mu = mu_new;
  }
  if (!converged) throw NumericalFailure("estimate_constants: inverse iteration did not converge");
  rep.C_P = 1.0 / mu;

  // Largest ratio of boundary mass to the discrete H^1 form, all nodes free.
  Eigen::VectorXd M(N), B = Eigen::VectorXd::Zero(N);
  for (int k = 0; k < N; ++k) M[k] = layout.mass[k];
  for (const auto& b : layout.boundary) B[b.node] = lat.h();
  SpMat H = K;
  for (int k = 0; k < N; ++k) H.coeffRef(k, k) += M[k];
  Eigen::SimplicialLDLT<SpMat> hl(H);
  if (hl.info() != Eigen::Success) throw NumericalFailure("estimate_constants: factorization failed");
  Eigen::VectorXd z = Eigen::VectorXd::Ones(N);
  double tau = 0.0;
  converged = false;
  for (int it = 1; it <= kMaxIter; ++it) {
    Eigen::VectorXd y = hl.solve(B.cwiseProduct(z));
    const double hn = y.dot(H * y);
    y /= std::sqrt(hn);
    const double tau_new = y.dot(B.cwiseProduct(y));
    z = std::move(y);
    rep.trace_iterations = it;
    rep.trace_residual = std::abs(tau_new - tau) / tau_new;
    if (it > 1 && rep.trace_residual <= 1e-10) {
      converged = true;
      tau = tau_new;
      break;
    }
    tau = tau_new;
  }
  if (!converged) throw NumericalFailure("estimate_constants: power iteration did not converge");
  rep.C_Tr = tau;
  return rep;
}

double speed_theta(double c_m, double a0, double k_minus, double k_plus, double C_P, double C_Tr,
                   double lambda) {
  const double q = k_plus * a0 * a0 / 4.0 * (1.0 + C_P) * C_Tr;
  return c_m / (k_minus / lambda + k_plus * lambda + q * lambda * lambda);
}

SpeedBound speed_bound(double c_m, double a0, double k_minus, double k_plus, double C_P,
                       double C_Tr, std::span<const double> lambda_grid) {
  if (!(c_m > 0.0 && a0 > 0.0 && k_minus > 0.0 && k_plus > 0.0)) {
    throw InvalidArgument("speed_bound: c_m, a0, k_minus, k_plus must be positive");
  }
  if (!(C_P >= 0.0 && C_Tr >= 0.0)) throw InvalidArgument("speed_bound: C_P, C_Tr must be >= 0");
  if (lambda_grid.empty()) throw InvalidArgument("speed_bound: empty lambda grid");
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    if (!(lambda_grid[k] > 0.0) || (k > 0 && !(lambda_grid[k] > lambda_grid[k - 1]))) {
      throw InvalidArgument("speed_bound: lambda grid must be positive and increasing");
    }
  }
  SpeedBound s;
  double best = -1.0;
  for (double l : lambda_grid) {
    const double th = speed_theta(c_m, a0, k_minus, k_plus, C_P, C_Tr, l);
    s.lambda.push_back(l);
    s.theta.push_back(th);
    if (th > best) {
      best = th;
      s.lambda_grid_star = l;
    }
  }
  // Stationary point: (k+ Q/2) l^3 + k+ l^2 - k- = 0, Q = a0^2 (1 + C_P) C_Tr.
  const double Q = a0 * a0 * (1.0 + C_P) * C_Tr;
  auto fp = [&](double l) { return 0.5 * k_plus * Q * l * l * l + k_plus * l * l - k_minus; };
  s.bracket_upper = std::sqrt(k_minus / k_plus);
  double lo = 0.0, hi = s.bracket_upper;
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fp(mid) > 0.0 ? hi : lo) = mid;
  }
  s.lambda_star = 0.5 * (lo + hi);
  s.theta_star = speed_theta(c_m, a0, k_minus, k_plus, C_P, C_Tr, s.lambda_star);
  const double inf = std::numeric_limits<double>::infinity();
  const double cube = Q > 0.0 ? std::cbrt(k_minus / (k_plus * Q)) : inf;
  const double lin = Q > 0.0 ? 2.0 / Q : inf;
  s.bracket_lower = std::min({cube, lin, s.bracket_upper});
  s.corrected_lower = std::min({cube, std::sqrt(k_minus / (2.0 * k_plus)), s.bracket_upper});
  const double eps = 1e-12 * s.bracket_upper;
  s.in_bracket = s.lambda_star >= s.bracket_lower - eps && s.lambda_star <= s.bracket_upper + eps;
  s.in_corrected_bracket =
      s.lambda_star >= s.corrected_lower - eps && s.lambda_star <= s.bracket_upper + eps;
  return s;
}

}  // namespace wavectl
