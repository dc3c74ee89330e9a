#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wavectl/fields.hpp"
#include "wavectl/geometry.hpp"
#include "wavectl/lattice.hpp"

namespace wavectl {

enum class FeedbackKind { none, linear, power, custom };
std::string to_string(FeedbackKind k);

struct FeedbackLaw {
  FeedbackKind kind = FeedbackKind::none;
  double alpha = 0.0;
  double p = 1.0;
  double k_minus = 0.0;
  double k_plus = 0.0;
  std::function<double(double)> g;
  std::function<double(const Point&, double)> g_xs;  // optional position-dependent form

  double operator()(double s) const { return g(s); }
};

struct FeedbackSpec {
  FeedbackKind kind = FeedbackKind::linear;
  double alpha = 1.0;
  double p = 1.0;
};

FeedbackLaw make_feedback(const FeedbackSpec& spec);
FeedbackLaw make_linear_feedback(double alpha);
FeedbackLaw make_power_feedback(double p);
FeedbackLaw make_zero_feedback();
FeedbackLaw make_custom_feedback(std::function<double(double)> g, double k_minus, double k_plus,
                                 double p);

struct FeedbackViolation {
  std::string check;  // "monotone", "upper", "lower"
  double s = 0.0;
  double value = 0.0;
  double bound = 0.0;
  std::optional<Point> x;
};

struct FeedbackValidation {
  bool monotone = true;
  bool upper_bound = true;
  bool lower_bound = true;
  int samples = 0;
  std::vector<FeedbackViolation> violations;
  bool ok() const { return monotone && upper_bound && lower_bound; }
};

// Checks the monotone, linear-growth and min(|s|, |s|^p) conditions on
// s in +-[1e-6, 1e3], `samples` logarithmic points per sign.
FeedbackValidation validate_feedback(const FeedbackLaw& g, int samples = 200);

// Two-sided bounds for a position-dependent g(x, s) with constant c > 1:
// (m.nu)^{1/p}|s|^{1/2+1/p} for |s| <= 1 and (m.nu)|s| for |s| >= 1, up to c^{+-1}.
struct BoundarySample {
  Point x;
  double m_dot_nu = 0.0;
};
FeedbackValidation validate_general_feedback(const std::function<double(const Point&, double)>& g,
                                             double c, double p,
                                             const std::vector<BoundarySample>& points,
                                             int samples = 200);

// Fields at time level n: u = u^n, u_prev = u^{n-1}; v = (u^n - u^{n-1})/dt.
struct WaveState {
  double h = 0.0;
  double t = 0.0;
  double dt = 0.0;
  long long level = 0;
  std::vector<double> u;
  std::vector<double> u_prev;
  std::vector<double> v;
};

struct StepInfo {
  double dissipation_rate = 0.0;  // sum_i b_i g(s_i) s_i at level n
  double energy_half = 0.0;       // two-level energy between n and n+1
};

// Root of s + c1 g(s) = c2 for monotone g, c1 >= 0.
double solve_boundary_closure(const FeedbackLaw& g, double c1, double c2);

class WaveSolver {
 public:
  WaveSolver(BoundaryLayout layout, FeedbackLaw g);

  const BoundaryLayout& layout() const { return layout_; }
  const FeedbackLaw& feedback() const { return g_; }

  WaveState initial_state(const std::vector<double>& u0, const std::vector<double>& u1,
                          double dt) const;
  WaveState step(const WaveState& s, StepInfo* info = nullptr) const;

  // 1/2 |(a - b)/dt|_M^2 + 1/2 <K a, b>
  double two_level_energy(const std::vector<double>& a, const std::vector<double>& b,
                          double dt) const;

 private:
  BoundaryLayout layout_;
  FeedbackLaw g_;
  std::vector<int> neumann_nodes_;
  mutable std::vector<double> scratch_;
};

WaveState step(const WaveState& state, const BoundaryLayout& layout, const FeedbackLaw& g,
               double dt);

struct TraceRow {
  double t = 0.0;
  double E = 0.0;
  double dissipation_rate = 0.0;
};

struct EnergyTrace {
  std::vector<TraceRow> rows;
  std::string field_spec;
  std::string feedback_spec;
  double h = 0.0;
  double dt = 0.0;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> u;
};

struct SimulationConfig {
  MultiplierField field;
  PolygonDomain domain = unit_square();
  FeedbackLaw feedback;
  std::function<double(const Point&)> u0;
  std::function<double(const Point&)> u1;
  std::optional<std::vector<double>> u0_nodes;  // overrides u0 when set
  std::optional<std::vector<double>> u1_nodes;
  double T = 1.0;
  double h = 1.0 / 64;
  double dt = 0.0;  // 0 selects 0.4 h
  int output_stride = 1;
  std::vector<double> snapshot_times;
  int samples_per_edge = 256;
  std::optional<BoundaryLayout> layout;  // overrides the snapped partition
  std::string field_spec;
  std::string feedback_spec;
};

struct SimulationResult {
  EnergyTrace trace;
  std::vector<Snapshot> snapshots;
  WaveState final_state;
  BoundaryLayout layout;
};

SimulationResult simulate(const SimulationConfig& config);

double dissipation_check(const EnergyTrace& trace);

inline constexpr double kCflFactor = 0.4;

}  // namespace wavectl
