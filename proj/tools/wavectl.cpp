#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "wavectl/control.hpp"
#include "wavectl/decay.hpp"
#include "wavectl/error.hpp"
#include "wavectl/fields.hpp"
#include "wavectl/geometry.hpp"
#include "wavectl/io.hpp"
#include "wavectl/numeric.hpp"
#include "wavectl/rellich.hpp"
#include "wavectl/wavesim.hpp"

namespace fs = std::filesystem;
using namespace wavectl;
using io::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct Run {
  Json config;
  Json resolved;
  fs::path base_dir;
  fs::path out_dir;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;

  void write(const std::string& name, const std::string& content) {
    io::write_atomic(out_dir / name, content);
    outputs.push_back(name);
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  // Fills `key` with `fallback` in the resolved echo when absent.
  template <class T>
  void default_to(const char* key, const T& fallback) {
    if (!resolved.contains(key)) resolved[key] = fallback;
  }
};

const Json& require(const Json& cfg, const char* key, const std::string& where) {
  if (!cfg.contains(key)) throw InvalidArgument(where + ": missing key \"" + key + "\"");
  return cfg.at(key);
}

PolygonDomain domain_or_square(Run& run) {
  if (run.config.contains("domain")) return io::domain_from_json(run.config.at("domain"));
  PolygonDomain sq = unit_square();
  run.resolved["domain"] = io::domain_to_json(sq);
  return sq;
}

int cmd_cone(Run& run) {
  const Json& c = run.config;
  io::reject_unknown_keys(c, {"field", "box", "resolution"}, "cone");
  const MultiplierField m = io::field_from_json(require(c, "field", "cone"));
  const Box box = c.contains("box") ? io::box_from_json(c.at("box"), "cone.box") : Box::unit(m.dim());
  const double res = io::get_number(c, "resolution", "cone", 1.0 / 16);
  run.default_to("box", Json{{"lo", io::to_json(box.lo)}, {"hi", io::to_json(box.hi)}});
  run.default_to("resolution", res);
  const ConeReport r = cone_check(m, box, res);
  run.write_json("cone.json", Json{{"family", to_string(m.family())}, {"report", io::to_json(r)}});
  return r.satisfied ? kExitOk : kExitNegative;
}

int cmd_partition(Run& run) {
  const Json& c = run.config;
  io::reject_unknown_keys(c, {"field", "domain", "samples_per_edge"}, "partition");
  const MultiplierField m = io::field_from_json(require(c, "field", "partition"));
  const PolygonDomain dom = domain_or_square(run);
  const int samples = io::get_int(c, "samples_per_edge", "partition", 256);
  run.default_to("samples_per_edge", samples);
  const BoundaryPartition p = partition(m, dom, samples);
  const RReport R = check_R(p);
  const S2Report S2 = check_S2(p);
  run.write("partition.csv", io::partition_csv(p));
  run.write("interfaces.csv", io::interfaces_csv(p));
  run.write_json("partition.json", Json{{"dirichlet_length", io::number(p.dirichlet_length)},
                                        {"neumann_length", io::number(p.neumann_length)},
                                        {"tolerance", io::number(p.tolerance)},
                                        {"interfaces", p.interfaces.size()},
                                        {"R", io::to_json(R)},
                                        {"S2", io::to_json(S2, p)},
                                        {"warnings", p.warnings}});
  return R.satisfied() && S2.satisfied ? kExitOk : kExitNegative;
}

std::vector<double> times_from_json(const Json& j, const std::string& where) {
  std::vector<double> t;
  if (!j.is_array()) throw InvalidArgument(where + ": expected an array of times");
  for (const auto& x : j) {
    if (!x.is_number()) throw InvalidArgument(where + ": times must be numbers");
    t.push_back(x.get<double>());
  }
  return t;
}

int cmd_simulate(Run& run) {
  const Json& c = run.config;
  io::reject_unknown_keys(c, {"field", "domain", "feedback", "u0", "u1", "T", "h", "dt", "output_stride",
                              "snapshot_times", "samples_per_edge"},
                          "simulate");
  SimulationConfig sc;
  sc.field = io::field_from_json(require(c, "field", "simulate"));
  sc.field_spec = c.at("field").dump();
  sc.domain = domain_or_square(run);
  const Json fb = c.contains("feedback") ? c.at("feedback") : Json{{"kind", "linear"}, {"alpha", 1.0}};
  run.default_to("feedback", fb);
  sc.feedback = io::feedback_from_json(fb);
  sc.feedback_spec = fb.dump();
  sc.T = io::get_number(c, "T", "simulate");
  sc.h = io::get_number(c, "h", "simulate", 1.0 / 64);
  sc.dt = io::get_number(c, "dt", "simulate", 0.0);
  sc.output_stride = io::get_int(c, "output_stride", "simulate", 1);
  sc.samples_per_edge = io::get_int(c, "samples_per_edge", "simulate", 256);
  if (c.contains("snapshot_times")) sc.snapshot_times = times_from_json(c.at("snapshot_times"), "simulate");
  run.default_to("h", sc.h);
  run.default_to("dt", sc.dt > 0.0 ? sc.dt : kCflFactor * sc.h);
  run.default_to("output_stride", sc.output_stride);
  run.default_to("samples_per_edge", sc.samples_per_edge);
  const Lattice lat = Lattice::from_spacing(sc.h);
  const Json zero{{"kind", "zero"}};
  const Json u0 = c.contains("u0") ? c.at("u0") : zero;
  const Json u1 = c.contains("u1") ? c.at("u1") : zero;
  run.default_to("u0", u0);
  run.default_to("u1", u1);
  sc.u0_nodes = io::lattice_data_from_json(u0, lat, run.base_dir);
  sc.u1_nodes = io::lattice_data_from_json(u1, lat, run.base_dir);

  const SimulationResult r = simulate(sc);
  run.write("trace.csv", io::trace_csv(r.trace));
  for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
    run.write("snapshot_" + std::to_string(k) + ".csv",
              io::snapshot_csv(r.trace.h, r.snapshots[k].t, r.snapshots[k].u));
  }
  const auto& rows = r.trace.rows;
  run.write_json("simulate.json", Json{{"h", io::number(r.trace.h)},
                                       {"dt", io::number(r.trace.dt)},
                                       {"rows", rows.size()},
                                       {"E_initial", io::number(rows.empty() ? 0.0 : rows.front().E)},
                                       {"E_final", io::number(rows.empty() ? 0.0 : rows.back().E)},
                                       {"dissipation_check", io::number(dissipation_check(r.trace))},
                                       {"neumann_nodes", r.layout.count(NodeKind::neumann)},
                                       {"dirichlet_nodes", r.layout.count(NodeKind::dirichlet)}});
  return kExitOk;
}

int cmd_fit(Run& run) {
  const Json& c = run.config;
  io::reject_unknown_keys(c, {"trace", "model", "window", "p", "komornik_alpha", "speed_bound"}, "fit");
  const Json& tp = require(c, "trace", "fit");
  if (!tp.is_string()) throw InvalidArgument("fit: \"trace\" must be a path");
  fs::path path = tp.get<std::string>();
  if (path.is_relative()) path = run.base_dir / path;
  const EnergyTrace trace = io::trace_from_csv(io::read_text_file(path));
  if (trace.rows.size() < 2) throw InvalidArgument("fit: trace has fewer than 2 rows");
  const std::string model = c.contains("model") ? c.at("model").get<std::string>() : "exponential";
  run.default_to("model", model);
  if (model != "exponential" && model != "power") throw InvalidArgument("fit: unknown model \"" + model + "\"");
  double t1 = model == "power" ? trace.rows[1].t : trace.rows.front().t;
  double t2 = trace.rows.back().t;
  if (c.contains("window")) {
    const auto w = times_from_json(c.at("window"), "fit.window");
    if (w.size() != 2) throw InvalidArgument("fit: window must be [t1, t2]");
    t1 = w[0];
    t2 = w[1];
  }
  run.default_to("window", Json{t1, t2});
  const DecayFit fit = model == "power" ? fit_power(trace, t1, t2, io::get_number(c, "p", "fit", 0.0))
                                        : fit_exponential(trace, t1, t2);
  Json out{{"fit", io::to_json(fit)}};
  bool ok = fit.verdict != "not decaying" && fit.verdict != "inconsistent";
  if (c.contains("komornik_alpha")) {
    std::vector<double> t, E;
    for (const auto& r : trace.rows) {
      t.push_back(r.t);
      E.push_back(r.E);
    }
    const KomornikResult k = komornik_verify(t, E, io::get_number(c, "komornik_alpha", "fit"));
    out["komornik"] = io::to_json(k);
    ok = ok && k.conclusion_holds;
  }
  if (c.contains("speed_bound")) {
    const Json& s = c.at("speed_bound");
    const char* where = "fit.speed_bound";
    io::reject_unknown_keys(s, {"c_m", "a0", "k_minus", "k_plus", "C_P", "C_Tr", "h", "lambda_max", "points"},
                            where);
    double C_P = io::get_number(s, "C_P", where, -1.0);
    double C_Tr = io::get_number(s, "C_Tr", where, -1.0);
    if (C_P < 0.0 || C_Tr < 0.0) {
      const ConstantsReport cr =
          estimate_constants(all_dirichlet_layout(Lattice::from_spacing(io::get_number(s, "h", where, 1.0 / 32))));
      out["constants"] = io::to_json(cr);
      if (C_P < 0.0) C_P = cr.C_P;
      if (C_Tr < 0.0) C_Tr = cr.C_Tr;
    }
    const double km = io::get_number(s, "k_minus", where, 1.0);
    const double kp = io::get_number(s, "k_plus", where, 1.0);
    const double lmax = io::get_number(s, "lambda_max", where, std::sqrt(km / kp));
    const int points = io::get_int(s, "points", where, 200);
    if (points < 2 || !(lmax > 0.0)) throw InvalidArgument("fit.speed_bound: need points >= 2, lambda_max > 0");
    const auto grid = linspace(lmax / points, lmax, static_cast<std::size_t>(points));
    const SpeedBound sb = speed_bound(io::get_number(s, "c_m", where), io::get_number(s, "a0", where), km, kp,
                                      C_P, C_Tr, grid);
    out["speed_bound"] = io::to_json(sb);
    run.write("theta.csv", io::theta_csv(sb));
  }
  run.write_json("fit.json", out);
  return ok ? kExitOk : kExitNegative;
}

std::vector<double> numbers(const Json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>()};
  return times_from_json(j, where);
}

int cmd_rellich(Run& run) {
  const Json& c = run.config;
  io::reject_unknown_keys(c, {"mode", "field", "domain", "u", "h", "rhos"}, "rellich");
  const std::string mode = c.contains("mode") ? c.at("mode").get<std::string>() : "regular";
  run.default_to("mode", mode);
  const MultiplierField m = io::field_from_json(require(c, "field", "rellich"));
  if (mode == "regular") {
    const PolygonDomain dom = domain_or_square(run);
    const ScalarFunction2D u = io::trig_from_json(require(c, "u", "rellich"));
    const std::vector<double> hs = numbers(require(c, "h", "rellich"), "rellich.h");
    std::vector<RellichReport> rows;
    Json reports = Json::array();
    for (double h : hs) {
      rows.push_back(rellich_residual(u, m, dom, h));
      reports.push_back(io::to_json(rows.back()));
    }
    Json orders = Json::array();
    for (std::size_t k = 1; k < rows.size(); ++k) {
      orders.push_back(io::number(std::log(std::abs(rows[k - 1].defect) / std::abs(rows[k].defect)) /
                                  std::log(rows[k - 1].h / rows[k].h)));
    }
    run.write("rellich.csv", io::rellich_csv(rows));
    run.write_json("rellich.json", Json{{"mode", mode}, {"reports", reports}, {"observed_orders", orders}});
    return kExitOk;
  }
  if (mode == "singular") {
    const std::vector<double> hs =
        c.contains("h") ? numbers(c.at("h"), "rellich.h") : std::vector<double>{1.0 / 32, 1.0 / 64, 1.0 / 128};
    const std::vector<double> rhos = c.contains("rhos") ? numbers(c.at("rhos"), "rellich.rhos")
                                                        : std::vector<double>(kShamirRhos.begin(), kShamirRhos.end());
    run.default_to("h", hs);
    run.default_to("rhos", rhos);
    const ShamirResult s = shamir_defect(m, hs, rhos);
    run.write("rellich.csv", io::rellich_csv(s.ladder));
    run.write_json("rellich.json", Json{{"mode", mode}, {"shamir", io::to_json(s)}});
    return s.converged ? kExitOk : kExitNegative;
  }
  throw InvalidArgument("rellich: unknown mode \"" + mode + "\"");
}

// Control time: "T" absolute or "T_factor" times T0.
ControlProblem control_problem(Run& run, const MultiplierField& m, const std::string& where) {
  const Json& c = run.config;
  const double h = io::get_number(c, "h", where, 1.0 / 32);
  const double dt = io::get_number(c, "dt", where, 0.0);
  const int samples = io::get_int(c, "samples_per_edge", where, 256);
  run.default_to("h", h);
  run.default_to("samples_per_edge", samples);
  if (c.contains("T") == c.contains("T_factor")) {
    throw InvalidArgument(where + ": give exactly one of \"T\" and \"T_factor\"");
  }
  double T = 0.0;
  if (c.contains("T")) {
    T = io::get_number(c, "T", where);
  } else {
    const ControlProblem probe(m, h, 1.0, dt, samples);
    T = io::get_number(c, "T_factor", where) * probe.T0();
    run.resolved["T"] = T;
  }
  ControlProblem P(m, h, T, dt, samples);
  run.default_to("dt", P.dt());
  return P;
}

Eigen::VectorXd interior_data(Run& run, const ControlProblem& P, const char* key, std::uint64_t offset) {
  const Json zero{{"kind", "zero"}};
  const Json j = run.config.contains(key) ? run.config.at(key) : zero;
  run.default_to(key, j);
  if (j.is_object() && j.contains("kind") && j.at("kind") == "random") {
    io::reject_unknown_keys(j, {"kind", "kmax"}, key);
    return low_frequency_data(P, run.seed + offset, io::get_int(j, "kmax", key, 4));
  }
  const std::vector<double> nodes = io::lattice_data_from_json(j, P.lattice(), run.base_dir);
  for (const auto& b : boundary_nodes(P.lattice())) {
    if (std::abs(nodes[b.node]) > 1e-12) throw InvalidArgument(std::string(key) + ": must vanish on the boundary");
  }
  return P.restrict(nodes);
}

int cmd_observe(Run& run) {
  const Json& c = run.config;
  io::reject_unknown_keys(c, {"field", "T", "T_factor", "h", "dt", "phi0", "phi1", "samples_per_edge"}, "observe");
  const MultiplierField m = io::field_from_json(require(c, "field", "observe"));
  const ControlProblem P = control_problem(run, m, "observe");
  const Eigen::VectorXd phi0 = interior_data(run, P, "phi0", 0);
  const Eigen::VectorXd phi1 = interior_data(run, P, "phi1", 1);
  const ObservabilityReport r = observability_quotient(P, phi0, phi1);
  run.write_json("observe.json", io::to_json(r));
  return r.verdict == "verified" ? kExitOk : kExitNegative;
}

int cmd_control(Run& run) {
  const Json& c = run.config;
  io::reject_unknown_keys(
      c, {"field", "T", "T_factor", "h", "dt", "u0", "u1", "tol", "max_iter", "samples_per_edge"}, "control");
  const MultiplierField m = io::field_from_json(require(c, "field", "control"));
  const ControlProblem P = control_problem(run, m, "control");
  const Eigen::VectorXd u0 = interior_data(run, P, "u0", 0);
  const Eigen::VectorXd u1 = interior_data(run, P, "u1", 1);
  const double tol = io::get_number(c, "tol", "control", 1e-6);
  const int max_iter = io::get_int(c, "max_iter", "control", 500);
  run.default_to("tol", tol);
  run.default_to("max_iter", max_iter);
  const HUMResult r = hum_solve(P, u0, u1, tol, max_iter);
  run.write("control.csv", io::control_csv(P, r.control));
  Json j = io::to_json(r);
  j["T"] = io::number(P.T());
  j["T0"] = io::number(P.T0());
  j["h"] = io::number(P.h());
  j["dt"] = io::number(P.dt());
  run.write_json("control.json", j);
  return r.converged ? kExitOk : kExitNegative;
}

void report_error(const char* kind, const std::string& message, int code) {
  std::cerr << Json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wavectl: multiplier-field stabilization and control toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "seed for randomized data");

  const std::map<std::string, std::function<int(Run&)>> commands{
      {"cone", cmd_cone},         {"partition", cmd_partition}, {"simulate", cmd_simulate},
      {"fit", cmd_fit},           {"rellich", cmd_rellich},     {"observe", cmd_observe},
      {"control", cmd_control}};
  const std::map<std::string, std::string> help{
      {"cone", "cone condition constants c(m), a0"},
      {"partition", "boundary partition, (R) and (S2) checks"},
      {"simulate", "damped wave simulation and energy trace"},
      {"fit", "decay fits, integral-inequality check, speed bound table"},
      {"rellich", "Rellich defect, regular or singular"},
      {"observe", "observability quotient of the adjoint problem"},
      {"control", "HUM boundary control"}};
  for (const auto& [name, text] : help) app.add_subcommand(name, text);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", e.what(), kExitUsage);
    return kExitUsage;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  Run run;
  run.seed = seed;
  run.out_dir = out_dir;
  int code = kExitOk;
  try {
    run.config = io::read_json_file(config_path);
    if (!run.config.is_object()) throw InvalidArgument(config_path + ": config must be a JSON object");
    run.resolved = run.config;
    run.base_dir = fs::absolute(config_path).parent_path();
    fs::create_directories(run.out_dir);
    code = commands.at(name)(run);
  } catch (const Inapplicable& e) {
    report_error("Inapplicable", e.what(), kExitNegative);
    code = kExitNegative;
  } catch (const NumericalFailure& e) {
    report_error("NumericalFailure", e.what(), kExitNumerical);
    return kExitNumerical;
  } catch (const InvalidArgument& e) {
    report_error("InvalidArgument", e.what(), kExitUsage);
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    report_error("InvalidArgument", e.what(), kExitUsage);
    return kExitUsage;
  } catch (const std::exception& e) {
    report_error("Error", e.what(), kExitNumerical);
    return kExitNumerical;
  }
  try {
    run.write_json("manifest.json", Json{{"tool", "wavectl"},
                                         {"version", WAVECTL_VERSION},
                                         {"command", name},
                                         {"seed", run.seed},
                                         {"config", run.resolved},
                                         {"outputs", run.outputs},
                                         {"exit_code", code}});
  } catch (const std::exception& e) {
    report_error("Error", e.what(), kExitNumerical);
    return kExitNumerical;
  }
  return code;
}
