#include "wavectl/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wavectl/error.hpp"
#include "wavectl/numeric.hpp"

namespace wavectl::io {

namespace fs = std::filesystem;

Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(origin + ": JSON parse error: " + e.what());
  }
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const fs::path& path) { return parse_json(read_text_file(path), path.string()); }

void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!obj.is_object()) throw InvalidArgument(where + ": expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw InvalidArgument(where + ": unknown key \"" + it.key() + "\"");
  }
}

double get_number(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw InvalidArgument(where + ": missing key \"" + key + "\"");
  const Json& v = obj.at(key);
  if (!v.is_number()) throw InvalidArgument(where + ": \"" + key + "\" must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InvalidArgument(where + ": \"" + key + "\" must be finite");
  return x;
}

double get_number(const Json& obj, const char* key, const std::string& where, double fallback) {
  return obj.contains(key) ? get_number(obj, key, where) : fallback;
}

int get_int(const Json& obj, const char* key, const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) throw InvalidArgument(where + ": \"" + key + "\" must be an integer");
  return v.get<int>();
}

Vector get_vector(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InvalidArgument(where + ": expected a non-empty array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidArgument(where + ": entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Matrix get_matrix(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InvalidArgument(where + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Vector first = get_vector(j[0], where);
  Matrix m(rows, first.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = get_vector(j[static_cast<std::size_t>(r)], where);
    if (row.size() != first.size()) throw InvalidArgument(where + ": ragged matrix");
    m.row(r) = row.transpose();
  }
  return m;
}

Json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Json to_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

Box box_from_json(const Json& j, const std::string& where) {
  reject_unknown_keys(j, {"lo", "hi"}, where);
  if (!j.contains("lo") || !j.contains("hi")) throw InvalidArgument(where + ": needs lo and hi");
  Box b{get_vector(j.at("lo"), where + ".lo"), get_vector(j.at("hi"), where + ".hi")};
  if (b.lo.size() != b.hi.size()) throw InvalidArgument(where + ": lo/hi dimension mismatch");
  for (Eigen::Index i = 0; i < b.lo.size(); ++i) {
    if (!(b.lo[i] < b.hi[i])) throw InvalidArgument(where + ": lo must be below hi");
  }
  return b;
}

namespace {

std::string family_of(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("field: expected a JSON object");
  if (!j.contains("family") || !j.at("family").is_string()) {
    throw InvalidArgument("field: missing string key \"family\"");
  }
  return j.at("family").get<std::string>();
}

Vector origin_or_zero(const Json& j, int dim, const std::string& where) {
  if (!j.contains("x0")) return Vector::Zero(dim);
  Vector x0 = get_vector(j.at("x0"), where + ".x0");
  if (x0.size() != dim) throw InvalidArgument(where + ": x0 has the wrong dimension");
  return x0;
}

Perturbation perturbation_from_json(const Json& j, int dim) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw InvalidArgument("field.perturbation: missing string key \"kind\"");
  }
  const std::string kind = j.at("kind").get<std::string>();
  Perturbation F;
  F.spec = j.dump();
  if (kind == "sine") {
    reject_unknown_keys(j, {"kind", "amplitude", "wavenumber"}, "field.perturbation");
    const double a = get_number(j, "amplitude", "field.perturbation");
    const double k = get_number(j, "wavenumber", "field.perturbation");
    F.value = [a, k, dim](const Vector& x) {
      Vector v(dim);
      for (int i = 0; i < dim; ++i) v[i] = a * std::sin(k * x[(i + 1) % dim]);
      return v;
    };
    F.jacobian = [a, k, dim](const Vector& x) {
      Matrix J = Matrix::Zero(dim, dim);
      for (int i = 0; i < dim; ++i) J(i, (i + 1) % dim) += a * k * std::cos(k * x[(i + 1) % dim]);
      return J;
    };
  } else if (kind == "constant") {
    reject_unknown_keys(j, {"kind", "value"}, "field.perturbation");
    if (!j.contains("value")) throw InvalidArgument("field.perturbation: missing key \"value\"");
    const Vector c = get_vector(j.at("value"), "field.perturbation.value");
    if (c.size() != dim) throw InvalidArgument("field.perturbation: value has the wrong dimension");
    F.value = [c](const Vector&) { return c; };
    F.jacobian = [dim](const Vector&) { return Matrix::Zero(dim, dim); };
  } else {
    throw InvalidArgument("field.perturbation: unknown kind \"" + kind + "\"");
  }
  return F;
}

}  // namespace

MultiplierField field_from_json(const Json& j) {
  const std::string family = family_of(j);
  if (family == "affine") {
    reject_unknown_keys(j, {"family", "A1", "A2", "x0"}, "field");
    if (!j.contains("A1")) throw InvalidArgument("field: missing key \"A1\"");
    const Matrix A1 = get_matrix(j.at("A1"), "field.A1");
    const int n = static_cast<int>(A1.rows());
    const Matrix A2 = j.contains("A2") ? get_matrix(j.at("A2"), "field.A2") : Matrix::Zero(n, n);
    return make_affine(A1, A2, origin_or_zero(j, n, "field"));
  }
  if (family == "rotated2d") {
    reject_unknown_keys(j, {"family", "theta1", "theta2", "x0"}, "field");
    return make_rotated(get_number(j, "theta1", "field"), get_number(j, "theta2", "field"),
                        origin_or_zero(j, 2, "field"));
  }
  if (family == "perturbed") {
    reject_unknown_keys(j, {"family", "d", "A", "x0", "perturbation", "box", "resolution"}, "field");
    if (!j.contains("A")) throw InvalidArgument("field: missing key \"A\"");
    if (!j.contains("perturbation")) throw InvalidArgument("field: missing key \"perturbation\"");
    const Matrix A = get_matrix(j.at("A"), "field.A");
    const int n = static_cast<int>(A.rows());
    const Box box = j.contains("box") ? box_from_json(j.at("box"), "field.box") : Box::unit(n);
    return make_perturbed(get_number(j, "d", "field"), A, origin_or_zero(j, n, "field"),
                          perturbation_from_json(j.at("perturbation"), n), box,
                          get_number(j, "resolution", "field", 1.0 / 16));
  }
  if (family == "constant") {
    reject_unknown_keys(j, {"family", "value", "box"}, "field");
    if (!j.contains("value")) throw InvalidArgument("field: missing key \"value\"");
    const Vector c = get_vector(j.at("value"), "field.value");
    const int n = static_cast<int>(c.size());
    const Box box = j.contains("box") ? box_from_json(j.at("box"), "field.box") : Box::unit(n);
    return make_custom(
        n, [c](const Vector&) { return c; }, [n](const Vector&) { return Matrix(Matrix::Zero(n, n)); }, box);
  }
  throw InvalidArgument("field: unknown family \"" + family + "\"");
}

PolygonDomain domain_from_json(const Json& j) {
  reject_unknown_keys(j, {"vertices"}, "domain");
  if (!j.contains("vertices") || !j.at("vertices").is_array()) {
    throw InvalidArgument("domain: missing array \"vertices\"");
  }
  std::vector<Point> v;
  for (const auto& p : j.at("vertices")) {
    const Vector x = get_vector(p, "domain.vertices");
    if (x.size() != 2) throw InvalidArgument("domain: vertices must be [x, y] pairs");
    v.emplace_back(x[0], x[1]);
  }
  return PolygonDomain(std::move(v));
}

Json domain_to_json(const PolygonDomain& d) {
  Json a = Json::array();
  for (const auto& p : d.vertices()) a.push_back({p.x(), p.y()});
  return Json{{"vertices", a}};
}

FeedbackLaw feedback_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw InvalidArgument("feedback: missing string key \"kind\"");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "none") {
    reject_unknown_keys(j, {"kind"}, "feedback");
    return make_zero_feedback();
  }
  if (kind == "linear") {
    reject_unknown_keys(j, {"kind", "alpha"}, "feedback");
    return make_linear_feedback(get_number(j, "alpha", "feedback", 1.0));
  }
  if (kind == "power") {
    reject_unknown_keys(j, {"kind", "p"}, "feedback");
    return make_power_feedback(get_number(j, "p", "feedback"));
  }
  throw InvalidArgument("feedback: unknown kind \"" + kind + "\"");
}

ScalarFunction2D trig_from_json(const Json& j) {
  reject_unknown_keys(j, {"terms"}, "u");
  if (!j.contains("terms") || !j.at("terms").is_array() || j.at("terms").empty()) {
    throw InvalidArgument("u: \"terms\" must be a non-empty array");
  }
  std::vector<TrigTerm> terms;
  for (const auto& t : j.at("terms")) {
    reject_unknown_keys(t, {"amplitude", "wx", "wy", "phase_x", "phase_y"}, "u.terms");
    TrigTerm term;
    term.amplitude = get_number(t, "amplitude", "u.terms", 1.0);
    term.wx = get_number(t, "wx", "u.terms");
    term.wy = get_number(t, "wy", "u.terms");
    term.phase_x = get_number(t, "phase_x", "u.terms", 0.0);
    term.phase_y = get_number(t, "phase_y", "u.terms", 0.0);
    terms.push_back(term);
  }
  return trig_polynomial(std::move(terms));
}

std::vector<double> lattice_data_from_json(const Json& j, const Lattice& lat,
                                           const fs::path& base_dir) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw InvalidArgument("initial data: missing string key \"kind\"");
  }
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "zero") {
    reject_unknown_keys(j, {"kind"}, "initial data");
    return std::vector<double>(lat.nodes(), 0.0);
  }
  if (kind == "mode") {
    reject_unknown_keys(j, {"kind", "kx", "ky", "amplitude"}, "initial data");
    const int kx = get_int(j, "kx", "initial data", 1);
    const int ky = get_int(j, "ky", "initial data", 1);
    if (kx < 1 || ky < 1) throw InvalidArgument("initial data: kx, ky must be >= 1");
    const double a = get_number(j, "amplitude", "initial data", 1.0);
    return lat.sample([=](const Point& x) {
      return a * std::sin(kx * kPi * x.x()) * std::sin(ky * kPi * x.y());
    });
  }
  if (kind == "file") {
    reject_unknown_keys(j, {"kind", "path"}, "initial data");
    if (!j.contains("path") || !j.at("path").is_string()) {
      throw InvalidArgument("initial data: missing string key \"path\"");
    }
    fs::path p = j.at("path").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    double h = 0.0;
    std::vector<double> u = snapshot_from_csv(read_text_file(p), &h);
    if (static_cast<int>(u.size()) != lat.nodes() || std::abs(h - lat.h()) > 1e-12) {
      throw InvalidArgument("initial data: " + p.string() + " does not match the lattice");
    }
    return u;
  }
  throw InvalidArgument("initial data: unknown kind \"" + kind + "\"");
}

Json to_json(const ConeReport& r) {
  return Json{{"essinf_div", number(r.essinf_div)},
              {"esssup_div_minus_2lambda", number(r.esssup_div_minus_2lambda)},
              {"c_m", number(r.c_m)},
              {"a0", number(r.a0)},
              {"satisfied", r.satisfied},
              {"witness_inf_div", to_json(r.witness_inf_div)},
              {"witness_sup_div_minus_2lambda", to_json(r.witness_sup_div_minus_2lambda)},
              {"resolution", number(r.resolution)},
              {"samples", r.samples},
              {"approximate", r.approximate}};
}

Json to_json(const RReport& r) {
  return Json{{"satisfied", r.satisfied()},
              {"dirichlet_measure_positive", r.dirichlet_measure_positive},
              {"interface_finite", r.interface_finite},
              {"interface_m_dot_nu_zero", r.interface_m_dot_nu_zero}};
}

Json to_json(const S2Report& r, const BoundaryPartition& p) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    const auto& ip = p.interfaces[static_cast<std::size_t>(e.index)];
    entries.push_back(Json{{"index", e.index},
                           {"x", {ip.x.x(), ip.x.y()}},
                           {"type", to_string(ip.type)},
                           {"m_dot_tau", number(ip.m_dot_tau)},
                           {"satisfied", e.satisfied},
                           {"angle_in_range", e.angle_in_range},
                           {"reason", e.reason}});
  }
  return Json{{"satisfied", r.satisfied}, {"violations", r.violations()}, {"entries", entries}};
}

Json to_json(const DecayFit& f) {
  Json j{{"model", to_string(f.model)},
         {"window", {number(f.t1), number(f.t2)}},
         {"rate_or_exponent", number(f.rate_or_exponent)},
         {"intercept", number(f.intercept)},
         {"goodness", number(f.goodness)},
         {"samples", f.samples},
         {"truncated", f.truncated},
         {"verdict", f.verdict}};
  if (f.model == DecayModel::power && f.theoretical_exponent != 0.0) {
    j["theoretical_exponent"] = number(f.theoretical_exponent);
  }
  return j;
}

Json to_json(const KomornikResult& k) {
  return Json{{"alpha", number(k.alpha)},
              {"C_best", number(k.C_best)},
              {"t_at_sup", number(k.t_at_sup)},
              {"T", number(k.T)},
              {"conclusion_holds", k.conclusion_holds},
              {"worst_ratio", number(k.worst_ratio)},
              {"tail_estimate", number(k.tail_estimate)},
              {"tail_model", k.tail_model}};
}

Json to_json(const RellichReport& r) {
  Json j{{"h", number(r.h)},
         {"lhs", number(r.lhs)},
         {"volume", number(r.volume_term)},
         {"boundary", number(r.boundary_term)},
         {"defect", number(r.defect)}};
  if (r.rho) j["rho"] = number(*r.rho);
  if (r.predicted_defect) j["predicted_defect"] = number(*r.predicted_defect);
  return j;
}

Json to_json(const ShamirResult& s) {
  Json rhos = Json::array();
  for (double x : s.rho_extrapolants) rhos.push_back(number(x));
  return Json{{"extrapolated", number(s.extrapolated)},
              {"predicted", number(s.predicted)},
              {"relative_gap", number(s.relative_gap)},
              {"m_dot_tau", number(s.m_dot_tau)},
              {"converged", s.converged},
              {"rho_extrapolants", rhos}};
}

Json to_json(const ObservabilityReport& r) {
  return Json{{"E0", number(r.E0)},
              {"flux", number(r.flux)},
              {"quotient", number(r.quotient)},
              {"bound", number(r.bound)},
              {"T", number(r.T)},
              {"T0", number(r.T0)},
              {"c_m", number(r.c_m)},
              {"m_sup", number(r.m_sup)},
              {"sup_m_dot_nu", number(r.sup_m_dot_nu)},
              {"conservation_drift", number(r.conservation_drift)},
              {"h", number(r.h)},
              {"stencil", r.stencil},
              {"data", "low-frequency"},
              {"verdict", r.verdict}};
}

namespace {

Json norms_json(const FinalNorms& n) {
  return Json{{"l2_u", number(n.l2_u)}, {"hm1_ut", number(n.hm1_ut)}, {"combined", number(n.combined())}};
}

}  // namespace

Json to_json(const HUMResult& r) {
  Json hist = Json::array();
  for (double x : r.residual_history) hist.push_back(number(x));
  return Json{{"cg_iterations", r.cg_iterations},
              {"cg_residual", number(r.cg_residual)},
              {"converged", r.converged},
              {"initial", norms_json(r.initial)},
              {"final", norms_json(r.final_state)},
              {"reduction_factor", number(r.reduction_factor)},
              {"time_levels", r.times.size()},
              {"control_nodes", r.control.empty() ? 0 : r.control.front().size()},
              {"data", "low-frequency"},
              {"residual_history", hist}};
}

Json to_json(const ConstantsReport& r) {
  return Json{{"C_P", number(r.C_P)},
              {"C_Tr", number(r.C_Tr)},
              {"h", number(r.h)},
              {"poincare_iterations", r.poincare_iterations},
              {"trace_iterations", r.trace_iterations},
              {"poincare_residual", number(r.poincare_residual)},
              {"trace_residual", number(r.trace_residual)}};
}

Json to_json(const SpeedBound& s) {
  return Json{{"lambda_grid_star", number(s.lambda_grid_star)},
              {"lambda_star", number(s.lambda_star)},
              {"theta_star", number(s.theta_star)},
              {"bracket_lower", number(s.bracket_lower)},
              {"bracket_upper", number(s.bracket_upper)},
              {"in_bracket", s.in_bracket},
              {"corrected_lower", number(s.corrected_lower)},
              {"in_corrected_bracket", s.in_corrected_bracket}};
}

namespace {

std::string f(double x) { return format_double(x); }

double parse_double(std::string_view s, const char* what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t')) s.remove_suffix(1);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidArgument(std::string(what) + ": cannot parse number \"" + std::string(s) + "\"");
  }
  return x;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == sep) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string_view> lines(const std::string& text) {
  std::vector<std::string_view> out;
  for (auto l : split(text, '\n')) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    if (!l.empty()) out.push_back(l);
  }
  return out;
}

}  // namespace

std::string partition_csv(const BoundaryPartition& p) {
  std::string s = "edge_index,t_start,t_end,label\n";
  for (const auto& seg : p.segments) {
    s += std::to_string(seg.edge) + "," + f(seg.t_start) + "," + f(seg.t_end) + "," +
         to_string(seg.label) + "\n";
  }
  return s;
}

std::string interfaces_csv(const BoundaryPartition& p) {
  std::string s = "x,y,type,angle,m_dot_tau\n";
  for (const auto& ip : p.interfaces) {
    s += f(ip.x.x()) + "," + f(ip.x.y()) + "," + to_string(ip.type) + "," + f(ip.angle) + "," +
         f(ip.m_dot_tau) + "\n";
  }
  return s;
}

std::string trace_csv(const EnergyTrace& trace) {
  std::string s = "t,E,dissipation_rate\n";
  for (const auto& r : trace.rows) s += f(r.t) + "," + f(r.E) + "," + f(r.dissipation_rate) + "\n";
  return s;
}

EnergyTrace trace_from_csv(const std::string& text) {
  const auto ls = lines(text);
  if (ls.empty() || ls.front() != "t,E,dissipation_rate") {
    throw InvalidArgument("trace CSV: expected header t,E,dissipation_rate");
  }
  EnergyTrace tr;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    const auto cols = split(ls[i], ',');
    if (cols.size() != 3) throw InvalidArgument("trace CSV: line " + std::to_string(i + 1) + " needs 3 columns");
    tr.rows.push_back(TraceRow{parse_double(cols[0], "trace CSV"), parse_double(cols[1], "trace CSV"),
                               parse_double(cols[2], "trace CSV")});
  }
  return tr;
}

std::string rellich_csv(const std::vector<RellichReport>& rows) {
  std::string s = "h,rho,lhs,volume,boundary,defect\n";
  for (const auto& r : rows) {
    s += f(r.h) + "," + (r.rho ? f(*r.rho) : std::string()) + "," + f(r.lhs) + "," + f(r.volume_term) +
         "," + f(r.boundary_term) + "," + f(r.defect) + "\n";
  }
  return s;
}

std::string theta_csv(const SpeedBound& sb) {
  std::string s = "lambda,theta\n";
  for (std::size_t i = 0; i < sb.lambda.size(); ++i) s += f(sb.lambda[i]) + "," + f(sb.theta[i]) + "\n";
  return s;
}

std::string control_csv(const ControlProblem& P, const std::vector<Eigen::VectorXd>& control) {
  std::string s = "t,edge_index,s,value\n";
  const auto& nodes = P.controls();
  for (std::size_t n = 0; n < control.size(); ++n) {
    const std::string t = f(static_cast<double>(n) * P.dt());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      s += t + "," + std::to_string(nodes[k].edge) + "," + f(nodes[k].s) + "," +
           f(control[n][static_cast<Eigen::Index>(k)]) + "\n";
    }
  }
  return s;
}

std::string snapshot_csv(double h, double t, const std::vector<double>& u) {
  std::string s = "h=" + f(h) + " t=" + f(t) + "\n";
  for (double x : u) s += f(x) + "\n";
  return s;
}

std::vector<double> snapshot_from_csv(const std::string& text, double* h, double* t) {
  const auto ls = lines(text);
  if (ls.empty()) throw InvalidArgument("snapshot CSV: empty");
  const auto head = split(ls.front(), ' ');
  if (head.size() != 2 || head[0].substr(0, 2) != "h=" || head[1].substr(0, 2) != "t=") {
    throw InvalidArgument("snapshot CSV: expected header \"h=<h> t=<t>\"");
  }
  if (h) *h = parse_double(head[0].substr(2), "snapshot CSV");
  if (t) *t = parse_double(head[1].substr(2), "snapshot CSV");
  std::vector<double> u;
  for (std::size_t i = 1; i < ls.size(); ++i) u.push_back(parse_double(ls[i], "snapshot CSV"));
  return u;
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw InvalidArgument("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace wavectl::io
