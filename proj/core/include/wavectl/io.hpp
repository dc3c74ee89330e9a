#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "wavectl/control.hpp"
#include "wavectl/decay.hpp"
#include "wavectl/fields.hpp"
#include "wavectl/geometry.hpp"
#include "wavectl/rellich.hpp"
#include "wavectl/wavesim.hpp"

namespace wavectl::io {

using Json = nlohmann::ordered_json;

Json parse_json(const std::string& text, const std::string& origin = "<string>");
Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

// Throws InvalidArgument naming the first key of `obj` not in `allowed`.
void reject_unknown_keys(const Json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where);

double get_number(const Json& obj, const char* key, const std::string& where);
double get_number(const Json& obj, const char* key, const std::string& where, double fallback);
int get_int(const Json& obj, const char* key, const std::string& where, int fallback);
Vector get_vector(const Json& j, const std::string& where);
Matrix get_matrix(const Json& j, const std::string& where);

// Non-finite doubles become the strings "inf", "-inf", "nan".
Json number(double x);
Json to_json(const Vector& v);

// Field specs:
//   {"family":"affine","A1":[[..]],"A2":[[..]],"x0":[..]}
//   {"family":"rotated2d","theta1":..,"theta2":..,"x0":[..]}
//   {"family":"perturbed","d":..,"A":[[..]],"x0":[..],
//    "perturbation":{"kind":"sine","amplitude":..,"wavenumber":..} | {"kind":"constant","value":[..]},
//    "box":{"lo":[..],"hi":[..]},"resolution":..}
MultiplierField field_from_json(const Json& j);
Box box_from_json(const Json& j, const std::string& where);
PolygonDomain domain_from_json(const Json& j);
Json domain_to_json(const PolygonDomain& d);
FeedbackLaw feedback_from_json(const Json& j);
ScalarFunction2D trig_from_json(const Json& j);

// Initial data on lattice nodes: {"kind":"zero"}, {"kind":"mode","kx","ky","amplitude"},
// {"kind":"file","path"} (snapshot CSV).
std::vector<double> lattice_data_from_json(const Json& j, const Lattice& lat,
                                           const std::filesystem::path& base_dir);

Json to_json(const ConeReport& r);
Json to_json(const RReport& r);
Json to_json(const S2Report& r, const BoundaryPartition& p);
Json to_json(const DecayFit& f);
Json to_json(const KomornikResult& k);
Json to_json(const RellichReport& r);
Json to_json(const ShamirResult& s);
Json to_json(const ObservabilityReport& r);
Json to_json(const HUMResult& r);
Json to_json(const ConstantsReport& r);
Json to_json(const SpeedBound& s);

std::string partition_csv(const BoundaryPartition& p);
std::string interfaces_csv(const BoundaryPartition& p);
std::string trace_csv(const EnergyTrace& trace);
EnergyTrace trace_from_csv(const std::string& text);
std::string rellich_csv(const std::vector<RellichReport>& rows);
std::string theta_csv(const SpeedBound& s);
std::string control_csv(const ControlProblem& P, const std::vector<Eigen::VectorXd>& control);
std::string snapshot_csv(double h, double t, const std::vector<double>& u);
// Returns the node values; h and t are read from the header.
std::vector<double> snapshot_from_csv(const std::string& text, double* h = nullptr,
                                      double* t = nullptr);

// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace wavectl::io
