#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "wavectl/error.hpp"
#include "wavectl/io.hpp"
#include "wavectl/numeric.hpp"

using namespace wavectl;
using io::Json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("wavectl_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST(Json, ParseErrorsAreInvalidArgument) {
  EXPECT_THROW(io::parse_json("{\"a\": "), InvalidArgument);
  EXPECT_EQ(io::parse_json("{\"a\": 1}")["a"], 1);
  try {
    io::parse_json("[1,", "cfg.json");
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("cfg.json"), std::string::npos);
  }
}

TEST(Json, UnknownKeysRejected) {
  const Json j = io::parse_json(R"({"family":"rotated2d","theta1":0.5,"theta2":0.6,"extra":1})");
  EXPECT_THROW(io::field_from_json(j), InvalidArgument);
  EXPECT_THROW(io::reject_unknown_keys(Json::array(), {"a"}, "x"), InvalidArgument);
}

TEST(Json, FieldFamilies) {
  const auto a = io::field_from_json(io::parse_json(R"({"family":"affine","A1":[[2,0],[0,1]],"x0":[0.5,0.5]})"));
  Vector x(2);
  x << 1, 1;
  EXPECT_TRUE(a.value(x).isApprox(Eigen::Vector2d(1.0, 0.5)));
  const auto r = io::field_from_json(io::parse_json(R"({"family":"rotated2d","theta1":0.7853981633974483,"theta2":0.7853981633974483})"));
  x << 1, 0;
  EXPECT_TRUE(r.value(x).isApprox(Eigen::Vector2d(1, 1)));
  const auto p = io::field_from_json(io::parse_json(
      R"({"family":"perturbed","d":1,"A":[[0,0],[0,0]],"perturbation":{"kind":"constant","value":[0.3,0.1]}})"));
  EXPECT_TRUE(p.gradient(x).isApprox(Matrix::Identity(2, 2)));
  EXPECT_NO_THROW(io::field_from_json(io::parse_json(
      R"({"family":"perturbed","d":1,"A":[[0,0],[0,0]],"perturbation":{"kind":"sine","amplitude":0.1,"wavenumber":2}})")));
  EXPECT_THROW(io::field_from_json(io::parse_json(
                   R"({"family":"perturbed","d":1,"A":[[0,0],[0,0]],"perturbation":{"kind":"sine","amplitude":2,"wavenumber":1}})")),
               PerturbationTooLarge);
  const auto c = io::field_from_json(io::parse_json(R"({"family":"constant","value":[1,0]})"));
  EXPECT_TRUE(c.value(x).isApprox(Eigen::Vector2d(1, 0)));
  EXPECT_TRUE(c.gradient(x).isZero());
  EXPECT_THROW(io::field_from_json(io::parse_json(R"({"family":"spiral"})")), InvalidArgument);
  EXPECT_THROW(io::field_from_json(io::parse_json(R"({"family":"affine","A1":[[1,0],[0,1]],"x0":[0]})")),
               InvalidArgument);
}

TEST(Json, DomainFeedbackTrig) {
  const auto d = io::domain_from_json(io::parse_json(R"({"vertices":[[0,0],[1,0],[1,1],[0,1]]})"));
  EXPECT_TRUE(d.is_unit_square());
  EXPECT_EQ(io::domain_to_json(d)["vertices"].size(), 4u);
  EXPECT_THROW(io::domain_from_json(io::parse_json(R"({"vertices":[[0,0],[0,1],[1,1],[1,0]]})")), InvalidArgument);
  EXPECT_DOUBLE_EQ(io::feedback_from_json(io::parse_json(R"({"kind":"linear","alpha":2})"))(3.0), 6.0);
  EXPECT_DOUBLE_EQ(io::feedback_from_json(io::parse_json(R"({"kind":"power","p":3})"))(0.5), 0.125);
  EXPECT_THROW(io::feedback_from_json(io::parse_json(R"({"kind":"power","alpha":3})")), InvalidArgument);
  const auto u = io::trig_from_json(io::parse_json(R"({"terms":[{"wx":3.141592653589793,"wy":3.141592653589793}]})"));
  EXPECT_NEAR(u.value(Point(0.5, 0.5)), 1.0, 1e-15);
  EXPECT_NEAR(u.laplacian(Point(0.5, 0.5)), -2 * kPi * kPi, 1e-12);
}

TEST(Json, NonFiniteNumbers) {
  EXPECT_EQ(io::number(INFINITY), "inf");
  EXPECT_EQ(io::number(-INFINITY), "-inf");
  EXPECT_EQ(io::number(NAN), "nan");
  EXPECT_EQ(io::number(1.5), 1.5);
}

TEST(Csv, TraceRoundTrip) {
  EnergyTrace tr;
  tr.rows = {{0.0, 1.0, 0.5}, {0.1, 0.9, 1.0 / 3.0}};
  const std::string text = io::trace_csv(tr);
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,E,dissipation_rate");
  const EnergyTrace back = io::trace_from_csv(text);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.rows[1].dissipation_rate, 1.0 / 3.0);
  EXPECT_THROW(io::trace_from_csv("t,E\n0,1\n"), InvalidArgument);
  EXPECT_THROW(io::trace_from_csv("t,E,dissipation_rate\n0,x,1\n"), InvalidArgument);
}

TEST(Csv, SnapshotRoundTripAndLatticeData) {
  const Lattice lat(4);
  const auto u = lat.sample([](const Point& x) { return std::sin(kPi * x.x()) * std::sin(kPi * x.y()); });
  const std::string text = io::snapshot_csv(lat.h(), 0.5, u);
  EXPECT_EQ(text.substr(0, text.find('\n')), "h=0.25 t=0.5");
  double h = 0, t = 0;
  EXPECT_EQ(io::snapshot_from_csv(text, &h, &t), u);
  EXPECT_EQ(h, 0.25);
  EXPECT_EQ(t, 0.5);

  const fs::path dir = scratch_dir("snap");
  io::write_atomic(dir / "u0.csv", text);
  EXPECT_FALSE(fs::exists(dir / "u0.csv.tmp"));
  const auto loaded = io::lattice_data_from_json(io::parse_json(R"({"kind":"file","path":"u0.csv"})"), lat, dir);
  EXPECT_EQ(loaded, u);
  const auto mode = io::lattice_data_from_json(io::parse_json(R"({"kind":"mode","kx":1,"ky":1})"), lat, dir);
  for (std::size_t k = 0; k < u.size(); ++k) EXPECT_NEAR(mode[k], u[k], 1e-15);
  EXPECT_THROW(io::lattice_data_from_json(io::parse_json(R"({"kind":"file","path":"u0.csv"})"), Lattice(8), dir),
               InvalidArgument);
  EXPECT_THROW(io::lattice_data_from_json(io::parse_json(R"({"kind":"mode","kx":0})"), lat, dir), InvalidArgument);
}

TEST(Csv, PartitionHeaders) {
  Vector x0(2);
  x0 << 0.25, 0.25;
  const auto f = make_rotated(kPi / 4, kPi / 4, x0);
  const auto p = partition(f, unit_square(), 64);
  const std::string seg = io::partition_csv(p);
  EXPECT_EQ(seg.substr(0, seg.find('\n')), "edge_index,t_start,t_end,label");
  EXPECT_NE(seg.find(",N\n"), std::string::npos);
  const std::string ifc = io::interfaces_csv(p);
  EXPECT_EQ(ifc.substr(0, ifc.find('\n')), "x,y,type,angle,m_dot_tau");
  EXPECT_NE(ifc.find("0.5,0,edge-interior"), std::string::npos);
}

TEST(Csv, RellichAndThetaHeaders) {
  RellichReport r;
  r.h = 0.5;
  r.rho = 0.1;
  const std::string s = io::rellich_csv({r});
  EXPECT_EQ(s, "h,rho,lhs,volume,boundary,defect\n0.5,0.1,0,0,0,0\n");
  const auto grid = linspace(0.5, 2.0, 4);
  const std::string t = io::theta_csv(speed_bound(1, 1, 1, 1, 0, 0, grid));
  EXPECT_EQ(t.substr(0, t.find('\n')), "lambda,theta");
}

TEST(Reports, JsonFields) {
  Vector x0(2);
  x0 << -1, -1;
  const auto f = make_affine(Matrix::Identity(2, 2), Matrix::Zero(2, 2), x0);
  const Json c = io::to_json(cone_check(f, Box::unit(2), 1.0 / 16));
  EXPECT_EQ(c["c_m"], 1.0);
  EXPECT_TRUE(c["satisfied"].get<bool>());
  DecayFit fit;
  fit.verdict = "consistent";
  const Json j = io::to_json(fit);
  for (const char* k : {"model", "window", "rate_or_exponent", "goodness", "verdict"}) EXPECT_TRUE(j.contains(k));
  ObservabilityReport o;
  o.bound = INFINITY;
  o.verdict = "inapplicable";
  EXPECT_EQ(io::to_json(o)["bound"], "inf");
}
