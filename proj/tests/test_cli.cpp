#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>
#include <sys/wait.h>

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "wavectl_cli_tests";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code = -1;
  std::string err;
  fs::path out;
};

Result run(const std::string& cmd, const std::string& name, const std::string& config,
           const std::string& extra = "") {
  const fs::path dir = kRoot / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << config;
  const std::string line = std::string(WAVECTL_CLI) + " " + cmd + " --config " + (dir / "config.json").string() +
                           " --out " + (dir / "out").string() + " " + extra + " 2> " + (dir / "stderr").string();
  const int status = std::system(line.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(dir / "stderr");
  r.out = dir / "out";
  return r;
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

const std::string kCornerField = R"({"family":"affine","A1":[[1,0],[0,1]],"x0":[-1,-1]})";
const std::string kNearField = R"({"family":"affine","A1":[[1,0],[0,1]],"x0":[-0.1,-0.1]})";

}  // namespace

TEST(Cli, ConeIdentity) {
  const auto r = run("cone", "cone_id", R"({"field":{"family":"affine","A1":[[1,0],[0,1]],"x0":[0,0]}})");
  EXPECT_EQ(r.code, 0);
  const Json j = read_json(r.out / "cone.json");
  EXPECT_DOUBLE_EQ(j["report"]["c_m"].get<double>(), 1.0);
  const Json m = read_json(r.out / "manifest.json");
  EXPECT_EQ(m["command"], "cone");
  EXPECT_EQ(m["config"]["resolution"], 0.0625);
}

TEST(Cli, ConeRotated) {
  const auto r = run("cone", "cone_rot",
                     R"({"field":{"family":"rotated2d","theta1":0.5235987755982988,"theta2":1.0471975511965976}})");
  EXPECT_EQ(r.code, 0);
  EXPECT_NEAR(read_json(r.out / "cone.json")["report"]["c_m"].get<double>(), 0.57735, 1e-5);
}

TEST(Cli, MalformedJsonIsUsageError) {
  const auto r = run("cone", "cone_bad", R"({"field": )");
  EXPECT_EQ(r.code, 2);
  const Json e = Json::parse(r.err);
  EXPECT_EQ(e["exit_code"], 2);
  EXPECT_NE(e["message"].get<std::string>().find("parse error"), std::string::npos);
}

TEST(Cli, UnknownKeyIsUsageError) {
  EXPECT_EQ(run("cone", "cone_unknown", R"({"field":)" + kCornerField + R"(,"colour":1})").code, 2);
}

TEST(Cli, PartitionViolationListed) {
  const auto r = run("partition", "part_s2",
                     R"({"field":{"family":"rotated2d","theta1":0.7853981633974483,"theta2":0.7853981633974483,"x0":[0.25,0.25]}})");
  EXPECT_EQ(r.code, 1);
  const Json j = read_json(r.out / "partition.json");
  EXPECT_EQ(j["S2"]["violations"], 1);
  EXPECT_NE(slurp(r.out / "interfaces.csv").find("0.5,0,edge-interior"), std::string::npos);
}

TEST(Cli, PartitionSatisfied) {
  EXPECT_EQ(run("partition", "part_ok", R"({"field":)" + kCornerField + "}").code, 0);
}

TEST(Cli, PartitionClockwiseIsUsageError) {
  const auto r = run("partition", "part_cw",
                     R"({"field":)" + kCornerField + R"(,"domain":{"vertices":[[0,0],[0,1],[1,1],[1,0]]}})");
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, SimulateZeroDataThenFitLinear) {
  const auto z = run("simulate", "sim_zero", R"({"field":)" + kCornerField + R"(,"T":1,"h":0.0625})");
  EXPECT_EQ(z.code, 0);
  const std::string trace = slurp(z.out / "trace.csv");
  std::istringstream in(trace);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,E,dissipation_rate");
  while (std::getline(in, line)) EXPECT_EQ(line.substr(line.find(',')), ",0,0");

  const auto s = run("simulate", "sim_lin",
                     R"({"field":)" + kCornerField +
                         R"(,"feedback":{"kind":"linear","alpha":1},"u0":{"kind":"mode","kx":1,"ky":1},"T":10,"h":0.03125,"output_stride":4,"snapshot_times":[5]})");
  ASSERT_EQ(s.code, 0);
  EXPECT_TRUE(fs::exists(s.out / "snapshot_0.csv"));
  const std::string cfg = R"({"trace":")" + (s.out / "trace.csv").string() +
                          R"(","model":"exponential","window":[2,10],"komornik_alpha":0})";
  const auto f = run("fit", "fit_lin", cfg);
  EXPECT_EQ(f.code, 0);
  const Json j = read_json(f.out / "fit.json");
  EXPECT_GT(j["fit"]["rate_or_exponent"].get<double>(), 0.0);
  EXPECT_EQ(j["fit"]["model"], "exponential");
}

TEST(Cli, ObserveBelowThresholdInapplicable) {
  const auto r = run("observe", "obs_low", R"({"field":)" + kNearField + R"(,"T":1,"h":0.0625,"phi0":{"kind":"mode"}})");
  EXPECT_EQ(r.code, 1);
  const Json j = read_json(r.out / "observe.json");
  EXPECT_EQ(j["verdict"], "inapplicable");
  EXPECT_EQ(j["bound"], "inf");
}

TEST(Cli, ControlDeterministicWithSeed) {
  const std::string cfg = R"({"field":)" + kNearField + R"(,"T_factor":3,"h":0.0625,"u0":{"kind":"random","kmax":3}})";
  const auto a = run("control", "ctl_a", cfg, "--seed 5");
  const auto b = run("control", "ctl_b", cfg, "--seed 5");
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(slurp(a.out / "control.csv"), slurp(b.out / "control.csv"));
  EXPECT_EQ(slurp(a.out / "control.json"), slurp(b.out / "control.json"));
  EXPECT_EQ(slurp(a.out / "control.csv").substr(0, 20), "t,edge_index,s,value");
  EXPECT_LE(read_json(a.out / "control.json")["reduction_factor"].get<double>(), 0.02);
  const auto c = run("control", "ctl_c", cfg, "--seed 6");
  EXPECT_NE(slurp(a.out / "control.csv"), slurp(c.out / "control.csv"));
}

TEST(Cli, ControlBelowThreshold) {
  const auto r = run("control", "ctl_low", R"({"field":)" + kNearField + R"(,"T":1,"h":0.0625,"u0":{"kind":"mode"}})");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(Json::parse(r.err)["error"], "Inapplicable");
}

TEST(Cli, RellichSingular) {
  const auto r = run("rellich", "rel_sing",
                     R"({"mode":"singular","field":{"family":"affine","A1":[[1,0],[0,1]],"x0":[0,0]},"h":[0.0625,0.03125]})");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(slurp(r.out / "rellich.csv").substr(0, 33), "h,rho,lhs,volume,boundary,defect\n");
}

TEST(Cli, MissingSubcommandIsUsageError) {
  const std::string line = std::string(WAVECTL_CLI) + " --config x.json 2>/dev/null";
  const int status = std::system(line.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
