#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "finsler_cli/cli.hpp"

using nlohmann::json;

namespace {

std::string cfg(const char* name) { return std::string(FINSLER_CONFIG_DIR) + "/" + name; }

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "finsler");
  std::ostringstream out, err;
  const int code = finsler::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, finsler::cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, finsler::cli::kUsage);
  EXPECT_EQ(run({"check"}).code, finsler::cli::kUsage);
  EXPECT_EQ(run({"check", "zoll"}).code, finsler::cli::kUsage);
  EXPECT_EQ(run({"--format", "xml", "build", "--config", cfg("round.json")}).code, finsler::cli::kUsage);
  EXPECT_EQ(run({"build", "--config", R"({"family": "nope"})"}).code, finsler::cli::kUsage);
  EXPECT_EQ(run({"volume", "--field", "/nonexistent.json"}).code, finsler::cli::kUsage);
}

TEST(Cli, DiagnosticsAreJsonLines) {
  const Result r = run({"build", "--config", R"({"family": "nope"})"});
  std::istringstream lines(r.err);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const json j = json::parse(line);
    EXPECT_TRUE(j.contains("level"));
    EXPECT_TRUE(j.contains("event"));
    ++n;
  }
  EXPECT_GT(n, 0);
}

TEST(Cli, BuildEchoesConfig) {
  const Result r = run({"build", "--config", cfg("round_plus_df.json")});
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("config").at("family"), "plus_one_form");
  // The build output is itself a valid field argument.
  const std::string path = testing::TempDir() + "built_field.json";
  std::ofstream(path) << r.out;
  EXPECT_EQ(run({"check", "rev-plus-closed", "--field", path}).code, 0);
  std::remove(path.c_str());
}

TEST(Cli, ZollPassesAndIsDeterministic) {
  const Result a = run({"check", "zoll", "--field", cfg("busemann_poly.json")});
  const Result b = run({"check", "zoll", "--field", cfg("busemann_poly.json")});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const json j = json::parse(a.out);
  EXPECT_EQ(j.at("verdict"), "pass");
}

TEST(Cli, FailingCheckExitsOne) {
  EXPECT_EQ(run({"check", "chakerian", "--body", cfg("reuleaux.json"), "--gauge", cfg("ball.json")}).code,
            finsler::cli::kCheckFailed);
  EXPECT_EQ(run({"check", "chakerian", "--body", cfg("ellipsoid_moved.json"), "--gauge",
                 R"({"type": "ellipsoid", "semi_axes": [1.0, 0.8, 0.6]})"})
                .code,
            0);
  EXPECT_EQ(run({"check", "rev-plus-closed", "--field", cfg("randers_rotation.json")}).code,
            finsler::cli::kCheckFailed);
}

TEST(Cli, TolOverride) {
  // A loose tolerance turns the rotation form into a pass on linearity but
  // closedness still fails.
  EXPECT_EQ(run({"--tol", "1", "check", "rev-plus-closed", "--field", cfg("randers_rotation.json")}).code,
            finsler::cli::kCheckFailed);
  EXPECT_EQ(run({"--tol", "1e-30", "check", "zoll", "--field", cfg("busemann_poly.json")}).code,
            finsler::cli::kCheckFailed);
}

TEST(Cli, CsvReport) {
  const Result r = run({"--format", "csv", "check", "zoll", "--field", cfg("busemann_poly.json")});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("volume_identity"), std::string::npos);
  EXPECT_EQ(r.out.find('{'), std::string::npos);
}

TEST(Cli, GeodesicCsv) {
  const Result r =
      run({"geodesic", "--field", cfg("round.json"), "--x0", "1,0,0", "--v0", "0,1,0", "--T", "1", "--samples", "4"});
  ASSERT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("t,x,y,z", 0), 0u);
  int rows = 0;
  std::string last;
  while (std::getline(lines, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, 5);
  EXPECT_NEAR(std::stod(last.substr(last.find(',') + 1)), std::cos(1.0), 1e-8);
}

TEST(Cli, VolumeNeedsRegionOnCharts) {
  EXPECT_EQ(run({"volume", "--field", R"({"family": "euclidean"})"}).code, finsler::cli::kUsage);
  const Result r = run({"volume", "--field", R"({"family": "euclidean"})", "--region",
                        R"({"type": "box", "lo": [0, 0], "hi": [1, 2]})"});
  ASSERT_EQ(r.code, 0);
  // Holmes-Thompson area of the Euclidean plane is the Lebesgue area.
  EXPECT_NEAR(json::parse(r.out).at("values").at("volume").get<double>(), 2.0, 1e-9);
}

TEST(Cli, BodyOperations) {
  const Result s = run({"body", "symmetral", "--in", cfg("tetrahedron.json")});
  ASSERT_EQ(s.code, 0);
  EXPECT_EQ(json::parse(s.out).at("type"), "vertices");
  const Result b = run({"body", "blaschke", "--in", cfg("tetrahedron.json")});
  EXPECT_EQ(b.code, 0);
  const Result br = run({"--format", "csv", "--grid-level", "1", "body", "brightness", "--in", cfg("ball.json")});
  ASSERT_EQ(br.code, 0);
  EXPECT_EQ(br.out.rfind("ux,uy,uz,brightness", 0), 0u);
}

TEST(Cli, DensityRigidityTakesTwoFields) {
  EXPECT_EQ(run({"check", "density-rigidity", "--field", cfg("round.json")}).code, finsler::cli::kUsage);
  EXPECT_EQ(run({"check", "density-rigidity", "--field", cfg("round.json"), "--field", cfg("round_plus_df.json")})
                .code,
            0);
}
