#include <gtest/gtest.h>

#include <cmath>

#include "finsler/check_report.hpp"

using namespace finsler;

TEST(Verdict, ThreeValuedClassification) {
  EXPECT_EQ(classify(1e-6, 1e-6), Verdict::Pass);
  EXPECT_EQ(classify(2e-6, 1e-6), Verdict::Inconclusive);
  EXPECT_EQ(classify(3e-6, 1e-6), Verdict::Inconclusive);
  EXPECT_EQ(classify(3.1e-6, 1e-6), Verdict::Fail);
  EXPECT_EQ(classify(std::nan(""), 1e-6), Verdict::Fail);
}

TEST(Verdict, Combination) {
  EXPECT_EQ(combine({Verdict::Pass, Verdict::Pass}), Verdict::Pass);
  EXPECT_EQ(combine({Verdict::Pass, Verdict::Inconclusive}), Verdict::Inconclusive);
  EXPECT_EQ(combine({Verdict::Inconclusive, Verdict::Fail}), Verdict::Fail);
  EXPECT_EQ(combine({}), Verdict::Inconclusive);
  EXPECT_EQ(to_string(Verdict::Inconclusive), "inconclusive");
}

TEST(CheckReport, JsonSchema) {
  CheckReport r;
  r.check = "demo";
  r.inputs = {{"a", 1}};
  r.add("x", 1e-8, 1e-6);
  r.add("y", 0.5, 1.0);
  r.values["nan"] = std::nan("");
  r.finalize();
  const auto j = r.to_json();
  EXPECT_EQ(j["check"], "demo");
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_EQ(j["inputs"], r.digest());
  EXPECT_TRUE(j["values"]["nan"].is_null());
  EXPECT_DOUBLE_EQ(j["residuals"]["x"].get<double>(), 1e-8);
  EXPECT_DOUBLE_EQ(j["tolerances"]["y"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(r.worst().first, 0.5);
}

TEST(CheckReport, DigestIsDeterministicAndSensitive) {
  CheckReport a, b;
  a.inputs = {{"k", 1.0}};
  b.inputs = {{"k", 1.0}};
  EXPECT_EQ(a.digest(), b.digest());
  b.inputs["k"] = 2.0;
  EXPECT_NE(a.digest(), b.digest());
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
}

TEST(CheckReport, CsvHasOneRowPerResidual) {
  CheckReport r;
  r.check = "demo";
  r.add("x", 1.0, 2.0);
  r.add("y", 5.0, 1.0);
  r.finalize();
  EXPECT_EQ(r.verdict, Verdict::Fail);
  const std::string csv = r.to_csv();
  EXPECT_NE(csv.find("x"), std::string::npos);
  EXPECT_NE(csv.find("y"), std::string::npos);
}
