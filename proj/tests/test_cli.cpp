#include "meanratio/cli.hpp"
#include "meanratio/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace meanratio;
namespace fs = std::filesystem;
using io::json;

namespace {

const fs::path kScenarios = SCENARIO_DIR;

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scenario(const std::string& name) { return (kScenarios / (name + ".json")).string(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("meanratio_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_F(Cli, GenWritesValidGroupoids) {
  auto pair = run({"gen", "pair", "--n", "3", "--out", file("pair.json")});
  ASSERT_EQ(pair.code, cli::kSuccess) << pair.err;
  EXPECT_EQ(io::read_json_file(file("pair.json"))["arrows"].size(), 9u);

  auto bundle = run({"gen", "bundle", "--groups", "z2,z3"});
  ASSERT_EQ(bundle.code, cli::kSuccess) << bundle.err;
  EXPECT_EQ(json::parse(bundle.out)["arrows"].size(), 5u);

  auto action = run({"gen", "action", "--group", "z3", "--points", "3"});
  ASSERT_EQ(action.code, cli::kSuccess) << action.err;
  EXPECT_EQ(json::parse(action.out)["arrows"].size(), 9u);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({"gen", "pair", "--n", "0"}).code, cli::kUsage);
  EXPECT_EQ(run({"gen", "bundle", "--groups", "q7"}).code, cli::kUsage);
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"avg"}).code, cli::kUsage);
  EXPECT_EQ(run({"cohomology", scenario("eta_small"), "--mode", "sideways"}).code, cli::kUsage);
  EXPECT_EQ(run({"check", file("absent.json")}).code, cli::kValidationFailure);
  EXPECT_EQ(run({"--help"}).code, cli::kSuccess);
}

TEST_F(Cli, CheckAcceptsWellFormedScenario) {
  auto r = run({"check", scenario("eta_small")});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  auto j = json::parse(r.out);
  EXPECT_TRUE(j["ok"].get<bool>());
  EXPECT_TRUE(j["violations"].empty());
}

TEST_F(Cli, CheckReportsBrokenComposition) {
  auto r = run({"check", scenario("broken_compose")});
  EXPECT_EQ(r.code, cli::kValidationFailure);
  auto j = json::parse(r.out);
  EXPECT_FALSE(j["ok"].get<bool>());
  ASSERT_FALSE(j["violations"].empty());
  for (const auto& v : j["violations"]) {
    EXPECT_TRUE(v.contains("rule"));
    EXPECT_TRUE(v.contains("witness"));
  }
}

TEST_F(Cli, CheckReportsStarvedOrbit) {
  auto r = run({"check", scenario("starved_cutoff")});
  EXPECT_EQ(r.code, cli::kValidationFailure);
  auto j = json::parse(r.out);
  ASSERT_EQ(j["violations"].size(), 1u);
  EXPECT_EQ(j["violations"][0]["rule"], "cutoff-starved-orbit");
  EXPECT_NE(j["violations"][0]["detail"].get<std::string>().find("cut-off vanishes on the orbit {1}"),
            std::string::npos);
}

TEST_F(Cli, ParseErrorIsAValidationFailureWithPosition) {
  std::ofstream(file("bad.json")) << "{\n\"groupoid\": }\n";
  auto r = run({"check", file("bad.json")});
  EXPECT_EQ(r.code, cli::kValidationFailure);
  EXPECT_NE((r.out + r.err).find("bad.json:2:"), std::string::npos) << r.out << r.err;
}

TEST_F(Cli, AvgConvergesOnSmallDefect) {
  auto r = run({"avg", scenario("eta_small"), "--trace", file("t.csv"), "--limit", file("limit.json")});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["summary"]["reason"], "converged");
  EXPECT_TRUE(j["certificates_pass"].get<bool>());
  EXPECT_NEAR(j["summary"]["r0"].get<double>(), 0.0816, 1e-15);
  EXPECT_LE(j["summary"]["final_r"].get<double>(), 1e-10);
  EXPECT_EQ(slurp(file("t.csv")).substr(0, 22), "i,b,r,step,quad_slack\n");

  // the limit is itself a scenario rep, and a fixed point
  auto sc = io::read_json_file(scenario("eta_small"));
  sc["rep"] = {{"file", file("limit.json")}};
  io::write_json_file(file("again.json"), sc);
  auto again = run({"avg", file("again.json"), "--trace", file("t2.csv")});
  ASSERT_EQ(again.code, cli::kSuccess) << again.err;
  EXPECT_EQ(json::parse(again.out)["summary"]["iterations"], 0);
}

TEST_F(Cli, AvgOnExactRepWritesEmptyTrace) {
  auto r = run({"avg", scenario("exact_pair"), "--trace", file("t.csv"), "--report", file("r.json")});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  EXPECT_EQ(slurp(file("t.csv")), "i,b,r,step,quad_slack\n");
  auto j = io::read_json_file(file("r.json"));
  EXPECT_EQ(j["summary"]["iterations"], 0);
  EXPECT_EQ(j["recovery"]["distance_to_base"], 0.0);
}

TEST_F(Cli, AvgRefusesLargeDefectUnlessForced) {
  auto r = run({"avg", scenario("eta_large"), "--trace", file("t.csv")});
  EXPECT_EQ(r.code, cli::kGateRefusal);
  auto j = json::parse(r.out);
  EXPECT_TRUE(j["refused"].get<bool>());
  EXPECT_FALSE(fs::exists(file("t.csv")));

  auto forced = run({"avg", scenario("eta_large"), "--force"});
  auto f = json::parse(forced.out);
  EXPECT_FALSE(f["gate"]["is_near"].get<bool>());
  EXPECT_FALSE(f["certified"].get<bool>());
  const bool ok = f["summary"]["reason"] == "converged" && f["certificates_pass"].get<bool>();
  EXPECT_EQ(forced.code, ok ? cli::kSuccess : cli::kCertificateViolation);
}

TEST_F(Cli, AvgHonoursIterationCap) {
  auto r = run({"avg", scenario("eta_small"), "--max-iter", "1", "--tol", "1e-14"});
  EXPECT_EQ(r.code, cli::kCertificateViolation);
  EXPECT_EQ(json::parse(r.out)["summary"]["reason"], "max_iter");
}

TEST_F(Cli, AvgTraceIsByteIdenticalAcrossRuns) {
  for (const char* name : {"eta_small", "perturbed_bundle"}) {
    ASSERT_EQ(run({"avg", scenario(name), "--trace", file("a.csv"), "--report", file("a.json")}).code, 0);
    ASSERT_EQ(run({"avg", scenario(name), "--trace", file("b.csv"), "--report", file("b.json")}).code, 0);
    EXPECT_EQ(slurp(file("a.csv")), slurp(file("b.csv"))) << name;
    EXPECT_EQ(slurp(file("a.json")), slurp(file("b.json"))) << name;
  }
}

TEST_F(Cli, AvgRecoversPerturbedBundleRep) {
  auto r = run({"avg", scenario("perturbed_bundle")});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  auto j = json::parse(r.out);
  const auto& rec = j["recovery"];
  EXPECT_LE(rec["distance_to_start"].get<double>(), rec["bound"].get<double>());
  EXPECT_LE(rec["distance_to_base"].get<double>(), rec["bound"].get<double>());
}

TEST_F(Cli, CohomologyModes) {
  auto defect = run({"cohomology", scenario("eta_small"), "--mode", "defect-consistency"});
  ASSERT_EQ(defect.code, cli::kSuccess) << defect.err;
  EXPECT_LE(json::parse(defect.out)["residual"].get<double>(), 1e-12);

  for (const char* mode : {"contract2-verify", "contract1-verify"}) {
    for (const char* name : {"eta_small", "exact_pair", "perturbed_bundle"}) {
      auto r = run({"cohomology", scenario(name), "--mode", mode, "--seed", "9"});
      EXPECT_EQ(r.code, cli::kSuccess) << mode << " " << name << r.err;
      auto j = json::parse(r.out);
      EXPECT_TRUE(j["pass"].get<bool>());
      EXPECT_LE(j["delta_delta"].get<double>(), 1e-12);
    }
  }
  auto exact = json::parse(run({"cohomology", scenario("exact_pair"), "--mode", "contract2-verify"}).out);
  EXPECT_EQ(exact["coefficients"], "conjugation");
}

TEST_F(Cli, MetricOnTrivialRepIsIdempotent) {
  auto r = run({"metric", scenario("exact_pair"), "--out", file("g.json")});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  auto j = json::parse(r.out);
  EXPECT_TRUE(j["idempotence_pass"].get<bool>());
  EXPECT_TRUE(j["isometry_pass"].get<bool>());
  EXPECT_EQ(j["tau"], 0.0);
  auto grams = io::read_json_file(file("g.json"));
  EXPECT_EQ(grams["kind"], "gram");
  EXPECT_EQ(grams["matrices"][0], json::parse("[1.0,0.0,0.0,1.0]"));
}

TEST_F(Cli, MetricOnSubset) {
  auto r = run({"metric", scenario("perturbed_bundle"), "--subset", "0"});
  ASSERT_TRUE(r.code == cli::kSuccess || r.code == cli::kCertificateViolation) << r.err;
  auto j = json::parse(r.out);
  EXPECT_EQ(j["subset"], json::parse("[0]"));
  for (const auto& e : j["min_eigenvalues"]) EXPECT_GT(e.get<double>(), 0.0);
}
