#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

// Runs the tool from the source tree so sample paths resolve.
Outcome run(const std::string& args) {
  const std::string cmd = "cd '" QDARK_SOURCE_DIR "' && '" QDARK_CLI_PATH "' " + args + " 2>&1";
  Outcome o;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return o;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) o.output.append(buf, n);
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qdark_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string out(const std::string& sub = "") const { return "--out '" + (dir_ / sub).string() + "'"; }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, AnalyzeCompleteGraph) {
  const auto o = run("analyze --kind complete --n 32 --seed 1 " + out());
  ASSERT_EQ(o.code, 0) << o.output;
  const auto rep = json::parse(slurp(dir_ / "report.json"));
  EXPECT_EQ(rep["dark_dimension"], 30);
  EXPECT_EQ(rep["target"], 32);
  const auto manifest = json::parse(slurp(dir_ / "manifest.json"));
  EXPECT_EQ(manifest["master_seed"], 1);
  EXPECT_EQ(manifest["config"]["command"], "analyze");
}

TEST_F(Cli, AnalyzeGraphFile) {
  const auto o = run("analyze --graph samples/graphs/trimer.txt --target 3 --seed 1 " + out());
  ASSERT_EQ(o.code, 0) << o.output;
  EXPECT_NE(o.output.find("dark_dimension 1"), std::string::npos);
}

TEST_F(Cli, MalformedGraphIsAUserError) {
  const auto o = run("analyze --graph samples/graphs/malformed.txt --seed 1 " + out());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.output.find("line 2"), std::string::npos) << o.output;
}

TEST_F(Cli, BadInputsExitWithTwo) {
  EXPECT_EQ(run("analyze --kind complete --n 4 --target 9 --seed 1 " + out()).code, 2);
  EXPECT_EQ(run("analyze --kind banana --n 4 --seed 1 " + out()).code, 2);
  EXPECT_EQ(run("analyze --kind path --seed 1 " + out()).code, 2);
  EXPECT_EQ(run("evolve --kind path --n 3 --method magic --seed 1 " + out()).code, 2);
  EXPECT_EQ(run("analyze --no-such-flag").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("analyze --graph samples/graphs/missing.txt --seed 1 " + out()).code, 2);
}

TEST_F(Cli, UnknownConfigKeyIsRejected) {
  fs::create_directories(dir_);
  std::ofstream(dir_ / "cfg.json") << R"({"kind": "path", "n": 4, "colour": "blue"})";
  const auto o = run("analyze --config '" + (dir_ / "cfg.json").string() + "' " + out());
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.output.find("colour"), std::string::npos);
}

TEST_F(Cli, FlagsOverrideConfig) {
  fs::create_directories(dir_);
  std::ofstream(dir_ / "cfg.json") << R"({"kind": "complete", "n": 4, "seed": 3})";
  const auto o = run("analyze --config '" + (dir_ / "cfg.json").string() + "' --n 6 " + out());
  ASSERT_EQ(o.code, 0) << o.output;
  EXPECT_EQ(json::parse(slurp(dir_ / "report.json"))["dark_dimension"], 4);
}

TEST_F(Cli, MissingSeedIsDrawnAndRecorded) {
  const auto o = run("generate --kind er --n 10 --p 0.5 " + out());
  ASSERT_EQ(o.code, 0) << o.output;
  ASSERT_NE(o.output.find("seed: "), std::string::npos);
  const auto printed = std::stoull(o.output.substr(o.output.find("seed: ") + 6));
  EXPECT_EQ(json::parse(slurp(dir_ / "manifest.json"))["master_seed"].get<std::uint64_t>(), printed);
}

TEST_F(Cli, EvolveCompleteGraph) {
  const auto o = run("evolve --kind complete --n 4 --t-max 200 --dt 10 --seed 1 " + out());
  ASSERT_EQ(o.code, 0) << o.output;
  std::istringstream csv(slurp(dir_ / "evolution.csv"));
  std::string line, last;
  std::getline(csv, line);
  std::getline(csv, line);
  EXPECT_EQ(line, "t,p_sink,pop_vacuum,pop_1,pop_2,pop_3,pop_4,pop_sink");
  while (std::getline(csv, line)) last = line;
  const double p = std::stod(last.substr(last.find(',') + 1));
  EXPECT_NEAR(p, 1.0 / 3.0, 1e-8);
  EXPECT_EQ(json::parse(slurp(dir_ / "evolution.json"))["propagator"], "unitary");
}

TEST_F(Cli, EvolveTrimerDarkInput) {
  const auto o = run("evolve --config samples/configs/evolve_trimer_antisymmetric.json " + out());
  ASSERT_EQ(o.code, 0) << o.output;
  EXPECT_NE(o.output.find("p_sink(50) = "), std::string::npos);
  const double p = std::stod(o.output.substr(o.output.find(" = ") + 3));
  EXPECT_NEAR(p, 0.0, 1e-12);
}

TEST_F(Cli, RerunsProduceIdenticalCsv) {
  const std::string args = "sweep-removal --kind cylinder --c 3 --l 3 --k 0,2,4 --realizations 6 "
                           "--cross-check-stride 3 --t-max 40 --seed 9 ";
  ASSERT_EQ(run(args + out("a")).code, 0);
  ASSERT_EQ(run(args + "--threads 2 " + out("b")).code, 0);
  int compared = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "a")) {
    if (e.path().extension() != ".csv") continue;
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / e.path().filename())) << e.path();
    ++compared;
  }
  EXPECT_EQ(compared, 3);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "fig2_cylinder3x3_M6_seed9.csv"));
}

TEST_F(Cli, GenerateRoundTripsThroughAnalyze) {
  ASSERT_EQ(run("generate --kind cylinder --c 4 --l 3 --format json --seed 1 " + out()).code, 0);
  const auto o = run("analyze --graph '" + (dir_ / "graph.json").string() + "' --seed 1 " + out("r"));
  ASSERT_EQ(o.code, 0) << o.output;
  EXPECT_EQ(json::parse(slurp(dir_ / "graph.json"))["n_nodes"], 12);
}

TEST_F(Cli, PerturbWeightsWritesCertificate) {
  const auto o = run("perturb-weights --kind complete --n 5 --seed 4 " + out());
  ASSERT_EQ(o.code, 0) << o.output;
  const auto cert = json::parse(slurp(dir_ / "certificate.json"));
  for (const auto& d : cert["dark_dimension_per_target"]) EXPECT_EQ(d, 0);
  EXPECT_EQ(run("perturb-weights --kind path --n 3 --max-trials 20 --seed 4 " + out("x")).code, 1);
  ASSERT_EQ(run("perturb-weights --kind path --n 5 --site-energies true --seed 4 " + out("y")).code, 0);
  EXPECT_EQ(json::parse(slurp(dir_ / "y" / "certificate.json"))["site_energies"].size(), 5u);
}

TEST_F(Cli, ControllabilityStats) {
  const auto o = run("controllability-stats --sizes 6,8 --samples 20 --seed 42 " + out());
  ASSERT_EQ(o.code, 0) << o.output;
  EXPECT_TRUE(fs::exists(dir_ / "controllability_p0.5_S20_seed42.csv"));
}

TEST_F(Cli, RobustnessAndDephasingOutputs) {
  ASSERT_EQ(run("robustness --c 3 --l 3 --k 0,2 --realizations 3 --noise-subsample 2 --grid-points 5 "
                "--log-tolerance 0.3 --seed 2 " + out()).code, 0);
  const auto fig5 = slurp(dir_ / "fig5_cylinder3x3_M3_seed2.csv");
  EXPECT_NE(fig5.find("k,mean_coherent,rsd_coherent,mean_noise,rsd_noise,mean_classical,rsd_classical"),
            std::string::npos);
  const auto o = run("sweep-dephasing --kind cylinder --c 3 --l 2 --t-max 10 --grid-points 5 --log-tolerance 0.3 "
                     "--compare-removal 1 --realizations 2 --seed 2 " + out("d"));
  ASSERT_EQ(o.code, 0) << o.output;
  EXPECT_TRUE(fs::exists(dir_ / "d" / "fig1_cylinder3x2_tobj8_policyall-pairs.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "d" / "fig4_cylinder3x2_k1_seed2.csv"));
}
