#include <cstdlib>
#include <filesystem>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "opq/io.hpp"

namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("opq_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = "OPQ_NO_COLOR=1 \"" OPQPROF_PATH "\" " + args + " >\"" +
                            (dir_ / "stdout").string() + "\" 2>\"" + (dir_ / "stderr").string() +
                            "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  std::string out() const { return opq::read_file(dir_ / "stdout"); }
  std::string err() const { return opq::read_file(dir_ / "stderr"); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  static std::string data(const std::string& name) {
    return std::string(OPQ_TEST_DATA_DIR) + "/" + name;
  }

  fs::path dir_;
};

TEST_F(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_NE(out().find("simulate"), std::string::npos);
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("fit"), 1);
  EXPECT_EQ(run("--line-rate-pps 1e6 --link-gbps 100 reference"), 1);
}

TEST_F(Cli, ReferenceTable) {
  ASSERT_EQ(run("reference --out-dir " + path("ref") + " --plot " + path("plot.json")), 0) << err();
  EXPECT_NE(out().find("29129"), std::string::npos);
  EXPECT_NE(out().find("1.3700"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("ref/arm.json")));
  const auto plot = opq::Json::parse(opq::read_file(path("plot.json")));
  EXPECT_EQ(plot["points"].size(), 12u);
  EXPECT_EQ(plot["arrows"].size(), 6u);
}

TEST_F(Cli, ShiftBetweenReferencePlatforms) {
  ASSERT_EQ(run("reference --out-dir " + path("ref")), 0);
  ASSERT_EQ(run("shift --from " + path("ref/arm.json") + " --to " + path("ref/x86.json") +
                " --out " + path("shift.json")),
            0)
      << err();
  EXPECT_NE(out().find("hash"), std::string::npos);
  const auto plot = opq::Json::parse(opq::read_file(path("shift.json")));
  EXPECT_EQ(plot["arrows"].size(), 6u);
}

TEST_F(Cli, SimulateDeriveFitClassifyReport) {
  ASSERT_EQ(run("simulate --config " + data("sim_arm.json") + " --out " + path("m.csv")), 0)
      << err();
  const auto records = opq::parse_measurements_csv(path("m.csv"));
  EXPECT_EQ(records.size(), 7u * 3u * 3u);

  ASSERT_EQ(run("derive --cpu-hz 1.8e9 --input " + path("m.csv") + " --out " + path("p.json")), 0)
      << err();
  ASSERT_EQ(run("fit --input " + path("p.json") + " --out " + path("p.json")), 0) << err();
  ASSERT_EQ(run("classify --input " + path("p.json") + " --out " + path("p.json")), 0) << err();
  EXPECT_NE(out().find("LatentTrap"), std::string::npos) << out();

  const auto doc = opq::load_profile(path("p.json"));
  EXPECT_EQ(doc.curves.size(), 6u);
  EXPECT_EQ(doc.opq_points.size(), 6u);
  const auto* crc = doc.find_curve("crc");
  ASSERT_NE(crc, nullptr);
  EXPECT_NEAR(crc->exponent_k, 1.37, 0.05);

  ASSERT_EQ(run("report --input " + path("p.json")), 0) << err();
  EXPECT_NE(out().find("printf"), std::string::npos);
  EXPECT_NE(out().find("arm-sim"), std::string::npos);
}

TEST_F(Cli, DataErrorsExitTwo) {
  opq::write_file_atomic(path("bad.csv"),
                         "platform,operator,packet_size_bytes,throughput_pps,run_id\n"
                         "arm,baseline,64,abc,\n");
  EXPECT_EQ(run("derive --cpu-hz 1e9 --input " + path("bad.csv")), 2);
  EXPECT_NE(err().find("line 2"), std::string::npos) << err();
  EXPECT_EQ(run("fit --input " + path("missing.json")), 2);
  EXPECT_EQ(run("derive --input " + path("bad.csv")), 2);
}

TEST_F(Cli, NegativeCostExitsThree) {
  opq::write_file_atomic(path("neg.csv"),
                         "platform,operator,packet_size_bytes,throughput_pps,run_id\n"
                         "arm,baseline,64,1000000,\n"
                         "arm,crc,64,2000000,\n");
  EXPECT_EQ(run("derive --cpu-hz 1e9 --input " + path("neg.csv")), 3);
}

TEST_F(Cli, LineRateBoundStrictExitsThree) {
  ASSERT_EQ(run("simulate --config " + data("sim_linerate.json") + " --out " + path("m.csv")), 0)
      << err();
  EXPECT_EQ(run("derive --cpu-hz 2.2e9 --link-gbps 100 --input " + path("m.csv")), 0) << err();
  EXPECT_NE(err().find("LineRateBound at 64"), std::string::npos) << err();
  EXPECT_EQ(run("derive --strict --cpu-hz 2.2e9 --link-gbps 100 --input " + path("m.csv")), 3);
}

TEST_F(Cli, SimulateIsDeterministic) {
  ASSERT_EQ(run("simulate --config " + data("sim_arm.json") + " --out " + path("a.csv")), 0);
  ASSERT_EQ(run("simulate --config " + data("sim_arm.json") + " --out " + path("b.csv")), 0);
  EXPECT_EQ(opq::read_file(path("a.csv")), opq::read_file(path("b.csv")));
  ASSERT_EQ(run("--seed 8 simulate --config " + data("sim_arm.json") + " --out " + path("c.csv")),
            0);
  EXPECT_NE(opq::read_file(path("a.csv")), opq::read_file(path("c.csv")));
}

TEST_F(Cli, BenchShortRun) {
  ASSERT_EQ(run("--sizes 64,256 bench --operators crc --warmup 0.002 --duration 0.01 --reps 1 "
                "--printf-target /dev/null --csv " + path("b.csv") + " --out " + path("b.json")),
            0)
      << err();
  EXPECT_NE(err().find("cpu_hz="), std::string::npos);
  const auto doc = opq::load_profile(path("b.json"));
  EXPECT_EQ(doc.provenance, "bench");
  EXPECT_EQ(opq::parse_measurements_csv(path("b.csv")).size(), 4u);
}

}  // namespace
