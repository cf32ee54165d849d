#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <sys/wait.h>

#include "nlsdecay/serialize.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

Result run(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = std::string(NLSDECAY_CLI) + " " + args + " > " + stdout_file.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, nlsd::read_text_file(stdout_file)};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("nlsdecay_cli_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }
  void write(const std::string& name, const std::string& text) { nlsd::write_text_file(dir_ / name, text); }
  fs::path dir_;
};

const char* kConfig = R"({
  "run_id": "cli",
  "geometry": {"mode": "periodic-cartesian", "sizes": [256], "lengths": [40]},
  "profile": {"base": {"amplitude": 0.5, "width": 1.0}, "bubbles": [{"weight": 1.0, "delay": 0}]},
  "solver": {"dt": 0.02, "t_end": 2, "snapshot_stride": 5},
  "observe": {"probe_times": [1, 2]}
})";

}  // namespace

TEST_F(CliTest, SimulateMeasureFitExitCodes) {
  write("c.json", kConfig);
  const auto log = dir_ / "log.txt";
  const auto rd = (dir_ / "run").string();
  EXPECT_EQ(run("simulate --config " + (dir_ / "c.json").string() + " --out " + rd, log).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "observables.csv"));
  EXPECT_EQ(run("measure " + rd, log).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "scatter.json"));
  EXPECT_EQ(run("fit " + rd, log).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "rates.json"));
  EXPECT_EQ(run("measure " + (dir_ / "missing").string(), log).code, 4);
}

TEST_F(CliTest, ConfigErrorsExitTwoWithLineNumbers) {
  write("bad.json", "{\n  \"geometry\": {\"sizes\": [16], \"lengths\": [1]},\n  \"solver\": {\"dt\": 0.1, \"t_end\": 1},\n"
                    "  \"observe\": {\"probe_times\": [0.5, 5]}\n}\n");
  const auto r = run("simulate --config " + (dir_ / "bad.json").string() + " --out " + (dir_ / "x").string(),
                     dir_ / "log.txt");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("bad.json:4:"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(dir_ / "x"));  // validation happens before any compute
  EXPECT_EQ(run("simulate", dir_ / "log.txt").code, 2);
  EXPECT_EQ(run("verify no_such_suite", dir_ / "log.txt").code, 2);
}

TEST_F(CliTest, NumericAbortExitsThree) {
  write("blowup.json", R"({"geometry": {"mode": "radial-3d", "sizes": [256], "lengths": [20]},
    "profile": {"base": {"amplitude": 6, "width": 0.5}, "bubbles": [{"weight": 1, "delay": 0}]},
    "solver": {"dt": 0.05, "t_end": 1, "energy_drift_limit": 1e-6}})");
  EXPECT_EQ(run("simulate --config " + (dir_ / "blowup.json").string() + " --out " + (dir_ / "b").string(),
                dir_ / "log.txt")
                .code,
            3);
}

TEST_F(CliTest, HashMismatchNeedsForce) {
  write("c.json", kConfig);
  std::string other = kConfig;
  other.replace(other.find("\"run_id\": \"cli\""), 15, "\"run_id\": \"cli2\"");
  write("other.json", other);
  const auto log = dir_ / "log.txt";
  const auto rd = (dir_ / "run").string();
  ASSERT_EQ(run("simulate --config " + (dir_ / "c.json").string() + " --out " + rd, log).code, 0);
  EXPECT_EQ(run("measure " + rd + " --config " + (dir_ / "other.json").string(), log).code, 2);
  EXPECT_EQ(run("measure " + rd + " --config " + (dir_ / "other.json").string() + " --force", log).code, 0);
}

TEST_F(CliTest, VerifyIsByteIdenticalAcrossRuns) {
  const auto a = run("verify ratefit", dir_ / "a.txt");
  const auto b = run("verify ratefit", dir_ / "b.txt");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("\"status\": \"pass\""), std::string::npos);
}

TEST_F(CliTest, SweepHonoursThreadFlagAndEnvironment) {
  write("c.json", kConfig);
  write("sweep.json", R"({"runs": [{"config": "c.json", "out": "r1"}, {"config": "c.json", "out": "r2"}]})");
  const auto sweep = (dir_ / "sweep.json").string();
  EXPECT_EQ(run("sweep --config " + sweep + " --threads 2", dir_ / "log.txt").code, 0);
  EXPECT_EQ(nlsd::read_text_file(dir_ / "r1" / "observables.csv"), nlsd::read_text_file(dir_ / "r2" / "observables.csv"));
  const std::string env_cmd = "NLSDECAY_THREADS=2 " + std::string(NLSDECAY_CLI) + " sweep --config " + sweep +
                              " > " + (dir_ / "env.txt").string() + " 2>&1";
  EXPECT_EQ(std::system(env_cmd.c_str()), 0);
  EXPECT_EQ(run("sweep --config " + sweep + " --threads 0", dir_ / "log.txt").code, 2);
}
