/*
 * Copyright 2026 The ulsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Drives the ulsim binary end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "ulsim/config.hpp"
#include "ulsim/eval.hpp"

namespace ulsim {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ulsim_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) {
    const std::string cmd = std::string(ULSIM_CLI_PATH) + " " + args + " >" +
                            (dir_ / "stdout").string() + " 2>" + (dir_ / "stderr").string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(dir_ / "stdout"),
            slurp(dir_ / "stderr")};
  }

  std::string write_config(const std::string& name, const std::string& json) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << json;
    return p.string();
  }

  fs::path out(const std::string& name) const { return dir_ / name; }

  fs::path dir_;
};

constexpr const char* kSmall =
    R"({"dataset": {"samples_per_class": 60}, "federation": {"rounds": 8}})";

TEST_F(Cli, TrainWritesHistoryAndSummary) {
  const auto cfg = write_config("c.json", kSmall);
  const Result r = run("train --config " + cfg + " --out " + out("a").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out("a") / "history.bin"));
  EXPECT_TRUE(fs::exists(out("a") / "meta.json"));
  const auto summary = nlohmann::json::parse(slurp(out("a") / "train_summary.json"));
  EXPECT_EQ(summary["rounds"], 8);
  EXPECT_LT(summary["final_loss"].get<double>(), summary["initial_loss"].get<double>());
}

TEST_F(Cli, DefaultConfigTrains) {
  const Result r = run("train --out " + out("d").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out("d") / "history.bin"));
}

TEST_F(Cli, ZeroRoundsReportsInitialModel) {
  const auto cfg = write_config("c.json", R"({"federation": {"rounds": 0}})");
  ASSERT_EQ(run("train --config " + cfg + " --out " + out("z").string()).code, 0);
  const auto summary = nlohmann::json::parse(slurp(out("z") / "train_summary.json"));
  EXPECT_EQ(summary["rounds"], 0);
  EXPECT_EQ(summary["initial_loss"], summary["final_loss"]);
}

TEST_F(Cli, SameSeedGivesIdenticalHistory) {
  const auto cfg = write_config("c.json", kSmall);
  ASSERT_EQ(run("train --config " + cfg + " --seed 5 --out " + out("a").string()).code, 0);
  ASSERT_EQ(run("train --config " + cfg + " --seed 5 --out " + out("b").string()).code, 0);
  ASSERT_EQ(run("train --config " + cfg + " --seed 6 --out " + out("c").string()).code, 0);
  EXPECT_EQ(slurp(out("a") / "history.bin"), slurp(out("b") / "history.bin"));
  EXPECT_NE(slurp(out("a") / "history.bin"), slurp(out("c") / "history.bin"));
}

TEST_F(Cli, AttackFindsForgottenClassAndReplaysFromFiles) {
  const Result fresh = run("attack --out " + out("f").string());
  ASSERT_EQ(fresh.code, 0) << fresh.err;
  const std::string in_process = slurp(out("f") / "report.json");
  const auto report = nlohmann::json::parse(in_process);
  EXPECT_EQ(report["status"], "ok");

  const RunConfig c;
  const Scenario s = prepare_scenario(make_setup(c), single_point(c), c.seed);
  EXPECT_EQ(report["candidates"].get<std::vector<int>>(), s.true_labels);

  const std::string o = out("s").string();
  ASSERT_EQ(run("train --out " + o).code, 0);
  ASSERT_EQ(run("unlearn --out " + o).code, 0);
  ASSERT_EQ(run("attack --out " + o + " --history " + o + "/history.bin --unlearn " + o +
                "/unlearn.bin")
                .code,
            0);
  EXPECT_EQ(slurp(out("s") / "report.json"), in_process);
}

TEST_F(Cli, StructuredAttackFailureExitsZero) {
  const auto cfg = write_config("c.json", R"({"federation": {"num_clients": 1, "rounds": 3}})");
  const Result r = run("attack --config " + cfg + " --out " + out("x").string());
  EXPECT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(slurp(out("x") / "report.json"));
  EXPECT_EQ(report["status"], "singularity");
  EXPECT_TRUE(report["eta_approx"].is_null());
}

TEST_F(Cli, CorruptHistoryIsFormatError) {
  const auto cfg = write_config("c.json", kSmall);
  const std::string o = out("h").string();
  ASSERT_EQ(run("train --config " + cfg + " --out " + o).code, 0);
  {
    std::fstream f(out("h") / "history.bin", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  const Result r = run("attack --config " + cfg + " --out " + o + " --history " + o +
                       "/history.bin");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("format"), std::string::npos) << r.err;
  EXPECT_EQ(run("attack --config " + cfg + " --history " + o + "/missing.bin").code, 2);
}

TEST_F(Cli, ConfigErrorsExitOne) {
  const auto bad = write_config("bad.json", R"({"federation": {"batch_size": 0}})");
  const Result r = run("train --config " + bad);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("federation.batch_size"), std::string::npos) << r.err;
  const auto empty = write_config("e.json", R"({"experiment": {"axes": {"method": []}}})");
  EXPECT_EQ(run("experiment --config " + empty).code, 1);
  EXPECT_EQ(run("experiment --preset nope").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("train --seed notanumber").code, 1);
  EXPECT_EQ(run("train --config " + (dir_ / "absent.json").string()).code, 2);
}

TEST_F(Cli, ExperimentIsDeterministicAcrossWorkers) {
  const auto cfg = write_config("c.json", R"({
    "dataset": {"samples_per_class": 60}, "federation": {"rounds": 8},
    "experiment": {"trials": 3, "axes": {"method": ["retrain", "federaser"],
                                         "level": ["sample", "class"],
                                         "mode": ["known_count", "threshold"]}}})");
  const Result a = run("experiment --config " + cfg + " --workers 1 --out " + out("a").string());
  const Result b = run("experiment --config " + cfg + " --workers 3 --out " + out("b").string());
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(out("a") / "results.csv"), slurp(out("b") / "results.csv"));
  EXPECT_EQ(slurp(out("a") / "trials.jsonl"), slurp(out("b") / "trials.jsonl"));
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out.find("mean_asr"), std::string::npos);

  const std::string csv = slurp(out("a") / "results.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 8);

  const Result rep = run("report --out " + out("a").string());
  EXPECT_EQ(rep.code, 0) << rep.err;
  EXPECT_NE(rep.out.find("federaser"), std::string::npos);
}

TEST_F(Cli, FlagOverrides) {
  const auto cfg = write_config("c.json", R"({
    "dataset": {"samples_per_class": 60}, "federation": {"rounds": 8},
    "experiment": {"trials": 5, "axes": {"tau": [0.5, 1.0]}}})");
  ASSERT_EQ(run("experiment --config " + cfg + " --trials 2 --tau 1.5 --out " +
                out("o").string())
                .code,
            0);
  const std::string csv = slurp(out("o") / "results.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_NE(csv.find(",1.5,iid,threshold,2,"), std::string::npos) << csv;
}

}  // namespace
}  // namespace ulsim
