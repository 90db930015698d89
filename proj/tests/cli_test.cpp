// Copyright 2026 The fairmiss Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the fairmiss binary end to end: exit codes, stdout purity and run
// directories.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sys/wait.h>
#include <string>

#include <nlohmann/json.hpp>

#include "gtest/gtest.h"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("fairmiss_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) {
    const fs::path out = dir_ / "stdout.txt", err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + FAIRMISS_CLI + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    return {WEXITSTATUS(status), read(out), read(err)};
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name, std::ios::binary) << text;
    return dir_ / name;
  }

  static std::string data(const std::string& name) { return std::string(FAIRMISS_DATA_DIR) + "/" + name; }

  fs::path dir_;
};

TEST_F(CliTest, InspectAdultShowsJointPattern) {
  const auto r = run("--format json inspect " + data("adult.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("schema_version"), "fairmiss.inspect/1");
  EXPECT_EQ(j.at("rows"), 48842);
  EXPECT_EQ(j.at("rows_with_missing"), 3620);
  // workclass and occupation missing together in about 6% of rows.
  const auto& cols = j.at("patterns").at("columns");
  bool found = false;
  for (const auto& p : j.at("patterns").at("patterns")) {
    std::set<std::string> missing;
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (p.at("missing")[k] == 1) missing.insert(cols[k].get<std::string>());
    }
    if (missing == std::set<std::string>{"workclass", "occupation"}) {
      found = true;
      EXPECT_NEAR(p.at("fraction").get<double>(), 0.055, 0.01);
    }
  }
  EXPECT_TRUE(found);
}

TEST_F(CliTest, InspectMalformedAndEmpty) {
  write("bad.schema.json", R"({"a": "numeric", "y": {"kind": "categorical", "is_label": true}})");
  const auto bad = write("bad.csv", "a,y\n1\n");
  auto r = run("inspect " + bad.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("RaggedRows"), std::string::npos);

  write("empty.schema.json", R"({"a": "numeric", "y": {"kind": "categorical", "is_label": true}})");
  const auto empty = write("empty.csv", "a,y\n");
  r = run("--format json inspect " + empty.string());
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("rows"), 0);
}

TEST_F(CliTest, AuditReproducesPublishedTriple) {
  const auto r = run("--format json audit " + data("adult.csv") + " --group adult_race");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("schema_version"), "fairmiss.audit/1");
  EXPECT_TRUE(j.at("digest").at("verified").get<bool>());
  const auto& c = j.at("cases")[0];
  EXPECT_NEAR(c.at("all").at("spd").get<double>(), 0.1014, 0.005);
  EXPECT_NEAR(c.at("with_missing").at("spd").get<double>(), 0.0361, 0.005);
  EXPECT_NEAR(c.at("without_missing").at("spd").get<double>(), 0.1040, 0.005);
  EXPECT_EQ(c.at("fairest"), "with_missing");

  const auto md = run("audit " + data("adult.csv") + " --group adult_race");
  EXPECT_NE(md.out.find("**0.0361**"), std::string::npos);
}

TEST_F(CliTest, AuditGroupErrors) {
  const auto absent = write("absent.json", R"({"protected_attribute": "nope", "privileged_values": ["x"],
                                               "favourable_class": "1"})");
  EXPECT_EQ(run("audit " + data("titanic.csv") + " --group " + absent.string()).code, 2);
  const auto single = write("single.json", R"({"protected_attribute": "sex", "privileged_values": ["female", "male"],
                                               "favourable_class": "1"})");
  EXPECT_EQ(run("audit " + data("titanic.csv") + " --group " + single.string()).code, 3);
  EXPECT_EQ(run("audit " + data("titanic.csv") + " --group no_such_group").code, 2);
}

TEST_F(CliTest, McarExitCodes) {
  const auto r = run("mcar " + data("titanic.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("schema_version"), "fairmiss.mcar/1");
  EXPECT_LT(j.at("p_value").get<double>(), 0.001);

  write("complete.schema.json", R"({"a": "numeric", "b": "numeric", "y": {"kind": "categorical", "is_label": true}})");
  const auto complete = write("complete.csv", "a,b,y\n1,2,0\n2,3,1\n3,1,0\n");
  const auto none = run("mcar " + complete.string());
  EXPECT_EQ(none.code, 4);
  EXPECT_TRUE(none.out.empty());
}

TEST_F(CliTest, OctagonOutputs) {
  auto r = run("--out-dir " + (dir_ / "oct").string() + " octagon " + data("adult.csv") + " --group adult_race");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("schema_version"), "fairmiss.octagon/1");
  EXPECT_EQ(j.at("octagon").at("vertices").size(), 8u);
  EXPECT_NEAR(j.at("baselines").at("perfect").at("spd").get<double>(), 0.1014, 0.001);
  EXPECT_EQ(j.at("baselines").at("perfect").at("accuracy"), 1.0);
  EXPECT_TRUE(fs::exists(dir_ / "oct" / "octagon.csv"));

  write("one.schema.json", R"({"g": "categorical", "y": {"kind": "categorical", "is_label": true}})");
  const auto one = write("one.csv", "g,y\na,1\nb,1\na,1\n");
  const auto grp = write("g.json", R"({"protected_attribute": "g", "privileged_values": ["a"], "favourable_class": "1"})");
  r = run("octagon " + one.string() + " --group " + grp.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(nlohmann::json::parse(r.out).at("octagon").at("degenerate").get<bool>());
}

std::string smoke_config(const std::string& extra = "") {
  return std::string(R"({"name": "smoke", "dataset": "titanic", "data_dir": ")") + FAIRMISS_DATA_DIR +
         R"(", "groups": ["titanic_sex"], "models": [{"kind": "cart"}], "master_seed": 3)" + extra + "}";
}

TEST_F(CliTest, ExperimentSmokeRun) {
  const auto cfg = write("smoke.json", smoke_config(R"(, "repetitions": 1)"));
  const auto run_dir = dir_ / "run";
  const auto r = run("--format json --out-dir " + run_dir.string() + " experiment --config " + cfg.string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_EQ(report.at("schema_version"), "fairmiss.report/1");
  for (const auto& res : report.at("groups")[0].at("results")) {
    EXPECT_EQ(res.at("accuracy_std"), 0.0);
    EXPECT_EQ(res.at("spd_std"), 0.0);
  }
  for (const char* f : {"manifest.json", "config.json", "report.json", "report.md", "points.csv", "octagon.csv"}) {
    EXPECT_TRUE(fs::exists(run_dir / f)) << f;
  }
  EXPECT_EQ(read(run_dir / "report.json"), r.out);
  const auto manifest = nlohmann::json::parse(read(run_dir / "manifest.json"));
  EXPECT_EQ(manifest.at("status"), "complete");
  EXPECT_EQ(manifest.at("master_seed"), 3);
  EXPECT_EQ(manifest.at("datasets")[0].at("csv_sha256").get<std::string>().size(), 64u);
  EXPECT_TRUE(manifest.contains("started_at"));
  EXPECT_TRUE(manifest.contains("finished_at"));
}

TEST_F(CliTest, SeedFlagOverridesFileAndRerunIsIdentical) {
  const auto cfg = write("smoke.json", smoke_config(R"(, "repetitions": 4)"));
  ASSERT_EQ(run("--seed 99 --out-dir " + (dir_ / "a").string() + " experiment --config " + cfg.string()).code, 0);
  EXPECT_EQ(nlohmann::json::parse(read(dir_ / "a" / "manifest.json")).at("master_seed"), 99);
  ASSERT_EQ(run("--threads 3 --out-dir " + (dir_ / "b").string() + " experiment --config " +
                (dir_ / "a" / "config.json").string())
                .code,
            0);
  EXPECT_EQ(read(dir_ / "a" / "report.json"), read(dir_ / "b" / "report.json"));
  ASSERT_EQ(run("--out-dir " + (dir_ / "c").string() + " experiment --config " + cfg.string()).code, 0);
  EXPECT_NE(read(dir_ / "a" / "report.json"), read(dir_ / "c" / "report.json"));
}

TEST_F(CliTest, ExperimentErrors) {
  const auto broken = write("broken.json", "{ not json");
  EXPECT_EQ(run("experiment --config " + broken.string()).code, 2);
  EXPECT_EQ(run("experiment --config " + (dir_ / "missing.json").string()).code, 2);
  const auto bad_model = write("bad_model.json", smoke_config(R"(, "repetitions": 1, "protocol": "subset",
                                                                  "models": [{"kind": "logistic"}])"));
  EXPECT_EQ(run("experiment --config " + bad_model.string()).code, 2);
  EXPECT_EQ(run("bogus").code, 2);

  // Every row lacks a value, so "without missing" regimes are always empty.
  write("holes.schema.json", R"({"g": "categorical", "x": "numeric", "y": {"kind": "categorical", "is_label": true}})");
  std::string csv = "g,x,y\n";
  for (int i = 0; i < 40; ++i) csv += std::string(i % 2 ? "a" : "b") + ",," + std::to_string(i % 3 == 0) + "\n";
  const auto holes = write("holes.csv", csv);
  const auto grp = write("g.json", R"({"protected_attribute": "g", "privileged_values": ["a"], "favourable_class": "1"})");
  const auto cfg = write("holes.json", R"({"name": "holes", "dataset": "holes", "csv": ")" + holes.string() +
                                           R"(", "groups": [)" + nlohmann::json::parse(read(grp)).dump() +
                                           R"(], "models": [{"kind": "cart"}], "repetitions": 5})");
  const auto r = run("--out-dir " + (dir_ / "holes_run").string() + " experiment --config " + cfg.string());
  EXPECT_EQ(r.code, 5) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(nlohmann::json::parse(read(dir_ / "holes_run" / "manifest.json")).at("status"), "failed");
}

}  // namespace
