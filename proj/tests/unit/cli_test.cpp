// Copyright 2026 The dpstream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

namespace {

namespace fs = std::filesystem;

fs::path workdir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("dpstream_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(const std::string& args) {
  const std::string cmd = std::string(DPSTREAM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string data(const char* file) { return (fs::path(DPSTREAM_TEST_DATA) / file).string(); }

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("stream --no-such-flag"), 2);
  EXPECT_EQ(run("sweep --synthetic"), 2);
}

TEST(Cli, MissingDatasetIsConfigError) {
  const auto d = workdir("missing");
  EXPECT_EQ(run("prepare --dataset " + (d / "nope.jsonl").string() + " --artifacts " + d.string()), 2);
  EXPECT_EQ(run("stream --artifacts " + d.string()), 2);
}

TEST(Cli, OutOfRangeParameters) {
  EXPECT_EQ(run("stream --synthetic --tau 1.5"), 2);
  EXPECT_EQ(run("stream --synthetic --alpha 0"), 2);
  EXPECT_EQ(run("stream --synthetic --engine mcmc"), 2);
}

TEST(Cli, PrepareThenStream) {
  const auto d = workdir("prep");
  ASSERT_EQ(run("prepare --dataset " + data("small.jsonl") + " --artifacts " + d.string() + " --latent-dim 3"), 0);
  EXPECT_TRUE(fs::exists(d / "latent.json"));
  EXPECT_EQ(run("stream --artifacts " + d.string() + " -M 20 --mode oracle --tau 0.3"), 0);
  EXPECT_TRUE(fs::exists(d / "report.json"));
  EXPECT_TRUE(fs::exists(d / "events.jsonl"));
}

TEST(Cli, MalformedDatasetIsDataError) {
  const auto d = workdir("malformed");
  std::ofstream(d / "bad.jsonl") << "{\"id\": \"a\", \"year\": \"soon\"}\n";
  EXPECT_EQ(run("prepare --dataset " + (d / "bad.jsonl").string() + " --artifacts " + d.string()), 3);
}

TEST(Cli, ConfigFileAndEnvironmentOverride) {
  const auto d = workdir("config");
  std::ofstream(d / "good.json") << R"({"synthetic": true, "M": 10, "output": ")" << d.string() << R"("})";
  std::ofstream(d / "bad.json") << R"({"M": "many"})";
  EXPECT_EQ(run("stream --config " + (d / "good.json").string()), 0);
  EXPECT_EQ(run("stream --config " + (d / "bad.json").string()), 2);
  const std::string env = "DPSTREAM_CONFIG=" + (d / "bad.json").string() + " ";
  const int status = std::system((env + DPSTREAM_CLI + " stream --config " + (d / "good.json").string() +
                                  " >/dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
}

TEST(Cli, SnapshotResumeAndCorruptSnapshot) {
  const auto d = workdir("snap");
  const std::string common = " --synthetic -M 10 --output " + d.string();
  ASSERT_EQ(run("stream" + common + " --stop-after 10"), 0);
  ASSERT_TRUE(fs::exists(d / "snapshot.json"));
  EXPECT_EQ(run("snapshot --show " + (d / "snapshot.json").string()), 0);
  EXPECT_EQ(run("stream" + common + " --resume " + (d / "snapshot.json").string()), 0);
  fs::resize_file(d / "snapshot.json", 100);
  EXPECT_EQ(run("stream" + common + " --resume " + (d / "snapshot.json").string()), 3);
}

TEST(Cli, SweepWritesCsv) {
  const auto d = workdir("sweep");
  ASSERT_EQ(run("sweep --synthetic -M 10 --param alpha --values 10,100 --output " + d.string()), 0);
  std::ifstream in(d / "sweep.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("parameter,value,engine", 0), 0u);
}

}  // namespace
