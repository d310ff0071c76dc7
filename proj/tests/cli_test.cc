// Copyright 2026 The Episode Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"

namespace episode_forge::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome Exec(std::vector<std::string> args) {
  args.insert(args.begin(), "episode_forge");
  std::ostringstream out, err;
  Outcome o;
  o.code = Run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Manifests of runs that differ only in their output directory.
std::string WithoutOutDir(const std::string& manifest) {
  std::string out;
  std::istringstream in(manifest);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("out-dir=", 0) != 0) out += line + "\n";
  }
  return out;
}

std::vector<std::string> Lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("episode_forge_cli_" +
            std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, DiversityWritesNormalisedCsv) {
  const auto r = Exec({"diversity", "--synth", "50,16,1.0,0.1", "--samplers",
                       "uniform,ndt,ndb,ndtb,sbu,sdpp", "--out-dir", Path("a")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = Lines(Slurp(Path("a/diversity.csv")));
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[0], "sampler,od_normalized");
  EXPECT_EQ(lines[1], "uniform,1");
  EXPECT_EQ(lines[2], "ndt,0");
  EXPECT_EQ(lines[3], "ndb,0");
  EXPECT_EQ(lines[5], "sbu,0");
  EXPECT_EQ(r.out, Slurp(Path("a/diversity.csv")));
  const auto j = nlohmann::json::parse(Slurp(Path("a/diversity.json")));
  EXPECT_EQ(j["samplers"].size(), 6u);
  EXPECT_EQ(j["samplers"][0]["seeds"].size(), 3u);
  EXPECT_EQ(j["samplers"][0]["seeds"][0]["batches"].size(), 5u);
  EXPECT_TRUE(fs::exists(Path("a/manifest.cfg")));
}

TEST_F(CliTest, DiversityIsByteIdenticalOnRerun) {
  const std::vector<std::string> base{"diversity", "--synth", "30,8,1.0,0.1",
                                      "--samplers", "uniform,sdpp,ndtb", "--seed", "4"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out-dir", Path("a")});
  b.insert(b.end(), {"--out-dir", Path("b")});
  ASSERT_EQ(Exec(a).code, 0);
  ASSERT_EQ(Exec(b).code, 0);
  for (const char* f : {"diversity.csv", "diversity.json"}) {
    EXPECT_EQ(Slurp(Path(std::string("a/") + f)), Slurp(Path(std::string("b/") + f)));
  }
  EXPECT_EQ(WithoutOutDir(Slurp(Path("a/manifest.cfg"))),
            WithoutOutDir(Slurp(Path("b/manifest.cfg"))));
}

TEST_F(CliTest, MissingWorldIsUsageError) {
  const auto r = Exec({"diversity", "--out-dir", Path("x")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: usage:", 0), 0u);
  EXPECT_EQ(Lines(r.err).size(), 1u);
  const auto both = Exec({"sample", "--synth", "10,4,1,0.1", "--embeddings", "e.csv"});
  EXPECT_EQ(both.code, 2);
}

TEST_F(CliTest, BadArgumentsAreUsageErrors) {
  EXPECT_EQ(Exec({}).code, 2);
  EXPECT_EQ(Exec({"frobnicate"}).code, 2);
  EXPECT_EQ(Exec({"sample", "--synth", "1,2"}).code, 2);
  EXPECT_EQ(Exec({"dpp-check", "--n", "9"}).code, 2);
  EXPECT_EQ(Exec({"sample", "--synth", "10,4,1,0.1", "--sampler", "bogus"}).code, 1);
}

TEST_F(CliTest, RuntimeErrorsNameTheirCode) {
  const auto r = Exec({"ttest", Path("missing_a.csv"), Path("missing_b.csv")});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: io_error:", 0), 0u) << r.err;
}

TEST_F(CliTest, SampleNdtRepeatsClasses) {
  const auto r = Exec({"sample", "--synth", "50,16,1.0,0.1", "--sampler", "ndt",
                       "--count", "3", "--meta-batch-size", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = Lines(r.out);
  ASSERT_EQ(lines.size(), 6u);
  const auto first = nlohmann::json::parse(lines[0]);
  for (const auto& line : lines) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["classes"], first["classes"]);
  }
}

TEST_F(CliTest, SampleSchema) {
  const auto r = Exec({"sample", "--synth", "20,4,1.0,0.1", "--shots", "2",
                       "--queries", "3", "--meta-batch-size", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& line : Lines(r.out)) {
    const auto j = nlohmann::json::parse(line);
    ASSERT_TRUE(j.is_object());
    EXPECT_EQ(j.size(), 4u);
    EXPECT_TRUE(j["task_id"].is_number_unsigned());
    ASSERT_EQ(j["classes"].size(), 5u);
    for (const auto& c : j["classes"]) EXPECT_TRUE(c.is_string());
    ASSERT_EQ(j["support"].size(), 10u);
    ASSERT_EQ(j["query"].size(), 15u);
    for (const auto& e : j["support"]) {
      EXPECT_EQ(e["x"].size(), 4u);
      EXPECT_GE(e["y"].get<int>(), 0);
      EXPECT_LT(e["y"].get<int>(), 5);
    }
  }
}

TEST_F(CliTest, SampleSeedsDiffer) {
  const auto a = Exec({"sample", "--synth", "50,16,1.0,0.1", "--seed", "1", "--meta-batch-size", "1"});
  const auto b = Exec({"sample", "--synth", "50,16,1.0,0.1", "--seed", "2", "--meta-batch-size", "1"});
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  const auto ja = nlohmann::json::parse(Lines(a.out)[0]);
  const auto jb = nlohmann::json::parse(Lines(b.out)[0]);
  std::set<std::string> sa, sb;
  for (const auto& c : ja["classes"]) sa.insert(c.get<std::string>());
  for (const auto& c : jb["classes"]) sb.insert(c.get<std::string>());
  EXPECT_NE(sa, sb);
}

TEST_F(CliTest, SampleToFileWritesManifest) {
  const auto r = Exec({"sample", "--synth", "20,4,1.0,0.1", "--out", Path("s/ep.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_TRUE(fs::exists(Path("s/ep.jsonl")));
  const std::string manifest = Slurp(Path("s/manifest.cfg"));
  EXPECT_NE(manifest.find("# outputs: ep.jsonl"), std::string::npos);
  EXPECT_NE(manifest.find("[sample]"), std::string::npos);
}

std::vector<std::string> TinyRegression(const std::string& out_dir,
                                        const std::string& sampler = "uniform") {
  return {"train-regression", "--learner", "reptile", "--epochs", "2",
          "--batches-per-epoch", "5", "--meta-batch-size", "4", "--eval-pool-size",
          "30", "--sampler", sampler, "--seed", "7", "--out-dir", out_dir};
}

TEST_F(CliTest, TrainRegressionOutputs) {
  const auto r = Exec(TinyRegression(Path("r")));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto per_task = Lines(Slurp(Path("r/per_task.csv")));
  ASSERT_EQ(per_task.size(), 31u);
  EXPECT_EQ(per_task[0], "task_index,metric");
  EXPECT_EQ(per_task[1].rfind("0,", 0), 0u);
  const auto curve = Lines(Slurp(Path("r/curve.csv")));
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_EQ(curve[0], "epoch,mean_metric");
  const std::string summary = Slurp(Path("r/summary.txt"));
  EXPECT_NE(summary.find(" ± "), std::string::npos);
  EXPECT_NE(r.out.find(summary.substr(0, summary.size() - 1)), std::string::npos);
  const std::string manifest = Slurp(Path("r/manifest.cfg"));
  EXPECT_NE(manifest.find("inner-steps=5"), std::string::npos);
  EXPECT_NE(manifest.find("eval-seed=7"), std::string::npos);
  EXPECT_EQ(manifest.find("elapsed"), std::string::npos);
}

TEST_F(CliTest, TrainRegressionDefaultPoolSize) {
  const auto r = Exec({"train-regression", "--epochs", "1", "--batches-per-epoch", "1",
                       "--meta-batch-size", "2", "--out-dir", Path("d")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Lines(Slurp(Path("d/per_task.csv"))).size(), 1025u);
}

TEST_F(CliTest, TrainRegressionDeterministicAndReplayable) {
  ASSERT_EQ(Exec(TinyRegression(Path("a"), "ohtm")).code, 0);
  ASSERT_EQ(Exec(TinyRegression(Path("b"), "ohtm")).code, 0);
  for (const char* f : {"per_task.csv", "curve.csv", "summary.txt", "log.txt"}) {
    EXPECT_EQ(Slurp(Path(std::string("a/") + f)), Slurp(Path(std::string("b/") + f))) << f;
  }
  EXPECT_EQ(WithoutOutDir(Slurp(Path("a/manifest.cfg"))),
            WithoutOutDir(Slurp(Path("b/manifest.cfg"))));
  // Replaying the manifest reproduces the run.
  const auto replay = Exec({"--config", Path("a/manifest.cfg"), "train-regression",
                            "--out-dir", Path("c")});
  ASSERT_EQ(replay.code, 0) << replay.err;
  EXPECT_EQ(Slurp(Path("a/per_task.csv")), Slurp(Path("c/per_task.csv")));
  // Flags beat the config file.
  const auto over = Exec({"--config", Path("a/manifest.cfg"), "train-regression",
                          "--eval-pool-size", "4", "--out-dir", Path("e")});
  ASSERT_EQ(over.code, 0) << over.err;
  EXPECT_EQ(Lines(Slurp(Path("e/per_task.csv"))).size(), 5u);
}

TEST_F(CliTest, ThreadsFromEnvironment) {
  ::setenv("EPISODE_FORGE_THREADS", "3", 1);
  const auto r = Exec(TinyRegression(Path("t")));
  ::unsetenv("EPISODE_FORGE_THREADS");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(Slurp(Path("t/manifest.cfg")).find("threads=3"), std::string::npos);
  ASSERT_EQ(Exec(TinyRegression(Path("u"))).code, 0);
  EXPECT_EQ(Slurp(Path("t/per_task.csv")), Slurp(Path("u/per_task.csv")));
}

TEST_F(CliTest, TtestOnPerTaskFiles) {
  ASSERT_EQ(Exec(TinyRegression(Path("u"), "uniform")).code, 0);
  ASSERT_EQ(Exec(TinyRegression(Path("s"), "sbu")).code, 0);
  const auto r = Exec({"ttest", Path("s/per_task.csv"), Path("u/per_task.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = Lines(r.out);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "t,p,dof,significant@0.05");
  EXPECT_NE(lines[1].find(",29,"), std::string::npos);
  const auto same = Exec({"ttest", Path("u/per_task.csv"), Path("u/per_task.csv")});
  EXPECT_EQ(Lines(same.out)[1], "0,1,29,false");
  std::ofstream(Path("bad.csv")) << "task_index,metric\n0,1\n2,3\n";
  EXPECT_EQ(Exec({"ttest", Path("bad.csv"), Path("bad.csv")}).code, 1);
}

TEST_F(CliTest, TrainProtonetLearnsAndLogs) {
  const auto r = Exec({"train-protonet", "--synth", "40,8,1.0,0.1", "--epochs", "2",
                       "--batches-per-epoch", "20", "--meta-batch-size", "4",
                       "--eval-pool-size", "50", "--out-dir", Path("p")});
  ASSERT_EQ(r.code, 0) << r.err;
  double acc = 0;
  const auto lines = Lines(Slurp(Path("p/per_task.csv")));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    acc += std::stod(lines[i].substr(lines[i].find(',') + 1)) / (lines.size() - 1);
  }
  EXPECT_GT(acc, 0.9);

  const auto o = Exec({"train-protonet", "--synth", "40,8,1.0,0.1", "--epochs", "1",
                       "--batches-per-epoch", "20", "--meta-batch-size", "4",
                       "--sampler", "ohtm", "--eval-pool-size", "4", "--out-dir", Path("o")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(Slurp(Path("o/log.txt")).find("ohtm: buffer reached"), std::string::npos);

  const auto d = Exec({"train-protonet", "--synth", "40,8,1.0,0.1", "--epochs", "1",
                       "--batches-per-epoch", "501", "--meta-batch-size", "1",
                       "--sampler", "ddpp", "--eval-pool-size", "4", "--out-dir", Path("dd")});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_NE(d.out.find("ddpp: batches 0-499 are uniform-warmup"), std::string::npos);
  EXPECT_NE(d.out.find("ddpp: refreshed class embeddings before batch 500"),
            std::string::npos);
}

TEST_F(CliTest, DppCheckIdentityPasses) {
  const auto r = Exec({"dpp-check", "--out-dir", Path("k")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("result=pass"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("draws=60000"), std::string::npos);
  EXPECT_EQ(Lines(Slurp(Path("k/dpp_check.csv"))).size(), 7u);
}

TEST_F(CliTest, DppCheckNearDuplicateNeverDrawn) {
  std::ofstream(Path("e.csv")) << "class_id,e0,e1,e2\n"
                               << "a,1,0,0\n"
                               << "a2,1,1e-9,0\n"
                               << "b,0,1,0\n"
                               << "c,0,0,1\n";
  const auto r = Exec({"dpp-check", "--embeddings", Path("e.csv"), "--draws", "20000",
                       "--out-dir", Path("k")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = Lines(Slurp(Path("k/dpp_check.csv")));
  ASSERT_GE(lines.size(), 2u);
  // First subset in lexicographic order is the near-duplicate pair.
  EXPECT_EQ(lines[1].substr(lines[1].rfind(',')), ",0") << lines[1];
}

TEST_F(CliTest, HelpAndVersion) {
  const auto h = Exec({"dpp-check", "--help"});
  EXPECT_EQ(h.code, 0);
  EXPECT_NE(h.out.find("--kernel"), std::string::npos);
  const auto v = Exec({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_EQ(v.out, "0.1.0\n");
}

}  // namespace
}  // namespace episode_forge::cli
