// Copyright 2026 The Trialtab Authors.
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

#include "cli.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "support/fixture.h"
#include "trialtab/corpus/annotation_io.h"
#include "trialtab/evaluate.h"

namespace trialtab::cli {
namespace {

using ::trialtab::testing::FixtureCorpus;
using ::trialtab::testing::ReadFile;
using ::trialtab::testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result Call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = Run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string WriteFixture(const std::string &dir) {
  const std::string path = dir + "/fixture.jsonl";
  corpus::WriteAnnotations(FixtureCorpus(), path);
  return path;
}

TEST(CliTest, SplitIsDeterministic) {
  const std::string dir = TempDir("cli_split");
  const std::string in = WriteFixture(dir);
  for (const char *run : {"a", "b"}) {
    const Result r = Call({"split", "--in", in, "--out-dir", dir + "/" + run,
                           "--seed", "7", "--ratios", "0.7,0.1,0.2"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(ReadFile(dir + "/a/manifest.tsv"), ReadFile(dir + "/b/manifest.tsv"));
  EXPECT_EQ(ReadFile(dir + "/a/train.jsonl"), ReadFile(dir + "/b/train.jsonl"));
}

TEST(CliTest, EvaluateGoldAgainstGold) {
  const std::string dir = TempDir("cli_eval");
  const std::string in = WriteFixture(dir);
  ASSERT_EQ(Call({"tabulate", "--in", in, "--gold", "--out-dir", dir + "/csv"})
                .code,
            0);
  const Result tab = Call({"evaluate", "--task", "tab-strict", "--gold",
                           dir + "/csv", "--pred", dir + "/csv", "--out",
                           dir + "/report.json"});
  ASSERT_EQ(tab.code, 0) << tab.err;
  const auto report = nlohmann::json::parse(ReadFile(dir + "/report.json"));
  EXPECT_EQ(report["overall"]["f1"], 1.0);
  EXPECT_EQ(report["task"], "tab-strict");

  const Result joint = Call({"evaluate", "--task", "joint", "--gold", in,
                             "--pred", in, "--out", dir + "/joint.json"});
  ASSERT_EQ(joint.code, 0) << joint.err;
  const std::vector<Doc> docs = FixtureCorpus();
  EXPECT_EQ(ReadFile(dir + "/joint.json"), eval::EvalJoint(docs, docs).ToJson());
}

TEST(CliTest, TrainFractionIsEchoed) {
  const std::string dir = TempDir("cli_fraction");
  const std::vector<Doc> fixture = FixtureCorpus();
  std::vector<Doc> docs;
  for (int i = 0; i < 200; ++i) {
    Doc doc = fixture[i % fixture.size()];
    doc.id = MakeDocId(std::to_string(5000 + i), 0);
    doc.meta.pmid = std::to_string(5000 + i);
    docs.push_back(doc);
  }
  corpus::WriteAnnotations(docs, dir + "/train.jsonl");
  const Result r =
      Call({"train", "ner", "--train", dir + "/train.jsonl", "--out",
            dir + "/ner.bin", "--fraction", "0.05", "--max-steps", "5",
            "--patience", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("train_docs=10\n"), std::string::npos) << r.err;
  EXPECT_NE(ReadFile(dir + "/ner.bin.config").find("train_docs=10\n"),
            std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir + "/ner.bin.log.jsonl"));
}

TEST(CliTest, UsageAndRuntimeErrors) {
  EXPECT_EQ(Call({}).code, kExitUsage);
  EXPECT_EQ(Call({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Call({"split", "--seed", "x"}).code, kExitUsage);
  EXPECT_EQ(Call({"--help"}).code, kExitOk);

  const std::string dir = TempDir("cli_errors");
  std::ofstream(dir + "/bad.jsonl") << "{not json\n";
  const Result r = Call({"split", "--in", dir + "/bad.jsonl", "--out-dir",
                         dir + "/out"});
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("error [parse]"), std::string::npos) << r.err;
}

TEST(CliTest, ConfusionAndIngest) {
  const std::string dir = TempDir("cli_confusion");
  const std::string in = WriteFixture(dir);
  const Result c = Call({"confusion", "ner", "--gold", in, "--pred", in,
                         "--normalize", "--out", dir + "/c.csv"});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(ReadFile(dir + "/c.csv").rfind("gold\\pred", 0), 0u);

  const Result i = Call({"ingest-annotations", "--in", in, "--out",
                         dir + "/merged.jsonl"});
  ASSERT_EQ(i.code, 0) << i.err;
  EXPECT_EQ(ReadFile(dir + "/merged.jsonl"), ReadFile(in));
}

}  // namespace
}  // namespace trialtab::cli
