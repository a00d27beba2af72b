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

#include "trialtab/features.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "support/fixture.h"
#include "trialtab/error.h"
#include "trialtab/linear.h"
#include "trialtab/tokenizer.h"

namespace trialtab::features {
namespace {

bool HasName(const std::vector<std::string> &names, const std::string &n) {
  return std::find(names.begin(), names.end(), n) != names.end();
}

std::string ShapeOf(const std::vector<std::string> &names) {
  for (const std::string &n : names) {
    if (n.rfind("shape=", 0) == 0) return n;
  }
  return "";
}

TEST(FeaturesTest, NumericTokenShape) {
  const Doc doc = MakeDoc("1:0", "IOP fell to 18.3 mmHg", Tokenizer());
  const auto names = TokenFeatureNames(doc, 3);
  EXPECT_TRUE(HasName(names, "numeric"));
  EXPECT_TRUE(HasName(names, "shape=dd.d"));
  EXPECT_EQ(WordShape("Latanoprost"), "Xxxxx");
}

TEST(FeaturesTest, CaseChangesShapeOnly) {
  const auto lower =
      TokenFeatureNames(MakeDoc("1:0", "latanoprost", Tokenizer()), 0);
  const auto upper =
      TokenFeatureNames(MakeDoc("1:0", "Latanoprost", Tokenizer()), 0);
  EXPECT_TRUE(HasName(lower, "w=latanoprost"));
  EXPECT_TRUE(HasName(upper, "w=latanoprost"));
  EXPECT_NE(ShapeOf(lower), ShapeOf(upper));
}

TEST(FeaturesTest, UnitLexicon) {
  const Doc doc = MakeDoc("1:0", "8.6 mm Hg and 5 mg", Tokenizer());
  EXPECT_TRUE(HasName(TokenFeatureNames(doc, 1), "unit"));
  EXPECT_TRUE(HasName(TokenFeatureNames(doc, 2), "unit"));
  EXPECT_TRUE(HasName(TokenFeatureNames(doc, 5), "unit"));
  EXPECT_FALSE(HasName(TokenFeatureNames(doc, 3), "unit"));
}

TEST(FeaturesTest, HashingIsDeterministicAndBounded) {
  const Doc doc = MakeDoc("1:0", "Latanoprost reduced IOP by 8.6 mmHg",
                          Tokenizer());
  HashOptions options;
  options.bucket_bits = 8;
  for (int i = 0; i < doc.num_tokens(); ++i) {
    const SparseVector a = HashTokenFeatures(doc, i, options);
    EXPECT_EQ(a, HashTokenFeatures(doc, i, options));
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end(),
                               [](auto &x, auto &y) { return x.bucket < y.bucket; }));
    for (const SparseEntry &e : a) EXPECT_LT(e.bucket, 256u);
  }
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(FeaturesTest, IndexOutOfRange) {
  const Doc doc = MakeDoc("1:0", "a b", Tokenizer());
  try {
    TokenFeatureNames(doc, 2);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kRange);
  }
}

TEST(PoolTest, DenseMean) {
  const std::vector<DenseVector> v = {{1, 2}, {3, 4}};
  EXPECT_EQ(PoolMean(std::span<const DenseVector>(v)), (DenseVector{2, 3}));
  const std::vector<DenseVector> one = {{5, 6}};
  EXPECT_EQ(PoolMean(std::span<const DenseVector>(one)), one[0]);
}

TEST(PoolTest, SparseMeanCountsAbsentAsZero) {
  const std::vector<SparseVector> v = {{{7, 1.0f}}, {{7, 3.0f}, {9, 2.0f}}};
  EXPECT_EQ(PoolMean(std::span<const SparseVector>(v)),
            (SparseVector{{7, 2.0f}, {9, 1.0f}}));
}

TEST(PoolTest, EmptyAndMixedAreContractErrors) {
  std::vector<TokenVector> empty;
  EXPECT_THROW(PoolMean(std::span<const TokenVector>(empty)), Error);
  std::vector<TokenVector> mixed = {SparseVector{}, DenseVector{1.0f}};
  try {
    PoolMean(std::span<const TokenVector>(mixed));
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kContract);
  }
}

TEST(EmbeddingStoreTest, ParsesAndAligns) {
  const EmbeddingStore store = EmbeddingStore::Parse(
      "{\"format_version\":1,\"dim\":4}\n"
      "{\"id\":\"1:0\",\"dim\":4,\"vectors\":[[1,0,0,0],[0,1,0,0]]}\n"
      "{\"id\":\"2:0\",\"dim\":4,\"vectors\":[[1,1,1,1]]}\n");
  EXPECT_EQ(store.size(), 2u);
  EXPECT_EQ(store.dim(), 4);
  EXPECT_EQ(store.Find("3:0"), nullptr);
  const Doc doc = MakeDoc("1:0", "a b", Tokenizer());
  EXPECT_EQ(store.Aligned(doc).size(), 2u);
}

TEST(EmbeddingStoreTest, Errors) {
  EXPECT_EQ(EmbeddingStore::Parse("").size(), 0u);
  try {
    EmbeddingStore::Parse(
        "{\"format_version\":1,\"dim\":4}\n"
        "{\"id\":\"1:0\",\"dim\":4,\"vectors\":[[1,0,0]]}\n");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
  }
  EmbeddingStore store(2);
  store.Add("1:0", std::vector<DenseVector>(5, DenseVector{0, 0}));
  const Doc doc = MakeDoc("1:0", "a b c d e f", Tokenizer());
  try {
    store.Aligned(doc);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kAlignment);
  }
}

TEST(FeatureSourceTest, BackendsExtractPerToken) {
  const Doc doc = MakeDoc("1:0", "a b", Tokenizer());
  HashedFeatureSource hashed;
  EXPECT_EQ(hashed.Extract(doc).num_tokens(), 2);
  EXPECT_EQ(hashed.dim(), kDefaultBucketBits);
  auto store = std::make_shared<EmbeddingStore>(3);
  store->Add("1:0", {{1, 2, 3}, {4, 5, 6}});
  EmbeddingFeatureSource dense(store);
  const DocFeatures f = dense.Extract(doc);
  EXPECT_EQ(f.backend, Backend::kDense);
  EXPECT_EQ(std::get<DenseVector>(dense.TokenAt(f, 1)), (DenseVector{4, 5, 6}));
}

// ---- linear

TEST(LinearTest, ScoreAddsBiasAndWeights) {
  LinearModel model(4, 2);
  model.weights()[1 * 2 + 0] = 2.0f;
  model.weights()[3 * 2 + 1] = -1.0f;
  model.bias() = {0.5f, 0.25f};
  FeatureRow row;
  row.Add(1, 1.5f);
  row.Add(3, 2.0f);
  std::vector<double> scores(2);
  model.Score(row, scores);
  EXPECT_DOUBLE_EQ(scores[0], 3.5);
  EXPECT_DOUBLE_EQ(scores[1], -1.75);
}

TEST(LinearTest, EarlyStoppingPatience) {
  EarlyStopping stop(1);
  EXPECT_TRUE(stop.Observe(1, 0.0));
  EXPECT_FALSE(stop.ShouldStop(1));
  EXPECT_FALSE(stop.Observe(2, 0.0));
  EXPECT_TRUE(stop.ShouldStop(2));
  EXPECT_EQ(stop.best_step(), 1);
}

TEST(LinearTest, ConfigValidation) {
  TrainConfig config;
  EXPECT_NO_THROW(config.Validate());
  EXPECT_DOUBLE_EQ(config.EffectiveLearningRate(Backend::kHashed), 0.1);
  EXPECT_DOUBLE_EQ(config.EffectiveLearningRate(Backend::kDense), 5e-5);
  config.patience_steps = config.max_steps + 1;
  EXPECT_THROW(config.Validate(), Error);
  config = {};
  config.batch_size = 0;
  EXPECT_THROW(config.Validate(), Error);
}

TEST(LinearTest, ArchiveRoundTrip) {
  LinearModel model(10, 3);
  model.weights()[4] = 1.25f;
  model.weights()[29] = -3.0f;
  model.bias() = {0.1f, 0.2f, 0.3f};
  const std::string path =
      trialtab::testing::TempDir("archive") + "/model.bin";
  WriteModelArchive(path, "{\"kind\":\"x\"}", model);
  LinearModel loaded;
  EXPECT_EQ(ReadModelArchive(path, &loaded), "{\"kind\":\"x\"}");
  EXPECT_EQ(loaded, model);

  std::ofstream(path, std::ios::binary) << "garbage";
  try {
    ReadModelArchive(path, &loaded);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
  }
}

TEST(LinearTest, HashedOptimizerIsPlainDescent) {
  LinearModel model(4, 2);
  Optimizer sgd(Backend::kHashed, 0.1, model);
  GradientAccumulator grad(2);
  FeatureRow row;
  row.Add(2, 1.0f);
  const double g[] = {1.0, -2.0};
  grad.Add(row, g);
  sgd.Apply(grad, 1.0, model);
  EXPECT_FLOAT_EQ(model.weight(2, 0), -0.1f);
  EXPECT_FLOAT_EQ(model.weight(2, 1), 0.2f);
  EXPECT_FLOAT_EQ(model.bias()[0], -0.1f);
}

}  // namespace
}  // namespace trialtab::features
