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

#include "trialtab/evaluate.h"

#include <cmath>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "support/fixture.h"
#include "support/oracle.h"
#include "support/synth.h"
#include "trialtab/error.h"
#include "trialtab/tokenizer.h"

namespace trialtab::eval {
namespace {

using ::trialtab::testing::FixtureCorpus;
using ::trialtab::testing::ParseMarkup;
using tabulate::EvidenceTable;
using tabulate::EvidenceTuple;

MetricCounts Counts(long tp, long fp, long fn) {
  MetricCounts c;
  c.tp = tp;
  c.fp = fp;
  c.fn = fn;
  return c;
}

TEST(PrfTest, Arithmetic) {
  Prf s = ComputePrf(Counts(3, 1, 2));
  EXPECT_DOUBLE_EQ(s.precision, 0.75);
  EXPECT_DOUBLE_EQ(s.recall, 0.6);
  EXPECT_NEAR(s.f1, 0.6667, 1e-4);
  s = ComputePrf(Counts(5, 0, 0));
  EXPECT_EQ(s.f1, 1.0);
  s = ComputePrf(Counts(0, 0, 0));
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.recall, 0.0);
  EXPECT_EQ(s.f1, 0.0);
}

Doc Blank(int n = 8) {
  std::string text;
  for (int i = 0; i < n; ++i) text += (i ? " t" : "t");
  return MakeDoc("1:0", text, Tokenizer());
}

TEST(NerEvalTest, ExactAndPartial) {
  Doc gold = Blank();
  gold.entities = {{EntityLabel::kMeas, 3, 5}};
  Doc pred = gold;
  EXPECT_EQ(EvalNer({pred}, {gold}).overall, Counts(1, 0, 0));
  pred.entities = {{EntityLabel::kMeas, 3, 4}};
  EXPECT_EQ(EvalNer({pred}, {gold}).overall, Counts(0, 1, 1));
  pred.entities = {{EntityLabel::kOc, 3, 5}};
  const MetricsReport r = EvalNer({pred}, {gold});
  EXPECT_EQ(r.overall, Counts(0, 1, 1));
  EXPECT_EQ(r.per_label.at("OC"), Counts(0, 1, 0));
  EXPECT_EQ(r.per_label.at("MEAS"), Counts(0, 0, 1));
}

TEST(NerEvalTest, UnpairedIsPairingError) {
  Doc other = Blank();
  other.id = "2:0";
  try {
    EvalNer({Blank()}, {other});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPairing);
    EXPECT_EQ(e.details().size(), 2u);
  }
}

Doc OcMeas() {
  return ParseMarkup("1", 0, "x", "[OC:o IOP] fell [MEAS:m 5%]", "OC_RES o>m");
}

TEST(ReEvalTest, DirectionMatters) {
  const Doc gold = OcMeas();
  Doc pred = gold;
  EXPECT_EQ(EvalReGold({pred}, {gold}).overall, Counts(1, 0, 0));
  pred.relations = {{RelationLabel::kOcRes, gold.relations[0].child,
                     gold.relations[0].parent}};
  EXPECT_EQ(EvalReGold({pred}, {gold}).overall, Counts(0, 1, 1));
  pred.relations.clear();
  EXPECT_EQ(EvalReGold({pred}, {gold}).overall, Counts(0, 0, 1));
  pred.relations = {{RelationLabel::kOcRes, 1, 3}};
  try {
    EvalReGold({pred}, {gold});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIntegrity);
  }
}

TEST(JointEvalTest, Rules) {
  const Doc gold = ParseMarkup(
      "1", 0, "x", "[OC:o IOP] fell [MEAS:m 5%] on [INTV:a drug] and [OC:q pain]",
      "OC_RES o>m;A1_RES a>m");
  EXPECT_EQ(EvalJoint({gold}, {gold}).overall, Counts(3, 0, 0));

  Doc spurious = gold;
  spurious.relations.push_back(
      {RelationLabel::kOcRes, gold.entities[3].id(), gold.entities[1].id()});
  Canonicalize(spurious);
  // "pain" is now a predicted endpoint, so it leaves the entity pool.
  EXPECT_EQ(EvalJoint({spurious}, {gold}).overall, Counts(2, 1, 0));

  // Missing the measure drops both of its gold edges.
  Doc missed = gold;
  missed.entities.erase(missed.entities.begin() + 1);
  missed.relations.clear();
  const MetricsReport r = EvalJoint({missed}, {gold});
  EXPECT_EQ(r.per_label.at("OC_RES"), Counts(0, 0, 1));
  EXPECT_EQ(r.per_label.at("A1_RES"), Counts(0, 0, 1));
  // o and a are gold endpoints, so only "pain" is scored as an entity.
  EXPECT_EQ(r.per_label.at("OC"), Counts(1, 0, 0));
}

TableSet One(const std::string &id, std::vector<EvidenceTuple> rows) {
  EvidenceTable t;
  t.doc_id = id;
  t.rows = std::move(rows);
  return {{id, t}};
}

TEST(TabEvalTest, Strict) {
  const EvidenceTuple row{"IOP", "5%", "7%"};
  EXPECT_EQ(EvalTabStrict(One("a", {row}), One("a", {row})).overall,
            Counts(1, 0, 0));
  EXPECT_EQ(EvalTabStrict(One("a", {}), One("a", {row})).overall,
            Counts(0, 0, 1));
  EXPECT_EQ(EvalTabStrict(One("a", {{"IOP", "5%", "8%"}}), One("a", {row}))
                .overall,
            Counts(0, 1, 1));
  EXPECT_THROW(EvalTabStrict(One("a", {}), One("b", {})), Error);
}

TEST(TabEvalTest, Relaxed) {
  const EvidenceTuple gold{"mean reduction in IOP", "5%", "7%"};
  EXPECT_EQ(EvalTabRelaxed(One("a", {{"reduction in IOP", "5%", "7%"}}),
                           One("a", {gold}))
                .overall,
            Counts(1, 0, 0));
  EXPECT_EQ(EvalTabRelaxed(One("a", {{"mean reduction in IOP", "7%", "5%"}}),
                           One("a", {gold}))
                .overall,
            Counts(0, 1, 1));
  EXPECT_TRUE(RelaxedTupleMatch({"iop", "5%", "x"}, {"IOP", "5%", ""}));
}

TEST(TabEvalTest, RelaxedUsesBestAssignment) {
  // Greedy would pair p0 with g0 and leave g1 unmatched.
  const std::vector<EvidenceTuple> pred = {{"a b", "1", "2"}, {"a", "1", "2"}};
  const std::vector<EvidenceTuple> gold = {{"a", "1", "2"}, {"b", "1", "2"}};
  EXPECT_EQ(EvalTabRelaxed(One("x", pred), One("x", gold)).overall,
            Counts(2, 0, 0));
}

TEST(TabEvalTest, TableLevel) {
  const EvidenceTuple row{"IOP", "5%", "7%"};
  TableSet pred = One("a", {row});
  TableSet gold = One("a", {row});
  pred.merge(One("b", {}));
  gold.merge(One("b", {row}));
  pred.merge(One("c", {{"x", "", ""}}));
  gold.merge(One("c", {row}));
  const MetricsReport r = EvalTabStrict(pred, gold);
  ASSERT_TRUE(r.table_level.has_value());
  EXPECT_EQ(*r.table_level, Counts(1, 1, 1));
}

TEST(ReportTest, JsonShape) {
  const Doc gold = OcMeas();
  const MetricsReport r = EvalJoint({gold}, {gold});
  const auto j = nlohmann::json::parse(r.ToJson());
  EXPECT_EQ(j["task"], "joint");
  EXPECT_EQ(j["overall"]["f1"], 1.0);
  EXPECT_EQ(j["overall"]["tp"], 1);
  EXPECT_TRUE(j["config"].contains("zero_denominator"));
  EXPECT_TRUE(j["per_label"].contains("A2_RES"));
  EXPECT_NE(r.FormatTable().find("micro"), std::string::npos);
}

TEST(SelfEvalTest, GoldAgainstGoldIsPerfect) {
  const std::vector<Doc> docs = FixtureCorpus();
  TableSet tables;
  for (const Doc &d : docs) tables[d.id] = tabulate::AssembleTable(d);
  for (const MetricsReport &r :
       {EvalNer(docs, docs), EvalReGold(docs, docs), EvalJoint(docs, docs),
        EvalTabStrict(tables, tables), EvalTabRelaxed(tables, tables)}) {
    EXPECT_EQ(r.scores.precision, 1.0) << r.task;
    EXPECT_EQ(r.scores.recall, 1.0) << r.task;
    EXPECT_EQ(r.scores.f1, 1.0) << r.task;
  }
}

TEST(OracleEquivalenceTest, RandomPairs) {
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    auto [gold, pred] = trialtab::testing::RandomPair(rng, std::to_string(i));
    Doc pred_re = gold;
    pred_re.relations = pred.relations;
    // Keep only edges that resolve against gold spans.
    std::erase_if(pred_re.relations, [&](const RelationEdge &e) {
      return !gold.FindSpan(e.parent) || !gold.FindSpan(e.child);
    });
    const TableSet pt = {{gold.id, tabulate::AssembleTable(pred)}};
    const TableSet gt = {{gold.id, tabulate::AssembleTable(gold)}};
    using namespace trialtab::testing;
    EXPECT_TRUE(SameCounts(OracleNer({pred}, {gold}),
                           EvalNer({pred}, {gold}).overall));
    EXPECT_TRUE(SameCounts(OracleReGold({pred_re}, {gold}),
                           EvalReGold({pred_re}, {gold}).overall));
    EXPECT_TRUE(SameCounts(OracleJoint({pred}, {gold}),
                           EvalJoint({pred}, {gold}).overall));
    EXPECT_TRUE(SameCounts(OracleTabStrict(pt, gt),
                           EvalTabStrict(pt, gt).overall));
    EXPECT_TRUE(SameCounts(OracleTabRelaxed(pt, gt),
                           EvalTabRelaxed(pt, gt).overall));
  }
}

TEST(ConfusionTest, Ner) {
  const Doc gold = ParseMarkup("1", 0, "x",
                               "[INTV:a drug 5 mg] cut [OC:o IOP] today", "");
  EXPECT_EQ(ConfusionNer({gold}, {gold}).Normalized().at("INTV", "INTV"), 1.0);
  Doc pred = gold;
  pred.entities = {{EntityLabel::kIntv, 0, 0}, {EntityLabel::kMeas, 1, 2}};
  const ConfusionMatrix m = ConfusionNer({pred}, {gold});
  EXPECT_EQ(m.at("INTV", "MEAS"), 2.0);
  EXPECT_EQ(m.at("OC", "NONE"), 1.0);
  EXPECT_EQ(m.at("NONE", "NONE"), 2.0);
  const ConfusionMatrix n = m.Normalized();
  EXPECT_NEAR(n.at("INTV", "INTV"), 1.0 / 3.0, 1e-12);
  EXPECT_EQ(n.ToCsv().rfind("gold\\pred", 0), 0u);
}

TEST(ConfusionTest, Re) {
  const Doc gold = ParseMarkup(
      "1", 0, "x", "[OC:o IOP] fell [MEAS:m 5%] on [INTV:a drug]",
      "OC_RES o>m;A1_RES a>m");
  const ConfusionMatrix perfect = ConfusionRe({gold}, {gold});
  EXPECT_EQ(perfect.at("OC_RES", "OC_RES"), 1.0);
  EXPECT_EQ(perfect.at("A1_RES", "A1_RES"), 1.0);
  Doc pred = gold;
  pred.relations = {{RelationLabel::kA2Res, gold.relations[1].parent,
                     gold.relations[1].child}};
  const ConfusionMatrix m = ConfusionRe({pred}, {gold});
  EXPECT_EQ(m.at("A1_RES", "A2_RES"), 1.0);
  EXPECT_EQ(m.at("OC_RES", "NONE"), 1.0);
}

}  // namespace
}  // namespace trialtab::eval
