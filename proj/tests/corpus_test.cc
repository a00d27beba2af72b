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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "support/fixture.h"
#include "trialtab/corpus/annotation_io.h"
#include "trialtab/corpus/brat.h"
#include "trialtab/corpus/iob.h"
#include "trialtab/corpus/pubmed.h"
#include "trialtab/corpus/segment.h"
#include "trialtab/corpus/select.h"
#include "trialtab/corpus/split.h"
#include "trialtab/error.h"
#include "trialtab/tokenizer.h"

namespace trialtab::corpus {
namespace {

using ::trialtab::testing::FixtureCorpus;
using ::trialtab::testing::TempDir;

template <typename F>
ErrorKind KindOf(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.kind();
  }
  ADD_FAILURE() << "no trialtab::Error thrown";
  return ErrorKind::kIo;
}

// ---- brat

TEST(BratTest, ParsesEntityLine) {
  const BratDocument doc =
      ParseBrat("Aspirin helped.", "T1\tINTV 0 7\tAspirin\n", "42");
  ASSERT_EQ(doc.spans.size(), 1u);
  EXPECT_EQ(doc.spans[0].label, "INTV");
  EXPECT_EQ(doc.spans[0].start, 0u);
  EXPECT_EQ(doc.spans[0].end, 7u);
}

TEST(BratTest, EmptyAnnotationsAndSkippedLines) {
  EXPECT_TRUE(ParseBrat("Aspirin helped.", "").spans.empty());
  EXPECT_TRUE(ParseBrat("Aspirin helped.", "R1\tRel Arg1:T1 Arg2:T2\n#1\tnote\n")
                  .spans.empty());
}

TEST(BratTest, Errors) {
  EXPECT_EQ(KindOf([] { ParseBrat("Aspirin helped.", "T1\tINTV 0 7\tAsp\n"); }),
            ErrorKind::kIntegrity);
  EXPECT_EQ(KindOf([] { ParseBrat("Aspirin.", "T1\tINTV 0 70\tAspirin\n"); }),
            ErrorKind::kRange);
  EXPECT_EQ(KindOf([] { ParseBrat("Aspirin.", "T1\tINTV zero\n"); }),
            ErrorKind::kParse);
}

TEST(BratTest, MapsLabels) {
  BratDocument doc;
  doc.text = "Intervention Population Dose";
  doc.spans = {{"T1", "Intervention", 0, 12, "Intervention"},
               {"T2", "Population", 13, 23, "Population"}};
  const BratDocument mapped =
      MapSourceLabels(doc, LabelMapping::EbmNlpDefault());
  ASSERT_EQ(mapped.spans.size(), 1u);
  EXPECT_EQ(mapped.spans[0].label, "INTV");

  doc.spans.push_back({"T3", "Dose", 24, 28, "Dose"});
  EXPECT_EQ(KindOf([&] { MapSourceLabels(doc, LabelMapping::EbmNlpDefault()); }),
            ErrorKind::kConfig);
}

TEST(BratTest, MappingFileSyntax) {
  const LabelMapping m =
      LabelMapping::Parse("# comment\nDrug=INTV\nAge=drop\n");
  ASSERT_EQ(m.entries().size(), 2u);
  EXPECT_EQ(m.entries().at("Drug"), EntityLabel::kIntv);
  EXPECT_FALSE(m.entries().at("Age").has_value());
}

TEST(BratTest, AbstractToDocsProjectsSpans) {
  BratDocument doc = ParseBrat(
      "Timolol lowered IOP. Latanoprost lowered IOP by 31%.",
      "T1\tINTV 0 7\tTimolol\nT2\tINTV 21 32\tLatanoprost\n"
      "T3\tMEAS 48 51\t31%\nT4\tOC 16 24\tIOP. Lat\n",
      "77");
  AlignmentReport report;
  const std::vector<Doc> docs =
      AbstractToDocs(doc, "glaucoma", Tokenizer(), &report);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[0].id, "77:0");
  EXPECT_EQ(docs[0].entities.size(), 1u);
  ASSERT_EQ(docs[1].entities.size(), 2u);
  EXPECT_EQ(docs[1].SpanText(docs[1].entities[1]), "31%");
  EXPECT_EQ(report.dropped_cross_sentence, 1);
  EXPECT_EQ(docs[1].meta.domain, "glaucoma");
}

// ---- iob

Doc ThreeTokens() {
  Doc doc = MakeDoc("1:0", "mean IOP fell", Tokenizer());
  return doc;
}

TEST(IobTest, Encodes) {
  Doc doc = ThreeTokens();
  EXPECT_EQ(ToIob(doc), (std::vector<std::string>{"O", "O", "O"}));
  doc.entities = {{EntityLabel::kOc, 0, 1}};
  EXPECT_EQ(ToIob(doc), (std::vector<std::string>{"B-OC", "I-OC", "O"}));
  doc.entities = {{EntityLabel::kMeas, 0, 0}, {EntityLabel::kMeas, 1, 1}};
  EXPECT_EQ(ToIob(doc), (std::vector<std::string>{"B-MEAS", "B-MEAS", "O"}));
}

TEST(IobTest, Decodes) {
  const Doc doc = ThreeTokens();
  const Doc back = FromIob(doc.tokens, {"B-OC", "I-OC", "O"});
  ASSERT_EQ(back.entities.size(), 1u);
  EXPECT_EQ(back.entities[0], (EntitySpan{EntityLabel::kOc, 0, 1}));
  EXPECT_TRUE(FromIob(doc.tokens, {"O", "O", "O"}).entities.empty());
}

TEST(IobTest, IllFormedNamesIndex) {
  const Doc doc = ThreeTokens();
  try {
    FromIob({doc.tokens[0], doc.tokens[1]}, {"O", "I-MEAS"});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
  EXPECT_EQ(KindOf([&] { FromIob(doc.tokens, {"B-OC", "I-MEAS", "O"}); }),
            ErrorKind::kFormat);
  EXPECT_EQ(KindOf([&] { FromIob(doc.tokens, {"O", "O"}); }),
            ErrorKind::kFormat);
  EXPECT_EQ(KindOf([&] { FromIob(doc.tokens, {"B-DOSE", "O", "O"}); }),
            ErrorKind::kFormat);
}

TEST(IobTest, RoundTripsFixture) {
  for (const Doc &doc : FixtureCorpus()) {
    EXPECT_EQ(FromIob(doc.tokens, ToIob(doc)).entities, doc.entities)
        << doc.id;
  }
}

// ---- segment / select

TEST(SegmentTest, ProtectsDecimals) {
  const Segmentation s =
      SegmentSentences("IOP fell to 18.3 mm Hg. Safety was good.");
  ASSERT_EQ(s.sentences.size(), 2u);
  EXPECT_EQ(s.sentences[0].text, "IOP fell to 18.3 mm Hg.");
}

TEST(SegmentTest, SingleUnterminated) {
  EXPECT_EQ(SegmentSentences("IOP fell").sentences.size(), 1u);
}

TEST(SegmentTest, ParenthesisedStatistic) {
  const Segmentation s =
      SegmentSentences("Reduction was 10% (p=0.01). N=52.");
  ASSERT_EQ(s.sentences.size(), 2u);
  EXPECT_EQ(s.sentences[1].text, "N=52.");
}

TEST(SegmentTest, AbbreviationsDoNotSplit) {
  EXPECT_EQ(SegmentSentences("A vs. B was tested. Then C.").sentences.size(),
            2u);
  EXPECT_EQ(
      SegmentSentences("Drugs, e.g. Timolol, were used.").sentences.size(), 1u);
}

TEST(SegmentTest, ReconstructsInput) {
  const std::string text = "  One. Two 1.5 mg.  Three!\n";
  EXPECT_EQ(SegmentSentences(text).Reconstruct(), text);
}

TEST(SelectTest, ResultsSection) {
  AbstractRecord record{"9", "asthma", SplitSections(
      "METHODS: We ran a trial. RESULTS: A was 5%. B was 6%. C was 7%. "
      "CONCLUSIONS: Good.")};
  const std::vector<Doc> docs = SelectResultSentences(record, Tokenizer());
  ASSERT_EQ(docs.size(), 3u);
  EXPECT_FALSE(docs[0].meta.low_confidence);
  EXPECT_EQ(docs[0].id, "9:1");
  EXPECT_EQ(docs[0].meta.domain, "asthma");
}

TEST(SelectTest, UnstructuredFallback) {
  AbstractRecord record{"9", "", SplitSections(
      "We studied IOP. Unacceptable IOP occurred in 39.3% of patients.")};
  const std::vector<Doc> docs = SelectResultSentences(record, Tokenizer());
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_TRUE(docs[0].meta.low_confidence);

  AbstractRecord none{"9", "", SplitSections("No numbers here. None at all.")};
  EXPECT_TRUE(SelectResultSentences(none, Tokenizer()).empty());
}

// ---- pubmed

class FakeIndex : public LiteratureIndexClient {
 public:
  explicit FakeIndex(std::set<std::string> matching, int fail_batch = -1)
      : matching_(std::move(matching)), fail_batch_(fail_batch) {}
  std::vector<std::string> Search(
      const std::string &, const std::vector<std::string> &pmids) override {
    if (calls_++ == fail_batch_) {
      throw Error(ErrorKind::kTransport, "connection reset");
    }
    std::vector<std::string> out;
    for (const std::string &id : pmids) {
      if (matching_.count(id)) out.push_back(id);
    }
    return out;
  }
  int calls() const { return calls_; }

 private:
  std::set<std::string> matching_;
  int fail_batch_;
  int calls_ = 0;
};

TEST(PubmedTest, CacheHitMakesNoCalls) {
  std::vector<std::string> ids;
  std::set<std::string> diabetic;
  for (int i = 0; i < 5000; ++i) {
    ids.push_back(std::to_string(100000 + i));
    if (i % 7 == 0) diabetic.insert(ids.back());
  }
  const QueryCache cache(TempDir("pubmed_cache"));
  FakeIndex warm(diabetic);
  EXPECT_EQ(PartitionByDomain(ids, "diabetes", &warm, &cache), diabetic);
  EXPECT_EQ(warm.calls(), 10);

  FakeIndex cold({});
  EXPECT_EQ(PartitionByDomain(ids, "diabetes", &cold, &cache), diabetic);
  EXPECT_EQ(cold.calls(), 0);
  EXPECT_EQ(PartitionByDomain(ids, "diabetes", nullptr, &cache), diabetic);
}

TEST(PubmedTest, EmptyIds) {
  EXPECT_TRUE(PartitionByDomain({}, "x", nullptr, nullptr).empty());
}

TEST(PubmedTest, UnreachableWithoutCache) {
  EXPECT_EQ(KindOf([] { PartitionByDomain({"1", "2"}, "x", nullptr, nullptr); }),
            ErrorKind::kTransport);
}

TEST(PubmedTest, PartialFailureListsBatches) {
  std::vector<std::string> ids;
  for (int i = 0; i < 30; ++i) ids.push_back(std::to_string(i));
  FakeIndex flaky({"1"}, /*fail_batch=*/1);
  try {
    PartitionByDomain(ids, "x", &flaky, nullptr, {3});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTransport);
    ASSERT_EQ(e.details().size(), 1u);
    EXPECT_NE(e.details()[0].find("batch 2"), std::string::npos);
  }
}

TEST(PubmedTest, CacheKeyDependsOnTermAndBatch) {
  EXPECT_EQ(QueryCache::Key("a", {"1", "2"}), QueryCache::Key("a", {"1", "2"}));
  EXPECT_NE(QueryCache::Key("a", {"1", "2"}), QueryCache::Key("b", {"1", "2"}));
  EXPECT_NE(QueryCache::Key("a", {"1", "2"}), QueryCache::Key("a", {"1"}));
}

// ---- annotation io

TEST(AnnotationIoTest, RoundTripIsByteIdentical) {
  const std::vector<Doc> docs = FixtureCorpus();
  std::ostringstream first;
  WriteAnnotations({docs[0], docs[1], docs[2]}, first);
  std::istringstream in(first.str());
  const std::vector<Doc> loaded = ParseAnnotations(in);
  ASSERT_EQ(loaded.size(), 3u);
  EXPECT_EQ(loaded[0], docs[0]);
  std::ostringstream second;
  WriteAnnotations(loaded, second);
  EXPECT_EQ(first.str(), second.str());
}

TEST(AnnotationIoTest, RejectFlagKeptAndFiltered) {
  Doc doc = FixtureCorpus()[0];
  doc.meta.answer = Answer::kReject;
  const Doc back = FromRecordLine(ToRecordLine(doc));
  EXPECT_EQ(back.meta.answer, Answer::kReject);
  EXPECT_TRUE(FilterRejected({back}).empty());
}

TEST(AnnotationIoTest, MissingTokensNamesLine) {
  const std::vector<Doc> docs = FixtureCorpus();
  std::ostringstream out;
  WriteAnnotations({docs.begin(), docs.begin() + 6}, out);
  std::string text = out.str();
  text += R"({"answer":"accept","meta":{"id":"x:0"},"relations":[],"spans":[],"text":"a"})";
  text += "\n";
  std::istringstream in(text);
  try {
    ParseAnnotations(in);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::kSchema);
    EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
  }
}

TEST(AnnotationIoTest, MalformedAndUnknownLabel) {
  EXPECT_EQ(KindOf([] { FromRecordLine("{not json", 3); }), ErrorKind::kParse);
  std::string line = ToRecordLine(FixtureCorpus()[0]);
  line.replace(line.find("\"INTV\""), 6, "\"DOSE\"");
  EXPECT_EQ(KindOf([&] { FromRecordLine(line); }), ErrorKind::kSchema);
}

// ---- split

std::vector<Doc> NumberedDocs(int n, const std::string &domain = "d") {
  std::vector<Doc> docs;
  for (int i = 0; i < n; ++i) {
    Doc doc = MakeDoc(MakeDocId("p" + std::to_string(i), 0), "x", Tokenizer());
    doc.meta.domain = domain;
    docs.push_back(doc);
  }
  return docs;
}

TEST(SplitTest, ExactRatios) {
  const DatasetSplit split = SplitDataset(NumberedDocs(10), {}, 1);
  EXPECT_EQ(split.train.size(), 7u);
  EXPECT_EQ(split.dev.size(), 1u);
  EXPECT_EQ(split.test.size(), 2u);
}

TEST(SplitTest, NineDocsWarnsOnEmptyDev) {
  const DatasetSplit split = SplitDataset(NumberedDocs(9), {}, 1);
  EXPECT_EQ(split.train.size() + split.dev.size() + split.test.size(), 9u);
  EXPECT_TRUE(split.dev.empty());
  EXPECT_FALSE(split.warnings.empty());
}

// Independent enumeration: every size triple that floors dev and test and
// gives train the remainder.
TEST(SplitTest, SizesMatchEnumeration) {
  const SplitRatios r;
  for (int n = 3; n <= 30; ++n) {
    int dev = 0, test = 0;
    while ((dev + 1) * 10 <= n * 1) ++dev;
    while ((test + 1) * 10 <= n * 2) ++test;
    EXPECT_EQ(ComputeSplitSizes(n, r), (SplitSizes{n - dev - test, dev, test}))
        << "n=" << n;
  }
}

TEST(SplitTest, PartitionAndDeterminism) {
  const std::vector<Doc> docs = NumberedDocs(23);
  const DatasetSplit a = SplitDataset(docs, {}, 7);
  const DatasetSplit b = SplitDataset(docs, {}, 7);
  EXPECT_EQ(ManifestText(a), ManifestText(b));
  std::set<std::string> seen;
  for (const auto *part : {&a.train, &a.dev, &a.test}) {
    for (const Doc &d : *part) EXPECT_TRUE(seen.insert(d.id).second);
  }
  EXPECT_EQ(seen.size(), docs.size());
  EXPECT_NE(ManifestText(a), ManifestText(SplitDataset(docs, {}, 8)));
}

TEST(SplitTest, Errors) {
  EXPECT_EQ(KindOf([] { SplitDataset(NumberedDocs(2), {}, 1); }),
            ErrorKind::kSize);
  EXPECT_EQ(KindOf([] { SplitDataset(NumberedDocs(5), {0.5, 0.5, 0.5}, 1); }),
            ErrorKind::kRange);
}

TEST(SplitTest, FractionArithmetic) {
  EXPECT_EQ(StratifyFraction(NumberedDocs(200), 0.05, 1).size(), 10u);
  const std::vector<Doc> docs = NumberedDocs(216);
  const auto a = StratifyFraction(docs, 0.30, 1);
  const auto b = StratifyFraction(docs, 0.30, 2);
  EXPECT_EQ(a.size(), 65u);
  EXPECT_EQ(b.size(), 65u);
  EXPECT_NE(a, b);
  EXPECT_EQ(StratifyFraction(docs, 1.0, 3), docs);
  EXPECT_EQ(KindOf([&] { StratifyFraction(docs, 0.0, 1); }), ErrorKind::kRange);
  EXPECT_EQ(KindOf([&] { StratifyFraction(docs, 1.5, 1); }), ErrorKind::kRange);
}

TEST(SplitTest, Holdout) {
  std::vector<Doc> docs = NumberedDocs(5, "glaucoma");
  for (Doc &d : NumberedDocs(3, "autism")) {
    d.id = "a" + d.id;
    docs.push_back(d);
  }
  const HoldoutSplit h = DomainHoldout(docs, "autism");
  EXPECT_EQ(h.test.size(), 3u);
  EXPECT_EQ(h.pool.size(), 5u);
  EXPECT_EQ(KindOf([&] { DomainHoldout(docs, "asthma"); }), ErrorKind::kLookup);
}

TEST(SplitTest, MixedPool) {
  std::vector<Doc> docs;
  for (const std::string domain : {"glaucoma", "cardio", "solid-tumour"}) {
    for (Doc &d : NumberedDocs(100, domain)) {
      d.id = domain + d.id;
      docs.push_back(d);
    }
  }
  EXPECT_EQ(BuildMixedPool(docs, {"glaucoma", "cardio", "solid-tumour"}, 72, 1)
                .size(),
            216u);
  EXPECT_EQ(KindOf([&] { BuildMixedPool(docs, {"autism"}, 1, 1); }),
            ErrorKind::kLookup);
  EXPECT_EQ(KindOf([&] { BuildMixedPool(docs, {"cardio"}, 101, 1); }),
            ErrorKind::kSize);
}

TEST(SplitTest, ManifestFormat) {
  const DatasetSplit split = SplitDataset(NumberedDocs(3), {}, 5);
  const std::string text = ManifestText(split);
  EXPECT_EQ(text.rfind("seed=5\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

}  // namespace
}  // namespace trialtab::corpus
