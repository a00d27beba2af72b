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

#include "trialtab/service.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "support/fixture.h"
#include "support/models.h"
#include "trialtab/corpus/annotation_io.h"
#include "trialtab/error.h"

namespace trialtab::service {
namespace {

using json = nlohmann::json;
using ::trialtab::testing::FixtureCorpus;
using ::trialtab::testing::TempDir;
using ::trialtab::testing::TrainedFixtureModels;

ServiceOptions FixedClock() {
  ServiceOptions options;
  options.clock = [] { return std::string("2026-01-01T00:00:00Z"); };
  return options;
}

template <typename F>
Error Catch(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e;
  }
  ADD_FAILURE() << "no error";
  return Error(ErrorKind::kIo, "none");
}

Doc Pending(int index) {
  Doc doc = FixtureCorpus()[index];
  doc.meta.answer = Answer::kPending;
  return doc;
}

Correction Accept(const Doc &doc) {
  Correction c;
  c.entities = doc.entities;
  c.relations = doc.relations;
  return c;
}

TEST(ServiceTest, ExtractWithModels) {
  ReviewService service(TrainedFixtureModels().MakePipeline(), nullptr);
  const Doc gold = FixtureCorpus()[1];
  const auto results = service.Extract({gold.text});
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].doc.entities, gold.entities);
  EXPECT_EQ(results[0].table, tabulate::AssembleTable(results[0].doc));
  EXPECT_EQ(results[0].table.rows, tabulate::AssembleTable(gold).rows);
  EXPECT_TRUE(service.Extract({}).empty());
}

TEST(ServiceTest, ExtractLimitsAndMissingModels) {
  ServiceOptions options;
  options.max_batch = 10000;
  ReviewService service(TrainedFixtureModels().MakePipeline(), nullptr, options);
  const std::vector<std::string> big(10001, "x");
  EXPECT_EQ(Catch([&] { service.Extract(big); }).kind(), ErrorKind::kSize);
  ReviewService bare(nullptr, nullptr);
  EXPECT_EQ(Catch([&] { bare.Extract({"x"}); }).kind(), ErrorKind::kConfig);
  EXPECT_TRUE(bare.Extract({}).empty());
}

TEST(ServiceTest, EnqueueListGet) {
  ReviewService service(TrainedFixtureModels().MakePipeline(), nullptr,
                        FixedClock());
  std::vector<std::string> sentences;
  for (int i = 0; i < 5; ++i) sentences.push_back(FixtureCorpus()[i].text);
  const auto items = service.Enqueue(sentences);
  ASSERT_EQ(items.size(), 5u);
  for (const ReviewItem &item : items) {
    EXPECT_EQ(item.status, ReviewStatus::kPending);
    EXPECT_FALSE(item.doc.entities.empty());
  }
  const Page pending = service.ListQueue(ReviewStatus::kPending, 0, 2);
  EXPECT_EQ(pending.total, 5u);
  ASSERT_EQ(pending.items.size(), 2u);
  EXPECT_EQ(pending.items[0].id, items[0].id);
  EXPECT_TRUE(service.ListQueue(ReviewStatus::kAccepted, 0, {}).items.empty());
  EXPECT_EQ(service.GetItem(items[3].id), items[3]);
  EXPECT_EQ(Catch([&] { service.GetItem("nope"); }).kind(),
            ErrorKind::kNotFound);
}

TEST(ServiceTest, CorrectionWidensOutcome) {
  ReviewService service(nullptr, nullptr, FixedClock());
  const Doc doc = ::trialtab::testing::ParseMarkup(
      "3", 0, "x", "mean [OC:o IOP] fell [MEAS:m 5%] on [INTV:a drug]",
      "OC_RES o>m;A1_RES a>m");
  service.EnqueueDocs({doc});
  Correction c = Accept(doc);
  c.entities[0].token_start = 0;
  c.relations = {{RelationLabel::kOcRes, 0, doc.entities[1].id()},
                 {RelationLabel::kA1Res, doc.entities[2].id(),
                  doc.entities[1].id()}};
  const ReviewItem item = service.SubmitCorrection(doc.id, c);
  EXPECT_EQ(item.status, ReviewStatus::kAccepted);
  EXPECT_EQ(item.revision, 1);
  ASSERT_EQ(item.table.rows.size(), 1u);
  EXPECT_EQ(item.table.rows[0].outcome, "mean IOP");
}

TEST(ServiceTest, InvalidAndDoubleSubmit) {
  ReviewService service(nullptr, nullptr, FixedClock());
  const Doc doc = Pending(1);
  service.EnqueueDocs({doc});
  Correction overlap = Accept(doc);
  overlap.entities.push_back({EntityLabel::kOc, doc.entities[0].token_start,
                              doc.entities[0].token_end + 1});
  const Error e = Catch([&] { service.SubmitCorrection(doc.id, overlap); });
  EXPECT_EQ(e.kind(), ErrorKind::kValidation);
  EXPECT_FALSE(e.details().empty());

  service.SubmitCorrection(doc.id, Accept(doc));
  EXPECT_EQ(Catch([&] { service.SubmitCorrection(doc.id, Accept(doc)); }).kind(),
            ErrorKind::kConflict);
  EXPECT_EQ(Catch([&] { service.EnqueueDocs({doc}); }).kind(),
            ErrorKind::kConflict);
}

TEST(ServiceTest, StaleRevisionConflicts) {
  ReviewService service(nullptr, nullptr, FixedClock());
  const Doc doc = Pending(2);
  service.EnqueueDocs({doc});
  Correction draft = Accept(doc);
  draft.verdict = ReviewStatus::kPending;
  draft.expected_revision = 0;
  EXPECT_EQ(service.SubmitCorrection(doc.id, draft).revision, 1);
  EXPECT_EQ(Catch([&] { service.SubmitCorrection(doc.id, draft); }).kind(),
            ErrorKind::kConflict);
}

TEST(ServiceTest, ExportLatestRevision) {
  ReviewService service(nullptr, nullptr, FixedClock());
  EXPECT_TRUE(service.ExportTrainingSet().empty());
  const Doc a = Pending(0), b = Pending(1), c = Pending(2);
  service.EnqueueDocs({a, b, c});
  Correction draft = Accept(a);
  draft.entities.pop_back();
  std::erase_if(draft.relations, [&](const RelationEdge &e) {
    return e.parent == a.entities.back().id() || e.child == a.entities.back().id();
  });
  draft.verdict = ReviewStatus::kPending;
  service.SubmitCorrection(a.id, draft);
  service.SubmitCorrection(a.id, Accept(a));
  service.SubmitCorrection(b.id, Accept(b));
  Correction reject = Accept(c);
  reject.verdict = ReviewStatus::kRejected;
  service.SubmitCorrection(c.id, reject);

  const std::vector<Doc> exported = service.ExportTrainingSet();
  ASSERT_EQ(exported.size(), 2u);
  EXPECT_EQ(exported[0].entities, a.entities);
  std::ostringstream out;
  corpus::WriteAnnotations(exported, out);
  std::istringstream in(out.str());
  const auto back = corpus::ParseAnnotations(in);
  EXPECT_EQ(back, exported);
  EXPECT_EQ(back[0].meta.answer, Answer::kAccept);
  EXPECT_EQ(service.ExportTrainingSet(true).size(), 3u);
}

TEST(StoreTest, ReplayIsDeterministic) {
  const std::string path = TempDir("store") + "/log.jsonl";
  {
    auto store = RecordStore::Open(path);
    ReviewService service(nullptr, store, FixedClock());
    service.EnqueueDocs({Pending(0), Pending(1)});
    service.SubmitCorrection(Pending(1).id, Accept(Pending(1)));
  }
  auto first = RecordStore::Open(path);
  auto second = RecordStore::Open(path);
  EXPECT_EQ(first->Snapshot(), second->Snapshot());
  EXPECT_EQ(first->LogLines().size(), 3u);
  ASSERT_EQ(first->size(), 2u);
  EXPECT_EQ(first->Get(Pending(1).id)->status, ReviewStatus::kAccepted);
  EXPECT_EQ(first->List(ReviewStatus::kPending).size(), 1u);
}

TEST(StoreTest, CorruptLineIsReported) {
  const std::string path = TempDir("corrupt") + "/log.jsonl";
  std::ofstream(path) << "{broken\n";
  EXPECT_THROW(RecordStore::Open(path), Error);
}

TEST(StoreTest, LogLineRoundTrip) {
  ReviewItem item;
  item.id = Pending(0).id;
  item.doc = Pending(0);
  item.table = tabulate::AssembleTable(item.doc);
  item.revision = 4;
  item.created_at = "a";
  item.updated_at = "b";
  EXPECT_EQ(ItemFromLogLine(ItemToLogLine(item)), item);
}

TEST(ConcurrencyTest, OneOfManySubmittersWins) {
  ReviewService service(nullptr, nullptr, FixedClock());
  const Doc doc = Pending(0);
  service.EnqueueDocs({doc});
  std::atomic<int> ok{0}, conflicts{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      try {
        service.SubmitCorrection(doc.id, Accept(doc));
        ++ok;
      } catch (const Error &e) {
        if (e.kind() == ErrorKind::kConflict) ++conflicts;
      }
    });
  }
  for (auto &t : threads) t.join();
  EXPECT_EQ(ok, 1);
  EXPECT_EQ(conflicts, 7);
  EXPECT_EQ(service.GetItem(doc.id).revision, 1);
}

TEST(HandlerTest, StatusCodes) {
  ReviewService service(nullptr, nullptr, FixedClock());
  auto call = [&](const std::string &method, const std::string &path,
                  const std::string &body = "",
                  std::multimap<std::string, std::string> query = {}) {
    return HandleRequest(service, method, path, query, body);
  };
  EXPECT_EQ(call("GET", "/healthz").status, 200);
  EXPECT_EQ(call("POST", "/extract", R"({"sentences":["a"]})").status, 503);
  EXPECT_EQ(call("POST", "/extract", R"({"sentences":[]})").status, 200);
  EXPECT_EQ(call("POST", "/extract", "{oops").status, 400);
  EXPECT_EQ(call("GET", "/items/none").status, 404);
  EXPECT_EQ(call("GET", "/nowhere").status, 404);
  EXPECT_EQ(call("GET", "/queue", "", {{"page", "x"}}).status, 400);

  const Doc doc = Pending(1);
  const json records = {json::parse(corpus::ToRecordLine(doc))};
  EXPECT_EQ(call("POST", "/queue", json{{"records", records}}.dump()).status,
            201);
  EXPECT_EQ(call("POST", "/queue", json{{"records", records}}.dump()).status,
            409);
  const HttpResponse listed = call("GET", "/queue", "", {{"status", "pending"}});
  EXPECT_EQ(json::parse(listed.body)["total"], 1);

  json bad = json::parse(corpus::ToRecordLine(doc));
  bad["spans"].push_back(bad["spans"][0]);
  const HttpResponse invalid =
      call("POST", "/items/" + doc.id + "/correction",
           json{{"spans", bad["spans"]}, {"relations", bad["relations"]}}.dump());
  EXPECT_EQ(invalid.status, 422);
  EXPECT_FALSE(json::parse(invalid.body)["violations"].empty());

  const std::string good = json{{"verdict", "accept"}, {"revision", 0}}.dump();
  EXPECT_EQ(call("POST", "/items/" + doc.id + "/correction", good).status, 200);
  EXPECT_EQ(call("POST", "/items/" + doc.id + "/correction", good).status, 409);
  const HttpResponse exported = call("GET", "/export/train");
  EXPECT_EQ(exported.content_type, "application/x-ndjson");
  EXPECT_EQ(corpus::FromRecordLine(exported.body.substr(0, exported.body.find('\n'))),
            [&] {
              Doc d = doc;
              d.meta.answer = Answer::kAccept;
              return d;
            }());
}

TEST(HttpTest, ServesOnEphemeralPort) {
  ReviewService service(TrainedFixtureModels().MakePipeline(), nullptr,
                        FixedClock());
  HttpServer server(service);
  const int port = server.Bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread listener([&] { server.ListenAfterBind(); });
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(json::parse(health->body)["models_loaded"], true);

  const std::string text = FixtureCorpus()[1].text;
  auto queued = client.Post("/queue", json{{"sentences", {text}}}.dump(),
                            "application/json");
  ASSERT_TRUE(queued);
  EXPECT_EQ(queued->status, 201);
  auto page = client.Get("/queue?status=pending&page=0&page_size=10");
  ASSERT_TRUE(page);
  EXPECT_EQ(json::parse(page->body)["items"].size(), 1u);
  server.Stop();
  listener.join();
}

}  // namespace
}  // namespace trialtab::service
