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
#ifndef TRIALTAB_SERVICE_H_
#define TRIALTAB_SERVICE_H_

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "trialtab/doc.h"
#include "trialtab/pipeline.h"
#include "trialtab/tabulate.h"

namespace trialtab::service {

enum class ReviewStatus { kPending, kAccepted, kRejected };

std::string_view ToString(ReviewStatus status);
std::optional<ReviewStatus> ParseReviewStatus(std::string_view name);

struct ReviewItem {
  std::string id;
  Doc doc;
  tabulate::EvidenceTable table;
  ReviewStatus status = ReviewStatus::kPending;
  int revision = 0;
  std::string created_at;
  std::string updated_at;

  bool operator==(const ReviewItem &) const = default;
};

// One JSON object per item revision; `table` is derived on load.
std::string ItemToLogLine(const ReviewItem &item);
ReviewItem ItemFromLogLine(std::string_view line, int line_number = 0);

// Append-only revision log with a derived index of the latest revision of
// each item. With an empty path the log lives in memory only. Appends are
// serialized; readers share a lock.
class RecordStore {
 public:
  explicit RecordStore(std::string path = "");

  // Replays an existing log. Throws Error(kParse) or Error(kSchema) for a
  // corrupt line.
  static std::shared_ptr<RecordStore> Open(const std::string &path);

  // Writes the revision, then indexes it. Throws Error(kIo).
  void Append(const ReviewItem &item);

  std::optional<ReviewItem> Get(const std::string &id) const;
  bool Contains(const std::string &id) const;
  // Items in first-enqueued order, optionally filtered by status.
  std::vector<ReviewItem> List(std::optional<ReviewStatus> status) const;
  std::size_t size() const;
  std::vector<std::string> LogLines() const;

  // Latest revision per id, in first-enqueued order.
  std::vector<ReviewItem> Snapshot() const;

  // Serializes read-check-append sequences of the owning service.
  std::mutex &write_mutex() { return write_mutex_; }

 private:
  void Index(const ReviewItem &item);

  std::string path_;
  mutable std::shared_mutex mutex_;
  std::mutex write_mutex_;
  std::vector<std::string> log_;
  std::vector<std::string> order_;
  std::map<std::string, ReviewItem> index_;
};

struct Correction {
  std::vector<EntitySpan> entities;
  std::vector<RelationEdge> relations;
  // kPending keeps the item in the queue as a saved draft.
  ReviewStatus verdict = ReviewStatus::kAccepted;
  std::optional<int> expected_revision;
};

struct Page {
  std::vector<ReviewItem> items;
  int page = 0;
  int page_size = 0;
  std::size_t total = 0;
};

struct ServiceOptions {
  std::size_t max_batch = 10000;
  int default_page_size = 50;
  int max_page_size = 1000;
  std::function<std::string()> clock;  // UTC timestamp; defaults to now
};

struct Extraction {
  Doc doc;
  tabulate::EvidenceTable table;
};

class ReviewService {
 public:
  // `pipeline` may be null: extraction and raw-sentence enqueueing then
  // fail with Error(kConfig).
  ReviewService(std::shared_ptr<const Pipeline> pipeline,
                std::shared_ptr<RecordStore> store,
                ServiceOptions options = {});

  bool models_loaded() const { return pipeline_ != nullptr; }

  // Error(kSize) above the batch cap.
  std::vector<Extraction> Extract(const std::vector<std::string> &sentences) const;

  // Raw sentences are tokenized and pre-annotated; docs keep their
  // annotations. Throws Error(kConflict) for an id already queued.
  std::vector<ReviewItem> Enqueue(const std::vector<std::string> &sentences);
  std::vector<ReviewItem> EnqueueDocs(const std::vector<Doc> &docs);

  Page ListQueue(std::optional<ReviewStatus> status, int page,
                 std::optional<int> page_size) const;

  // Error(kNotFound) for an unknown id.
  ReviewItem GetItem(const std::string &id) const;

  // Error(kNotFound), Error(kConflict) when the item is no longer pending or
  // its revision differs from `expected_revision`, Error(kValidation) with
  // one detail per broken invariant.
  ReviewItem SubmitCorrection(const std::string &id,
                              const Correction &correction);

  // Accepted docs (and rejected ones with answer=reject on request) in the
  // annotation record format.
  std::vector<Doc> ExportTrainingSet(bool include_rejected = false) const;

 private:
  std::string Now() const;
  ReviewItem NewItem(Doc doc) const;
  // Caller holds the store's write mutex.
  std::vector<ReviewItem> AppendNewLocked(const std::vector<Doc> &docs);

  std::shared_ptr<const Pipeline> pipeline_;
  std::shared_ptr<RecordStore> store_;
  ServiceOptions options_;
  Tokenizer tokenizer_;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Routes one request. `query` holds decoded query parameters. Errors come
// back as {"code","message","violations"} with a matching status.
HttpResponse HandleRequest(ReviewService &service, const std::string &method,
                           const std::string &path,
                           const std::multimap<std::string, std::string> &query,
                           const std::string &body);

// Blocks serving HTTP until Stop() is called from another thread.
class HttpServer {
 public:
  explicit HttpServer(ReviewService &service);
  ~HttpServer();

  // Binds `host`:`port` (0 picks a free port) and returns the port, or -1.
  int Bind(const std::string &host, int port);
  void ListenAfterBind();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace trialtab::service

#endif  // TRIALTAB_SERVICE_H_
