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

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <regex>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "trialtab/corpus/annotation_io.h"
#include "trialtab/error.h"

namespace trialtab::service {
namespace {

using json = nlohmann::json;

std::string UtcNow() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

json RecordJson(const Doc &doc) {
  return json::parse(corpus::ToRecordLine(doc));
}

json TableJson(const tabulate::EvidenceTable &table) {
  json rows = json::array();
  for (const tabulate::EvidenceTuple &row : table.rows) {
    rows.push_back({row.outcome, row.arm1, row.arm2});
  }
  return {{"header", table.header},
          {"rows", rows},
          {"diagnostics", table.diagnostics},
          {"csv", tabulate::EmitCsv(table)}};
}

json ItemJson(const ReviewItem &item) {
  return {{"id", item.id},
          {"status", ToString(item.status)},
          {"revision", item.revision},
          {"created_at", item.created_at},
          {"updated_at", item.updated_at},
          {"record", RecordJson(item.doc)},
          {"table", TableJson(item.table)}};
}

Answer AnswerFor(ReviewStatus status) {
  switch (status) {
    case ReviewStatus::kAccepted:
      return Answer::kAccept;
    case ReviewStatus::kRejected:
      return Answer::kReject;
    case ReviewStatus::kPending:
      break;
  }
  return Answer::kPending;
}

}  // namespace

std::string_view ToString(ReviewStatus status) {
  switch (status) {
    case ReviewStatus::kPending:
      return "pending";
    case ReviewStatus::kAccepted:
      return "accepted";
    case ReviewStatus::kRejected:
      return "rejected";
  }
  return "pending";
}

std::optional<ReviewStatus> ParseReviewStatus(std::string_view name) {
  if (name == "pending") return ReviewStatus::kPending;
  if (name == "accepted") return ReviewStatus::kAccepted;
  if (name == "rejected") return ReviewStatus::kRejected;
  return std::nullopt;
}

std::string ItemToLogLine(const ReviewItem &item) {
  json line = {{"id", item.id},
               {"status", ToString(item.status)},
               {"revision", item.revision},
               {"created_at", item.created_at},
               {"updated_at", item.updated_at},
               {"record", RecordJson(item.doc)}};
  return line.dump();
}

ReviewItem ItemFromLogLine(std::string_view line, int line_number) {
  const std::string where = "log line " + std::to_string(line_number);
  json value;
  try {
    value = json::parse(line);
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kParse, where + ": " + e.what());
  }
  try {
    ReviewItem item;
    item.id = value.at("id").get<std::string>();
    auto status = ParseReviewStatus(value.at("status").get<std::string>());
    if (!status) throw Error(ErrorKind::kSchema, where + ": bad status");
    item.status = *status;
    item.revision = value.at("revision").get<int>();
    item.created_at = value.at("created_at").get<std::string>();
    item.updated_at = value.at("updated_at").get<std::string>();
    item.doc = corpus::FromRecordLine(value.at("record").dump(), line_number);
    item.table = tabulate::AssembleTable(item.doc);
    return item;
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kSchema, where + ": " + e.what());
  }
}

RecordStore::RecordStore(std::string path) : path_(std::move(path)) {}

std::shared_ptr<RecordStore> RecordStore::Open(const std::string &path) {
  auto store = std::make_shared<RecordStore>(path);
  std::ifstream in(path);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    store->Index(ItemFromLogLine(line, number));
    store->log_.push_back(line);
  }
  return store;
}

void RecordStore::Append(const ReviewItem &item) {
  const std::string line = ItemToLogLine(item);
  std::unique_lock lock(mutex_);
  if (!path_.empty()) {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    out << line << '\n';
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "cannot append to " + path_);
  }
  log_.push_back(line);
  Index(item);
}

void RecordStore::Index(const ReviewItem &item) {
  auto [it, inserted] = index_.insert_or_assign(item.id, item);
  if (inserted) order_.push_back(item.id);
}

std::optional<ReviewItem> RecordStore::Get(const std::string &id) const {
  std::shared_lock lock(mutex_);
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool RecordStore::Contains(const std::string &id) const {
  std::shared_lock lock(mutex_);
  return index_.count(id) > 0;
}

std::vector<ReviewItem> RecordStore::List(
    std::optional<ReviewStatus> status) const {
  std::shared_lock lock(mutex_);
  std::vector<ReviewItem> items;
  for (const std::string &id : order_) {
    const ReviewItem &item = index_.at(id);
    if (!status || item.status == *status) items.push_back(item);
  }
  return items;
}

std::vector<ReviewItem> RecordStore::Snapshot() const {
  return List(std::nullopt);
}

std::size_t RecordStore::size() const {
  std::shared_lock lock(mutex_);
  return index_.size();
}

std::vector<std::string> RecordStore::LogLines() const {
  std::shared_lock lock(mutex_);
  return log_;
}

ReviewService::ReviewService(std::shared_ptr<const Pipeline> pipeline,
                             std::shared_ptr<RecordStore> store,
                             ServiceOptions options)
    : pipeline_(std::move(pipeline)),
      store_(std::move(store)),
      options_(std::move(options)) {
  if (!store_) store_ = std::make_shared<RecordStore>();
}

std::string ReviewService::Now() const {
  return options_.clock ? options_.clock() : UtcNow();
}

ReviewItem ReviewService::NewItem(Doc doc) const {
  ReviewItem item;
  item.id = doc.id;
  doc.meta.answer = Answer::kPending;
  item.table = tabulate::AssembleTable(doc);
  item.doc = std::move(doc);
  item.created_at = Now();
  item.updated_at = item.created_at;
  return item;
}

std::vector<Extraction> ReviewService::Extract(
    const std::vector<std::string> &sentences) const {
  if (sentences.size() > options_.max_batch) {
    throw Error(ErrorKind::kSize,
                "batch of " + std::to_string(sentences.size()) +
                    " sentences exceeds the cap of " +
                    std::to_string(options_.max_batch));
  }
  if (sentences.empty()) return {};
  if (!pipeline_) throw Error(ErrorKind::kConfig, "models are not loaded");
  std::vector<Extraction> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    Doc doc = pipeline_->AnnotateText(
        MakeDocId("extract", static_cast<int>(i)), sentences[i]);
    tabulate::EvidenceTable table = tabulate::AssembleTable(doc);
    out.push_back({std::move(doc), std::move(table)});
  }
  return out;
}

std::vector<ReviewItem> ReviewService::Enqueue(
    const std::vector<std::string> &sentences) {
  if (sentences.size() > options_.max_batch) {
    throw Error(ErrorKind::kSize, "batch exceeds the cap of " +
                                      std::to_string(options_.max_batch));
  }
  if (sentences.empty()) return {};
  if (!pipeline_) throw Error(ErrorKind::kConfig, "models are not loaded");
  std::lock_guard lock(store_->write_mutex());
  std::vector<Doc> docs;
  std::size_t next = store_->size();
  for (const std::string &text : sentences) {
    std::string id;
    do {
      id = MakeDocId("queue", static_cast<int>(next++));
    } while (store_->Contains(id));
    docs.push_back(pipeline_->AnnotateText(id, text));
  }
  return AppendNewLocked(docs);
}

std::vector<ReviewItem> ReviewService::EnqueueDocs(
    const std::vector<Doc> &docs) {
  if (docs.size() > options_.max_batch) {
    throw Error(ErrorKind::kSize, "batch exceeds the cap of " +
                                      std::to_string(options_.max_batch));
  }
  std::vector<std::string> problems;
  std::map<std::string, int> seen;
  for (const Doc &doc : docs) {
    if (++seen[doc.id] > 1) problems.push_back(doc.id + ": repeated id");
    for (const std::string &v : CheckInvariants(doc)) {
      problems.push_back(doc.id + ": " + v);
    }
  }
  if (!problems.empty()) {
    throw Error(ErrorKind::kValidation, "invalid docs", problems);
  }
  std::lock_guard lock(store_->write_mutex());
  return AppendNewLocked(docs);
}

std::vector<ReviewItem> ReviewService::AppendNewLocked(
    const std::vector<Doc> &docs) {
  for (const Doc &doc : docs) {
    if (store_->Contains(doc.id)) {
      throw Error(ErrorKind::kConflict, "item " + doc.id + " already exists");
    }
  }
  std::vector<ReviewItem> items;
  for (const Doc &doc : docs) {
    items.push_back(NewItem(doc));
    store_->Append(items.back());
  }
  return items;
}

Page ReviewService::ListQueue(std::optional<ReviewStatus> status, int page,
                              std::optional<int> page_size) const {
  Page out;
  out.page = std::max(0, page);
  out.page_size = std::clamp(page_size.value_or(options_.default_page_size),
                             1, options_.max_page_size);
  std::vector<ReviewItem> items = store_->List(status);
  out.total = items.size();
  const std::size_t begin =
      std::min(items.size(), static_cast<std::size_t>(out.page) * out.page_size);
  const std::size_t end = std::min(items.size(), begin + out.page_size);
  out.items.assign(std::make_move_iterator(items.begin() + begin),
                   std::make_move_iterator(items.begin() + end));
  return out;
}

ReviewItem ReviewService::GetItem(const std::string &id) const {
  std::optional<ReviewItem> item = store_->Get(id);
  if (!item) throw Error(ErrorKind::kNotFound, "no item " + id);
  return *item;
}

ReviewItem ReviewService::SubmitCorrection(const std::string &id,
                                           const Correction &correction) {
  std::lock_guard lock(store_->write_mutex());
  std::optional<ReviewItem> current = store_->Get(id);
  if (!current) throw Error(ErrorKind::kNotFound, "no item " + id);
  if (current->status != ReviewStatus::kPending) {
    throw Error(ErrorKind::kConflict,
                "item " + id + " is already " +
                    std::string(ToString(current->status)));
  }
  if (correction.expected_revision &&
      *correction.expected_revision != current->revision) {
    throw Error(ErrorKind::kConflict,
                "item " + id + " is at revision " +
                    std::to_string(current->revision) + ", not " +
                    std::to_string(*correction.expected_revision));
  }
  ReviewItem item = *current;
  item.doc.entities = correction.entities;
  item.doc.relations = correction.relations;
  Canonicalize(item.doc);
  std::vector<std::string> violations =
      CheckInvariants(item.doc, /*gold_direction=*/true);
  if (!violations.empty()) {
    throw Error(ErrorKind::kValidation,
                "correction breaks " + std::to_string(violations.size()) +
                    " invariant(s)",
                violations);
  }
  item.status = correction.verdict;
  item.doc.meta.answer = AnswerFor(item.status);
  item.revision += 1;
  item.updated_at = Now();
  item.table = tabulate::AssembleTable(item.doc);
  store_->Append(item);
  return item;
}

std::vector<Doc> ReviewService::ExportTrainingSet(bool include_rejected) const {
  std::vector<Doc> docs;
  for (const ReviewItem &item : store_->Snapshot()) {
    if (item.status == ReviewStatus::kAccepted ||
        (include_rejected && item.status == ReviewStatus::kRejected)) {
      docs.push_back(item.doc);
    }
  }
  return docs;
}

namespace {

int StatusFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNotFound:
      return 404;
    case ErrorKind::kConflict:
      return 409;
    case ErrorKind::kSize:
      return 413;
    case ErrorKind::kValidation:
    case ErrorKind::kIntegrity:
      return 422;
    case ErrorKind::kConfig:
      return 503;
    case ErrorKind::kParse:
    case ErrorKind::kSchema:
    case ErrorKind::kFormat:
    case ErrorKind::kRange:
      return 400;
    default:
      return 500;
  }
}

HttpResponse ErrorResponse(int status, std::string_view code,
                           const std::string &message,
                           const std::vector<std::string> &violations = {}) {
  json body = {{"code", code}, {"message", message}, {"violations", violations}};
  return {status, body.dump()};
}

json ParseBody(const std::string &body) {
  try {
    return json::parse(body.empty() ? "{}" : body);
  } catch (const json::exception &e) {
    throw Error(ErrorKind::kParse, std::string("request body: ") + e.what());
  }
}

std::vector<std::string> Sentences(const json &body) {
  if (!body.contains("sentences")) return {};
  const json &list = body.at("sentences");
  if (!list.is_array()) {
    throw Error(ErrorKind::kSchema, "\"sentences\" must be an array");
  }
  std::vector<std::string> out;
  for (const json &s : list) {
    if (!s.is_string()) {
      throw Error(ErrorKind::kSchema, "\"sentences\" must hold strings");
    }
    out.push_back(s.get<std::string>());
  }
  return out;
}

std::optional<std::string> QueryValue(
    const std::multimap<std::string, std::string> &query,
    const std::string &key) {
  auto it = query.find(key);
  if (it == query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

int QueryInt(const std::multimap<std::string, std::string> &query,
             const std::string &key, int fallback) {
  std::optional<std::string> value = QueryValue(query, key);
  if (!value) return fallback;
  try {
    std::size_t used = 0;
    int parsed = std::stoi(*value, &used);
    if (used != value->size()) throw std::invalid_argument(key);
    return parsed;
  } catch (const std::exception &) {
    throw Error(ErrorKind::kParse, "query parameter " + key +
                                       " must be an integer");
  }
}

Correction ParseCorrection(const Doc &doc, const json &body) {
  Correction correction;
  std::vector<std::string> violations;
  // Reuse the record parser for span and relation shapes.
  json record = RecordJson(doc);
  if (body.contains("spans")) record["spans"] = body.at("spans");
  if (body.contains("relations")) record["relations"] = body.at("relations");
  Doc corrected;
  try {
    corrected = corpus::FromRecordLine(record.dump());
  } catch (const Error &e) {
    violations.push_back(e.what());
    for (const std::string &d : e.details()) violations.push_back(d);
    throw Error(ErrorKind::kValidation, "malformed correction", violations);
  }
  correction.entities = corrected.entities;
  correction.relations = corrected.relations;
  const std::string verdict =
      body.contains("verdict") ? body.at("verdict").get<std::string>()
                               : "accept";
  if (verdict == "accept") {
    correction.verdict = ReviewStatus::kAccepted;
  } else if (verdict == "reject") {
    correction.verdict = ReviewStatus::kRejected;
  } else if (verdict == "pending") {
    correction.verdict = ReviewStatus::kPending;
  } else {
    throw Error(ErrorKind::kValidation, "unknown verdict",
                {"verdict must be accept, reject or pending"});
  }
  if (body.contains("revision")) {
    correction.expected_revision = body.at("revision").get<int>();
  }
  return correction;
}

HttpResponse Route(ReviewService &service, const std::string &method,
                   const std::string &path,
                   const std::multimap<std::string, std::string> &query,
                   const std::string &body) {
  static const std::regex kItem("^/items/([^/]+)$");
  static const std::regex kCorrection("^/items/([^/]+)/correction$");
  std::smatch match;

  if (path == "/healthz" && method == "GET") {
    json out = {{"status", "ok"}, {"models_loaded", service.models_loaded()}};
    return {200, out.dump()};
  }
  if (path == "/extract" && method == "POST") {
    json out = {{"results", json::array()}};
    for (const Extraction &e : service.Extract(Sentences(ParseBody(body)))) {
      json record = RecordJson(e.doc);
      out["results"].push_back({{"id", e.doc.id},
                                {"tokens", record["tokens"]},
                                {"entities", record["spans"]},
                                {"relations", record["relations"]},
                                {"table", TableJson(e.table)}});
    }
    return {200, out.dump()};
  }
  if (path == "/queue" && method == "POST") {
    const json request = ParseBody(body);
    std::vector<ReviewItem> items = service.Enqueue(Sentences(request));
    if (request.contains("records")) {
      std::vector<Doc> docs;
      int n = 0;
      for (const json &record : request.at("records")) {
        docs.push_back(corpus::FromRecordLine(record.dump(), ++n));
      }
      for (ReviewItem &item : service.EnqueueDocs(docs)) {
        items.push_back(std::move(item));
      }
    }
    json out = {{"items", json::array()}};
    for (const ReviewItem &item : items) out["items"].push_back(ItemJson(item));
    return {201, out.dump()};
  }
  if (path == "/queue" && method == "GET") {
    std::optional<ReviewStatus> status;
    if (auto name = QueryValue(query, "status")) {
      status = ParseReviewStatus(*name);
      if (!status) throw Error(ErrorKind::kParse, "unknown status " + *name);
    }
    std::optional<int> page_size;
    if (QueryValue(query, "page_size")) {
      page_size = QueryInt(query, "page_size", 0);
    }
    Page page = service.ListQueue(status, QueryInt(query, "page", 0), page_size);
    json out = {{"page", page.page},
                {"page_size", page.page_size},
                {"total", page.total},
                {"items", json::array()}};
    for (const ReviewItem &item : page.items) {
      out["items"].push_back(ItemJson(item));
    }
    return {200, out.dump()};
  }
  if (std::regex_match(path, match, kCorrection) && method == "POST") {
    const std::string id = match[1];
    const ReviewItem current = service.GetItem(id);
    const Correction correction = ParseCorrection(current.doc, ParseBody(body));
    return {200, ItemJson(service.SubmitCorrection(id, correction)).dump()};
  }
  if (std::regex_match(path, match, kItem) && method == "GET") {
    return {200, ItemJson(service.GetItem(match[1])).dump()};
  }
  if (path == "/export/train" && method == "GET") {
    const bool rejected = QueryValue(query, "include_rejected") == "true";
    std::ostringstream out;
    corpus::WriteAnnotations(service.ExportTrainingSet(rejected), out);
    return {200, out.str(), "application/x-ndjson"};
  }
  return ErrorResponse(404, "not_found", "no route for " + method + " " + path);
}

}  // namespace

HttpResponse HandleRequest(ReviewService &service, const std::string &method,
                           const std::string &path,
                           const std::multimap<std::string, std::string> &query,
                           const std::string &body) {
  try {
    return Route(service, method, path, query, body);
  } catch (const Error &e) {
    return ErrorResponse(StatusFor(e.kind()), ErrorKindName(e.kind()),
                         e.what(), e.details());
  } catch (const json::exception &e) {
    return ErrorResponse(400, "schema", e.what());
  } catch (const std::exception &e) {
    return ErrorResponse(500, "internal", e.what());
  }
}

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(ReviewService &service)
    : impl_(std::make_unique<Impl>()) {
  auto handler = [&service](const httplib::Request &request,
                            httplib::Response &response) {
    std::multimap<std::string, std::string> query(request.params.begin(),
                                                  request.params.end());
    HttpResponse out = HandleRequest(service, request.method, request.path,
                                     query, request.body);
    response.status = out.status;
    response.set_content(out.body, out.content_type);
  };
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
}

HttpServer::~HttpServer() = default;

int HttpServer::Bind(const std::string &host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::ListenAfterBind() { impl_->server.listen_after_bind(); }

void HttpServer::Stop() { impl_->server.stop(); }

}  // namespace trialtab::service
