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
#include "trialtab/corpus/annotation_io.h"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "trialtab/error.h"

namespace trialtab::corpus {
namespace {

using json = nlohmann::json;

const json &Require(const json &object, const char *key,
                    const std::string &where) {
  if (!object.is_object() || !object.contains(key)) {
    throw Error(ErrorKind::kSchema,
                where + ": missing \"" + std::string(key) + "\" key");
  }
  return object.at(key);
}

template <typename T>
T Get(const json &object, const char *key, const std::string &where) {
  const json &value = Require(object, key, where);
  try {
    return value.get<T>();
  } catch (const json::exception &) {
    throw Error(ErrorKind::kSchema,
                where + ": \"" + std::string(key) + "\" has the wrong type");
  }
}

}  // namespace

std::string ToRecordLine(const Doc &doc) {
  json tokens = json::array();
  for (const Token &tok : doc.tokens) {
    tokens.push_back(
        {{"text", tok.text}, {"start", tok.start}, {"end", tok.end},
         {"id", tok.index}});
  }
  json spans = json::array();
  for (const EntitySpan &span : doc.entities) {
    spans.push_back({{"token_start", span.token_start},
                     {"token_end", span.token_end},
                     {"label", ToString(span.label)}});
  }
  json relations = json::array();
  for (const RelationEdge &edge : doc.relations) {
    relations.push_back({{"head", edge.parent},
                         {"child", edge.child},
                         {"label", ToString(edge.label)}});
  }
  json meta = {{"pmid", doc.meta.pmid},
               {"domain", doc.meta.domain},
               {"id", doc.id}};
  if (doc.meta.low_confidence) meta["low_confidence"] = true;
  json record = {{"text", doc.text},     {"tokens", tokens},
                 {"spans", spans},       {"relations", relations},
                 {"meta", meta},         {"answer", ToString(doc.meta.answer)}};
  return record.dump();
}

Doc FromRecordLine(std::string_view line, int line_number) {
  const std::string where = "line " + std::to_string(line_number);
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error &e) {
    throw Error(ErrorKind::kParse, where + ": " + e.what());
  }
  if (!record.is_object()) {
    throw Error(ErrorKind::kSchema, where + ": record is not an object");
  }

  Doc doc;
  doc.text = Get<std::string>(record, "text", where);
  const json &tokens = Require(record, "tokens", where);
  if (!tokens.is_array()) {
    throw Error(ErrorKind::kSchema, where + ": \"tokens\" is not an array");
  }
  for (const json &t : tokens) {
    Token tok;
    tok.text = Get<std::string>(t, "text", where);
    tok.start = Get<std::size_t>(t, "start", where);
    tok.end = Get<std::size_t>(t, "end", where);
    tok.index = Get<int>(t, "id", where);
    doc.tokens.push_back(std::move(tok));
  }
  if (record.contains("spans")) {
    for (const json &s : record.at("spans")) {
      std::string name = Get<std::string>(s, "label", where);
      std::optional<EntityLabel> label = ParseEntityLabel(name);
      if (!label) {
        throw Error(ErrorKind::kSchema,
                    where + ": unknown entity label '" + name + "'");
      }
      doc.entities.push_back({*label, Get<int>(s, "token_start", where),
                              Get<int>(s, "token_end", where)});
    }
  }
  if (record.contains("relations")) {
    for (const json &r : record.at("relations")) {
      std::string name = Get<std::string>(r, "label", where);
      std::optional<RelationLabel> label = ParseRelationLabel(name);
      if (!label) {
        throw Error(ErrorKind::kSchema,
                    where + ": unknown relation label '" + name + "'");
      }
      doc.relations.push_back({*label, Get<int>(r, "head", where),
                               Get<int>(r, "child", where)});
    }
  }
  if (record.contains("meta")) {
    const json &meta = record.at("meta");
    if (meta.contains("pmid")) {
      doc.meta.pmid = Get<std::string>(meta, "pmid", where);
    }
    if (meta.contains("domain")) {
      doc.meta.domain = Get<std::string>(meta, "domain", where);
    }
    if (meta.contains("id")) doc.id = Get<std::string>(meta, "id", where);
    if (meta.contains("low_confidence")) {
      doc.meta.low_confidence = Get<bool>(meta, "low_confidence", where);
    }
  }
  if (record.contains("answer")) {
    std::string name = Get<std::string>(record, "answer", where);
    std::optional<Answer> answer = ParseAnswer(name);
    if (!answer) {
      throw Error(ErrorKind::kSchema,
                  where + ": unknown answer '" + name + "'");
    }
    doc.meta.answer = *answer;
  }
  Canonicalize(doc);
  std::vector<std::string> problems = CheckInvariants(doc);
  if (!problems.empty()) {
    throw Error(ErrorKind::kSchema, where + ": " + problems.front(), problems);
  }
  return doc;
}

std::vector<Doc> ParseAnnotations(std::istream &in) {
  std::vector<Doc> docs;
  std::string line;
  int line_number = 0;
  // Records without a stored id get "<pmid>:<k>", k counting per pmid.
  std::map<std::string, int> per_pmid;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Doc doc = FromRecordLine(line, line_number);
    int k = per_pmid[doc.meta.pmid]++;
    if (doc.id.empty()) doc.id = MakeDocId(doc.meta.pmid, k);
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Doc> ReadAnnotations(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  try {
    return ParseAnnotations(in);
  } catch (const Error &e) {
    throw Error(e.kind(), path + ": " + e.what(), e.details());
  }
}

void WriteAnnotations(const std::vector<Doc> &docs, std::ostream &out) {
  for (const Doc &doc : docs) out << ToRecordLine(doc) << '\n';
}

void WriteAnnotations(const std::vector<Doc> &docs, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  WriteAnnotations(docs, out);
}

std::vector<Doc> FilterRejected(std::vector<Doc> docs) {
  std::erase_if(docs,
                [](const Doc &d) { return d.meta.answer == Answer::kReject; });
  return docs;
}

}  // namespace trialtab::corpus
